#pragma once

// Time integration of the finger state equations, trajectory recording and
// energy auditing. Fixed-step RK4, semi-implicit Euler, and an embedded
// RKF4(5) adaptive pair are provided; the state vector is (q, qdot).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fingersim/actuation.hpp"
#include "fingersim/dynamics.hpp"
#include "fingersim/params.hpp"

namespace fingersim {

struct NonFiniteState : std::runtime_error {
    double t;
    JointState state;
    NonFiniteState(double time, JointState s)
        : std::runtime_error("state became non-finite at t=" + std::to_string(time)),
          t(time),
          state(std::move(s)) {}
};

struct StepUnderflow : std::runtime_error {
    double t;
    double h;
    StepUnderflow(double time, double step)
        : std::runtime_error("adaptive step underflow at t=" + std::to_string(time) +
                             " (h=" + std::to_string(step) + ")"),
          t(time),
          h(step) {}
};

enum class Integrator { FixedRK4, SemiImplicitEuler, AdaptiveRK45 };

inline const char* to_string(Integrator i) {
    switch (i) {
        case Integrator::FixedRK4: return "rk4";
        case Integrator::SemiImplicitEuler: return "semi_implicit_euler";
        default: return "rk45";
    }
}

struct SimConfig {
    Integrator integrator = Integrator::FixedRK4;
    double step = 1e-4;       // fixed-step size (s)
    double rtol = 1e-8;       // adaptive tolerances
    double atol = 1e-10;
    double h_min = 1e-9;
    double h_max = 1e-2;
    double t_end = 2.0;
    double record_every = 1e-3;
    JointState initial{};
    ModelVariant variant = ModelVariant::Full;

    void validate(const std::string& prefix = "sim.") const {
        if (!(step > 0)) throw ValidationError(prefix + "step", "must be > 0");
        if (!(t_end > 0)) throw ValidationError(prefix + "t_end", "must be > 0");
        if (!(record_every > 0)) throw ValidationError(prefix + "record_every", "must be > 0");
        if (!(rtol > 0)) throw ValidationError(prefix + "rtol", "must be > 0");
        if (!(atol > 0)) throw ValidationError(prefix + "atol", "must be > 0");
        if (!(h_min > 0)) throw ValidationError(prefix + "h_min", "must be > 0");
        if (!(h_min <= h_max)) throw ValidationError(prefix + "h_min", "must be <= h_max");
        if (!all_finite(initial.q) || !all_finite(initial.qdot))
            throw ValidationError(prefix + "initial", "must be finite");
    }
};

struct TrajectorySample {
    double t = 0;
    Vec3 q = Vec3::Zero();
    Vec3 qdot = Vec3::Zero();
    Vec3 qddot = Vec3::Zero();
    Vec3 tau = Vec3::Zero();
    double kinetic = 0;
    double potential = 0;
    double energy = 0;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    std::uint64_t params_hash = 0;
    ModelVariant variant = ModelVariant::Full;
    std::string integrator;
    double step = 0;
    double t_end = 0;
    double record_every = 0;
};

using TorqueFn = std::function<Vec3(double, const JointState&)>;

namespace detail {

struct Deriv {
    Vec3 dq;
    Vec3 dqd;
};

inline Deriv eval(double t, const JointState& s, const TorqueFn& torque,
                  const FingerParams& p, ModelVariant v) {
    return {s.qdot, forward_dynamics(s, torque(t, s), p, v)};
}

inline JointState advance(const JointState& s, double h, const Deriv& d) {
    return {s.q + h * d.dq, s.qdot + h * d.dqd};
}

}  // namespace detail

// Classical 4-stage explicit RK step on (q, qdot).
inline JointState step_rk4(const JointState& s, double t, double h, const TorqueFn& torque,
                           const FingerParams& p, ModelVariant v) try {
    using detail::advance;
    using detail::eval;
    auto k1 = eval(t, s, torque, p, v);
    auto k2 = eval(t + 0.5 * h, advance(s, 0.5 * h, k1), torque, p, v);
    auto k3 = eval(t + 0.5 * h, advance(s, 0.5 * h, k2), torque, p, v);
    auto k4 = eval(t + h, advance(s, h, k3), torque, p, v);
    JointState out;
    out.q = s.q + (h / 6.0) * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq);
    out.qdot = s.qdot + (h / 6.0) * (k1.dqd + 2.0 * k2.dqd + 2.0 * k3.dqd + k4.dqd);
    if (!all_finite(out.q) || !all_finite(out.qdot)) throw NonFiniteState(t + h, out);
    return out;
} catch (const NonFiniteInput&) {
    throw NonFiniteState(t, s);  // a stage state diverged
}

inline JointState step_semi_implicit_euler(const JointState& s, double t, double h,
                                           const TorqueFn& torque, const FingerParams& p,
                                           ModelVariant v) try {
    Vec3 qdd = forward_dynamics(s, torque(t, s), p, v);
    JointState out;
    out.qdot = s.qdot + h * qdd;
    out.q = s.q + h * out.qdot;
    if (!all_finite(out.q) || !all_finite(out.qdot)) throw NonFiniteState(t + h, out);
    return out;
} catch (const NonFiniteInput&) {
    throw NonFiniteState(t, s);
}

struct AdaptiveResult {
    JointState state;
    double t_new = 0;
    double h_next = 0;
};

// One accepted step of the embedded Fehlberg 4(5) pair. Retries with smaller
// h on rejection; throws StepUnderflow below cfg.h_min. Propagates the
// 5th-order solution; step-size law: safety 0.9, exponent 1/5, growth
// clamped to [0.2, 5].
inline AdaptiveResult step_adaptive(const JointState& s, double t, double h_try,
                                    const TorqueFn& torque, const FingerParams& p,
                                    ModelVariant v, const SimConfig& cfg,
                                    double h_cap = -1.0) try {
    using detail::Deriv;
    using detail::eval;
    const double h_limit = h_cap > 0 ? std::min(h_cap, cfg.h_max) : cfg.h_max;
    double h = std::clamp(h_try, cfg.h_min, h_limit);

    for (;;) {
        Deriv k1 = eval(t, s, torque, p, v);
        auto at = [&](double c, const Vec3& dq, const Vec3& dqd) {
            JointState st{s.q + h * dq, s.qdot + h * dqd};
            return eval(t + c * h, st, torque, p, v);
        };
        Deriv k2 = at(1.0 / 4, (1.0 / 4) * k1.dq, (1.0 / 4) * k1.dqd);
        Deriv k3 = at(3.0 / 8, (3.0 / 32) * k1.dq + (9.0 / 32) * k2.dq,
                      (3.0 / 32) * k1.dqd + (9.0 / 32) * k2.dqd);
        Deriv k4 = at(12.0 / 13,
                      (1932.0 / 2197) * k1.dq - (7200.0 / 2197) * k2.dq + (7296.0 / 2197) * k3.dq,
                      (1932.0 / 2197) * k1.dqd - (7200.0 / 2197) * k2.dqd +
                          (7296.0 / 2197) * k3.dqd);
        Deriv k5 = at(1.0,
                      (439.0 / 216) * k1.dq - 8.0 * k2.dq + (3680.0 / 513) * k3.dq -
                          (845.0 / 4104) * k4.dq,
                      (439.0 / 216) * k1.dqd - 8.0 * k2.dqd + (3680.0 / 513) * k3.dqd -
                          (845.0 / 4104) * k4.dqd);
        Deriv k6 = at(0.5,
                      -(8.0 / 27) * k1.dq + 2.0 * k2.dq - (3544.0 / 2565) * k3.dq +
                          (1859.0 / 4104) * k4.dq - (11.0 / 40) * k5.dq,
                      -(8.0 / 27) * k1.dqd + 2.0 * k2.dqd - (3544.0 / 2565) * k3.dqd +
                          (1859.0 / 4104) * k4.dqd - (11.0 / 40) * k5.dqd);

        Vec3 q5 = s.q + h * ((16.0 / 135) * k1.dq + (6656.0 / 12825) * k3.dq +
                             (28561.0 / 56430) * k4.dq - (9.0 / 50) * k5.dq +
                             (2.0 / 55) * k6.dq);
        Vec3 qd5 = s.qdot + h * ((16.0 / 135) * k1.dqd + (6656.0 / 12825) * k3.dqd +
                                 (28561.0 / 56430) * k4.dqd - (9.0 / 50) * k5.dqd +
                                 (2.0 / 55) * k6.dqd);
        Vec3 q4 = s.q + h * ((25.0 / 216) * k1.dq + (1408.0 / 2565) * k3.dq +
                             (2197.0 / 4104) * k4.dq - (1.0 / 5) * k5.dq);
        Vec3 qd4 = s.qdot + h * ((25.0 / 216) * k1.dqd + (1408.0 / 2565) * k3.dqd +
                                 (2197.0 / 4104) * k4.dqd - (1.0 / 5) * k5.dqd);

        if (!all_finite(q5) || !all_finite(qd5)) throw NonFiniteState(t + h, {q5, qd5});

        double err = 0;
        for (int i = 0; i < 3; ++i) {
            err = std::max(err, std::abs(q5[i] - q4[i]) /
                                    (cfg.atol + cfg.rtol * std::abs(q5[i])));
            err = std::max(err, std::abs(qd5[i] - qd4[i]) /
                                    (cfg.atol + cfg.rtol * std::abs(qd5[i])));
        }

        double factor = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        factor = std::clamp(factor, 0.2, 5.0);

        if (err <= 1.0) {
            AdaptiveResult out;
            out.state = {q5, qd5};
            out.t_new = t + h;
            out.h_next = std::clamp(h * factor, cfg.h_min, cfg.h_max);
            return out;
        }
        double h_new = h * factor;
        if (h_new < cfg.h_min) throw StepUnderflow(t, h_new);
        h = h_new;
    }
} catch (const NonFiniteInput&) {
    throw NonFiniteState(t, s);
}

// Integrates cfg.initial to t_end under the force profile, recording samples
// at the record cadence. Deterministic for identical inputs.
inline Trajectory simulate(const SimConfig& cfg, const FingerParams& p,
                           const ForceProfile& profile) {
    cfg.validate();
    p.validate();

    TorqueFn torque = [&](double t, const JointState&) {
        return joint_torques(force_at(profile, t), p);
    };

    Trajectory traj;
    traj.params_hash = p.hash();
    traj.variant = cfg.variant;
    traj.integrator = to_string(cfg.integrator);
    traj.step = cfg.step;
    traj.t_end = cfg.t_end;
    traj.record_every = cfg.record_every;

    auto record = [&](double t, const JointState& s) {
        TrajectorySample smp;
        smp.t = t;
        smp.q = s.q;
        smp.qdot = s.qdot;
        smp.tau = torque(t, s);
        smp.qddot = forward_dynamics(s, smp.tau, p, cfg.variant);
        smp.kinetic = kinetic_energy(s, p);
        smp.potential = potential_energy(s.q, p);
        smp.energy = smp.kinetic + smp.potential;
        traj.samples.push_back(smp);
    };

    JointState s = cfg.initial;
    record(0.0, s);

    const long n_records = static_cast<long>(std::ceil(cfg.t_end / cfg.record_every - 1e-9));

    if (cfg.integrator == Integrator::AdaptiveRK45) {
        double t = 0.0;
        double h = std::clamp(cfg.record_every, cfg.h_min, cfg.h_max);
        for (long r = 1; r <= n_records; ++r) {
            const double t_target = std::min(r * cfg.record_every, cfg.t_end);
            while (t < t_target - 1e-14) {
                AdaptiveResult st = step_adaptive(s, t, h, torque, p, cfg.variant, cfg,
                                                  t_target - t);
                s = st.state;
                t = st.t_new;
                h = st.h_next;
            }
            record(t_target, s);
        }
        return traj;
    }

    const double h = cfg.step;
    const long n_steps = static_cast<long>(std::ceil(cfg.t_end / h - 1e-9));
    long next_record = 1;
    for (long i = 0; i < n_steps; ++i) {
        const double t = i * h;
        const double h_i = std::min(h, cfg.t_end - t);
        if (cfg.integrator == Integrator::FixedRK4)
            s = step_rk4(s, t, h_i, torque, p, cfg.variant);
        else
            s = step_semi_implicit_euler(s, t, h_i, torque, p, cfg.variant);
        const double t_new = t + h_i;
        while (next_record <= n_records &&
               t_new + 1e-12 >= std::min(next_record * cfg.record_every, cfg.t_end)) {
            record(std::min(next_record * cfg.record_every, cfg.t_end), s);
            ++next_record;
        }
    }
    return traj;
}

struct EnergyAuditReport {
    double max_drift_rel = 0;          // work-balance residual, normalized
    double work_balance_residual = 0;  // max |E - E0 - W_in + W_diss|, absolute
    double injected_work = 0;
    double dissipated_work = 0;
    double max_energy_increase = 0;    // largest sample-to-sample E increase
};

// Work-energy bookkeeping over a recorded trajectory: E(t) - E(0) should
// equal the injected actuator work minus viscous dissipation; integrals by
// trapezoidal quadrature over the samples.
inline EnergyAuditReport energy_audit(const Trajectory& traj, const FingerParams& p) {
    if (traj.samples.size() < 2)
        throw std::invalid_argument("energy_audit needs at least 2 samples");
    EnergyAuditReport rep;
    const double e0 = traj.samples.front().energy;
    double w_in = 0, w_diss = 0;
    double peak = std::abs(e0);
    double max_resid = 0;
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        const auto& a = traj.samples[i - 1];
        const auto& b = traj.samples[i];
        const double dt = b.t - a.t;
        w_in += 0.5 * dt * (a.tau.dot(a.qdot) + b.tau.dot(b.qdot));
        w_diss += 0.5 * dt * p.cd * (a.qdot.squaredNorm() + b.qdot.squaredNorm());
        const double resid = b.energy - e0 - w_in + w_diss;
        max_resid = std::max(max_resid, std::abs(resid));
        peak = std::max(peak, std::abs(b.energy));
        rep.max_energy_increase = std::max(rep.max_energy_increase, b.energy - a.energy);
    }
    rep.work_balance_residual = max_resid;
    rep.injected_work = w_in;
    rep.dissipated_work = w_diss;
    rep.max_drift_rel = max_resid / std::max(peak + std::abs(w_in), 1e-12);
    return rep;
}

struct CompareReport {
    Vec3 max_dq = Vec3::Zero();     // per-joint max |q_full - q_reduced|
    Vec3 max_dqdot = Vec3::Zero();  // per-joint max velocity discrepancy
    double peak_neglected_torque = 0;  // max |C qd + (D - diag D) qdd|_inf over FULL run
    double peak_speed = 0;             // max ||qdot||_inf over FULL run
};

// Runs FULL and REDUCED on identical inputs and measures the discrepancy and
// the magnitude of the terms the reduced model drops.
inline CompareReport run_compare(const SimConfig& cfg, const FingerParams& p,
                                 const ForceProfile& profile) {
    SimConfig cfg_full = cfg;
    cfg_full.variant = ModelVariant::Full;
    SimConfig cfg_red = cfg;
    cfg_red.variant = ModelVariant::Reduced;
    Trajectory full = simulate(cfg_full, p, profile);
    Trajectory red = simulate(cfg_red, p, profile);

    CompareReport rep;
    const std::size_t n = std::min(full.samples.size(), red.samples.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto& f = full.samples[i];
        const auto& r = red.samples[i];
        rep.max_dq = rep.max_dq.cwiseMax((f.q - r.q).cwiseAbs());
        rep.max_dqdot = rep.max_dqdot.cwiseMax((f.qdot - r.qdot).cwiseAbs());
        Mat3 d = inertia_matrix_closed(f.q, p);
        Mat3 off = d - Mat3(d.diagonal().asDiagonal());
        Vec3 neglected = coriolis_matrix(f.q, f.qdot, p) * f.qdot + off * f.qddot;
        rep.peak_neglected_torque =
            std::max(rep.peak_neglected_torque, neglected.lpNorm<Eigen::Infinity>());
        rep.peak_speed = std::max(rep.peak_speed, f.qdot.lpNorm<Eigen::Infinity>());
    }
    return rep;
}

}  // namespace fingersim
