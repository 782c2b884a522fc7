#pragma once

// Self-verification sweeps: closed-form vs oracle equivalence for the inertia
// matrix and Christoffel coefficients, passivity, gradient and energy checks.
// Shared between the `validate` subcommand and the acceptance suite. All
// randomness comes from a seeded generator so reports are reproducible.

#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "fingersim/dynamics.hpp"
#include "fingersim/model.hpp"
#include "fingersim/simulate.hpp"

namespace fingersim {

struct CheckResult {
    std::string name;
    bool pass = false;
    double max_dev = 0;
    double tol = 0;
    std::string detail;  // e.g. the worst-offending entry
};

// Unit-scale illustrative parameter set used by the randomized sweeps.
inline FingerParams unit_params() {
    FingerParams p;
    p.m1 = p.m2 = p.m3 = 1.0;
    p.l1 = p.l2 = p.l3 = 1.0;
    p.lc1 = p.lc2 = p.lc3 = 0.5;
    p.I1 = p.I2 = p.I3 = 0.0;
    p.g = 9.81;
    return p;
}

namespace detail {

// Platform-independent uniform double in [lo, hi) from raw engine output.
class UniformRng {
  public:
    explicit UniformRng(std::uint64_t seed) : eng_(seed) {}
    double uniform(double lo, double hi) {
        const double u = (eng_() >> 11) * 0x1.0p-53;
        return lo + u * (hi - lo);
    }
    Vec3 vec3(double lo, double hi) {
        return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)};
    }
    // Box-Muller normal deviate.
    double normal(double sigma) {
        double u1 = uniform(1e-12, 1.0), u2 = uniform(0.0, 1.0);
        return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

  private:
    std::mt19937_64 eng_;
};

inline std::string entry_name(const char* sym, int r, int c) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%s_%d%d", sym, r + 1, c + 1);
    return buf;
}

}  // namespace detail

// Closed-form inertia matrix vs the Jacobian assembly over random q.
inline CheckResult check_inertia_equivalence(const FingerParams& p, std::uint64_t seed,
                                             bool use_paper_d11 = false, int n = 1000,
                                             double tol = 1e-12) {
    detail::UniformRng rng(seed);
    CheckResult res{"inertia_equivalence", false, 0, tol, ""};
    for (int it = 0; it < n; ++it) {
        Vec3 q = rng.vec3(-M_PI, M_PI);
        Mat3 closed = inertia_matrix_closed(q, p, use_paper_d11);
        Mat3 oracle = inertia_matrix_jacobian(q, p);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                double dev = std::abs(closed(r, c) - oracle(r, c));
                if (dev > res.max_dev) {
                    res.max_dev = dev;
                    res.detail = detail::entry_name("d", r, c);
                }
            }
    }
    res.pass = res.max_dev < tol;
    return res;
}

// Closed-form Christoffel table vs the finite-difference oracle, plus the
// structural zeros C(0) = 0 and C_333 = 0.
inline CheckResult check_christoffel_equivalence(const FingerParams& p, std::uint64_t seed,
                                                 int n = 200, double tol = 1e-6) {
    detail::UniformRng rng(seed);
    CheckResult res{"christoffel_equivalence", false, 0, tol, ""};
    auto scan = [&](const Vec3& q) {
        ChristoffelTensor closed = christoffel_closed(q, p);
        ChristoffelTensor fd = christoffel_fd(q, p);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k) {
                    double dev = std::abs(closed(i, j, k) - fd(i, j, k));
                    if (dev > res.max_dev) {
                        res.max_dev = dev;
                        char buf[16];
                        std::snprintf(buf, sizeof buf, "C_%d%d%d", i + 1, j + 1, k + 1);
                        res.detail = buf;
                    }
                }
        if (std::abs(closed(2, 2, 2)) > 0) {
            res.max_dev = std::max(res.max_dev, std::abs(closed(2, 2, 2)));
            res.detail = "C_333";
        }
    };
    // exact zero at the straight configuration
    ChristoffelTensor at_zero = christoffel_closed(Vec3::Zero(), p);
    for (double v : at_zero.c)
        if (v != 0.0) {
            res.max_dev = std::max(res.max_dev, std::abs(v));
            res.detail = "C(0)";
        }
    for (int it = 0; it < n; ++it) scan(rng.vec3(-M_PI, M_PI));
    res.pass = res.max_dev < tol;
    return res;
}

// Structural identity qd^T (Ddot - 2 Cm) qd = 0, with Ddot by central
// difference along the flow q(t) = q + t*qd.
inline CheckResult check_passivity(const FingerParams& p, std::uint64_t seed, int n = 200,
                                   double tol = 1e-8) {
    detail::UniformRng rng(seed);
    CheckResult res{"passivity", false, 0, tol, ""};
    for (int it = 0; it < n; ++it) {
        Vec3 q = rng.vec3(-M_PI, M_PI);
        Vec3 qd = rng.vec3(-1.0, 1.0);
        double norm = qd.norm();
        if (norm > 1.0) qd /= norm;
        const double eps = kFdStep;
        Mat3 ddot = (inertia_matrix_jacobian(q + eps * qd, p) -
                     inertia_matrix_jacobian(q - eps * qd, p)) /
                    (2.0 * eps);
        Mat3 cm = coriolis_matrix(q, qd, p);
        double val = std::abs(qd.dot((ddot - 2.0 * cm) * qd));
        res.max_dev = std::max(res.max_dev, val);
    }
    res.pass = res.max_dev < tol;
    return res;
}

// Analytic potential gradient vs central differences, over mixed
// gravity/spring settings.
inline CheckResult check_gradient(const FingerParams& p, std::uint64_t seed, int n = 200,
                                  double tol = 1e-6) {
    detail::UniformRng rng(seed);
    CheckResult res{"potential_gradient", false, 0, tol, ""};
    for (int it = 0; it < n; ++it) {
        FingerParams pp = p;
        if (it % 3 == 1) pp.g = 0.0;
        if (it % 3 != 2) {
            pp.kt1 = rng.uniform(0.0, 2.0);
            pp.kt2 = rng.uniform(0.0, 2.0);
            pp.kt3 = rng.uniform(0.0, 2.0);
        }
        Vec3 q = rng.vec3(-M_PI, M_PI);
        Vec3 grad = potential_gradient(q, pp);
        Vec3 fd;
        for (int i = 0; i < 3; ++i) {
            Vec3 qp = q, qm = q;
            qp[i] += kFdStep;
            qm[i] -= kFdStep;
            fd[i] = (potential_energy(qp, pp) - potential_energy(qm, pp)) / (2.0 * kFdStep);
        }
        double scale = std::max(grad.lpNorm<Eigen::Infinity>(), 1.0);
        res.max_dev = std::max(res.max_dev, (grad - fd).lpNorm<Eigen::Infinity>() / scale);
    }
    res.pass = res.max_dev < tol;
    return res;
}

// Leading principal minors of D stay positive over random q.
inline CheckResult check_positive_definite(const FingerParams& p, std::uint64_t seed,
                                           int n = 200) {
    detail::UniformRng rng(seed);
    CheckResult res{"positive_definite", false, 0, 0, ""};
    double min_minor = std::numeric_limits<double>::infinity();
    for (int it = 0; it < n; ++it) {
        Mat3 d = inertia_matrix_closed(rng.vec3(-M_PI, M_PI), p);
        double m1 = d(0, 0);
        double m2 = d.topLeftCorner<2, 2>().determinant();
        double m3 = d.determinant();
        min_minor = std::min({min_minor, m1, m2, m3});
    }
    res.max_dev = min_minor;  // smallest minor; must stay positive
    res.pass = min_minor > 0;
    return res;
}

// D and C depend on q only through q2, q3: shifting q1 changes nothing.
inline CheckResult check_q1_independence(const FingerParams& p, std::uint64_t seed,
                                         int n = 100) {
    detail::UniformRng rng(seed);
    CheckResult res{"q1_independence", false, 0, 0, ""};
    for (int it = 0; it < n; ++it) {
        Vec3 q = rng.vec3(-M_PI, M_PI);
        Vec3 shifted = q;
        shifted[0] += rng.uniform(-2.0, 2.0);
        double dev = (inertia_matrix_closed(q, p) - inertia_matrix_closed(shifted, p))
                         .cwiseAbs()
                         .maxCoeff();
        ChristoffelTensor a = christoffel_closed(q, p);
        ChristoffelTensor b = christoffel_closed(shifted, p);
        for (std::size_t i = 0; i < a.c.size(); ++i)
            dev = std::max(dev, std::abs(a.c[i] - b.c[i]));
        res.max_dev = std::max(res.max_dev, dev);
    }
    res.pass = res.max_dev == 0.0;
    return res;
}

// Undamped unactuated run: relative energy drift over 1 s of RK4 at h = 1e-4.
inline CheckResult check_energy_conservation(const FingerParams& p, double tol = 1e-6) {
    FingerParams pc = p;
    pc.cd = 0;
    SimConfig cfg;
    cfg.integrator = Integrator::FixedRK4;
    cfg.step = 1e-4;
    cfg.t_end = 1.0;
    cfg.record_every = 1e-3;
    cfg.initial.q = {0.3, -0.2, 0.1};
    Trajectory traj = simulate(cfg, pc, StepProfile{});
    double e0 = traj.samples.front().energy;
    double e_char = 0, drift = 0;
    for (const auto& s : traj.samples) e_char = std::max(e_char, std::abs(s.energy));
    for (const auto& s : traj.samples) drift = std::max(drift, std::abs(s.energy - e0));
    CheckResult res{"energy_conservation", false, drift / std::max(e_char, 1e-12), tol, ""};
    res.pass = res.max_dev < tol;
    return res;
}

// Damped free oscillation: energy non-increasing sample to sample.
inline CheckResult check_damped_dissipation(const FingerParams& p, double tol = 1e-8) {
    FingerParams pc = p;
    if (pc.cd <= 0) pc.cd = 1e-3;
    SimConfig cfg;
    cfg.step = 1e-4;
    cfg.t_end = 1.0;
    cfg.record_every = 1e-3;
    cfg.initial.q = {0.3, -0.2, 0.1};
    Trajectory traj = simulate(cfg, pc, StepProfile{});
    EnergyAuditReport rep = energy_audit(traj, pc);
    CheckResult res{"damped_dissipation", false, rep.max_energy_increase, tol, ""};
    res.pass = res.max_dev <= tol;
    return res;
}

// Actuated damped run: work-energy residual with record_every = h. The force
// switches on at t = 0 (from rest) and off once the run has settled, so the
// audit is not dominated by quadrature error across a mid-swing jump.
inline CheckResult check_work_balance(const FingerParams& p, double tol = 1e-4) {
    FingerParams pc = p;
    if (pc.cd <= 0) pc.cd = 1e-3;
    SimConfig cfg;
    cfg.step = 1e-4;
    cfg.t_end = 1.0;
    cfg.record_every = cfg.step;
    Trajectory traj = simulate(cfg, pc, StepProfile{3.0, 0.0, 0.8});
    EnergyAuditReport rep = energy_audit(traj, pc);
    CheckResult res{"work_balance", false, rep.max_drift_rel, tol, ""};
    res.pass = res.max_dev < tol;
    return res;
}

inline std::vector<CheckResult> run_validate_checks(const FingerParams& p,
                                                    std::uint64_t seed,
                                                    bool use_paper_d11 = false) {
    std::vector<CheckResult> out;
    out.push_back(check_inertia_equivalence(p, seed, use_paper_d11));
    out.push_back(check_christoffel_equivalence(p, seed + 1));
    out.push_back(check_passivity(p, seed + 2));
    out.push_back(check_gradient(p, seed + 3));
    out.push_back(check_positive_definite(p, seed + 4));
    out.push_back(check_q1_independence(p, seed + 5));
    out.push_back(check_energy_conservation(p));
    out.push_back(check_damped_dissipation(p));
    out.push_back(check_work_balance(p));
    return out;
}

}  // namespace fingersim
