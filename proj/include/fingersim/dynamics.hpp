#pragma once

// Forward/inverse dynamics for the damped three-link system and a Newton
// solver for static equilibria. The REDUCED variant mirrors the Simulink-style
// simplification: diagonal inertia only, no Coriolis terms, gravity, springs
// and damping retained.

#include <Eigen/Dense>
#include <limits>

#include "fingersim/model.hpp"
#include "fingersim/params.hpp"

namespace fingersim {

enum class ModelVariant { Full, Reduced };

inline const char* to_string(ModelVariant v) {
    return v == ModelVariant::Full ? "full" : "reduced";
}

inline constexpr double kConditionLimit = 1e12;

inline Vec3 forward_dynamics(const JointState& s, const Vec3& tau, const FingerParams& p,
                             ModelVariant v, bool use_paper_d11 = false) {
    require_finite(s.q, "q");
    require_finite(s.qdot, "qdot");
    require_finite(tau, "tau");
    const Vec3 phi = potential_gradient(s.q, p);
    if (v == ModelVariant::Reduced) {
        const Mat3 d = inertia_matrix_closed(s.q, p, use_paper_d11);
        Vec3 qdd;
        for (int k = 0; k < 3; ++k) {
            if (std::abs(d(k, k)) < 1e-300)
                throw SingularInertia(std::numeric_limits<double>::infinity());
            qdd[k] = (tau[k] - phi[k] - p.cd * s.qdot[k]) / d(k, k);
        }
        return qdd;
    }
    const Mat3 d = inertia_matrix_closed(s.q, p, use_paper_d11);
    Eigen::PartialPivLU<Mat3> lu(d);
    const double rcond = lu.rcond();
    if (!(rcond > 1.0 / kConditionLimit)) throw SingularInertia(rcond > 0 ? 1.0 / rcond : 1e300);
    const Vec3 rhs = tau - coriolis_matrix(s.q, s.qdot, p) * s.qdot - phi - p.cd * s.qdot;
    return lu.solve(rhs);
}

inline Vec3 inverse_dynamics(const JointState& s, const Vec3& qddot, const FingerParams& p,
                             ModelVariant v) {
    require_finite(s.q, "q");
    require_finite(s.qdot, "qdot");
    require_finite(qddot, "qddot");
    const Vec3 phi = potential_gradient(s.q, p);
    if (v == ModelVariant::Reduced) {
        const Mat3 d = inertia_matrix_closed(s.q, p);
        Vec3 tau;
        for (int k = 0; k < 3; ++k)
            tau[k] = d(k, k) * qddot[k] + phi[k] + p.cd * s.qdot[k];
        return tau;
    }
    return inertia_matrix_closed(s.q, p) * qddot + coriolis_matrix(s.q, s.qdot, p) * s.qdot +
           phi + p.cd * s.qdot;
}

struct EquilibriumResult {
    Vec3 q = Vec3::Zero();
    double residual = 0;  // ||phi(q) - tau||_inf
    int iterations = 0;
    bool converged = false;
};

// Damped Newton iteration on phi(q) = tau with a finite-difference Jacobian.
// Step halving (up to 30 times) when the residual does not decrease.
inline EquilibriumResult static_equilibrium(const Vec3& tau, const FingerParams& p,
                                            Vec3 q_guess = Vec3::Zero()) {
    require_finite(tau, "tau");
    constexpr double kTol = 1e-10;
    constexpr int kMaxIter = 100;

    auto res = [&](const Vec3& q) -> Vec3 { return potential_gradient(q, p) - tau; };

    EquilibriumResult out;
    out.q = q_guess;
    Vec3 r = res(out.q);
    double rnorm = r.lpNorm<Eigen::Infinity>();
    for (; out.iterations < kMaxIter && rnorm >= kTol; ++out.iterations) {
        Mat3 jac;
        for (int i = 0; i < 3; ++i) {
            Vec3 qp = out.q, qm = out.q;
            qp[i] += kFdStep;
            qm[i] -= kFdStep;
            jac.col(i) = (res(qp) - res(qm)) / (2.0 * kFdStep);
        }
        Vec3 step = jac.partialPivLu().solve(-r);
        if (!all_finite(step)) break;

        double lambda = 1.0;
        Vec3 q_next = out.q + step;
        Vec3 r_next = res(q_next);
        double rn_next = r_next.lpNorm<Eigen::Infinity>();
        for (int h = 0; h < 30 && !(rn_next < rnorm); ++h) {
            lambda *= 0.5;
            q_next = out.q + lambda * step;
            r_next = res(q_next);
            rn_next = r_next.lpNorm<Eigen::Infinity>();
        }
        if (!(rn_next < rnorm)) break;  // stalled
        out.q = q_next;
        r = r_next;
        rnorm = rn_next;
    }
    out.residual = rnorm;
    out.converged = rnorm < kTol;
    return out;
}

}  // namespace fingersim
