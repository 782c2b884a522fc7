#pragma once

// Least-squares identification of the under-specified parameters
// (cd, kt1..kt3, alpha, beta, gamma) against a reference joint-angle
// trajectory, via a bounded Nelder-Mead simplex.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "fingersim/simulate.hpp"

namespace fingersim {

inline const std::vector<std::string>& calibratable_names() {
    static const std::vector<std::string> names = {"cd",    "kt1",  "kt2",   "kt3",
                                                   "alpha", "beta", "gamma"};
    return names;
}

inline void apply_parameter(FingerParams& p, const std::string& name, double value) {
    if (name == "cd") p.cd = value;
    else if (name == "kt1") p.kt1 = value;
    else if (name == "kt2") p.kt2 = value;
    else if (name == "kt3") p.kt3 = value;
    else if (name == "alpha") p.alpha = value;
    else if (name == "beta") p.beta = value;
    else if (name == "gamma") p.gamma = value;
    else throw ValidationError("calibration.free", "unknown parameter '" + name + "'");
}

struct CalibrationProblem {
    std::vector<double> ref_t;           // strictly increasing reference times
    std::vector<Vec3> ref_q;             // reference joint angles at ref_t
    std::vector<std::string> free;       // names of free parameters
    std::vector<double> lo, hi;          // per-parameter bounds
    FingerParams baseline;               // fixed parameter values
    ForceProfile profile;                // actuation during the reference run
    SimConfig sim;                       // integration settings for candidates
    Vec3 weights = Vec3::Ones();         // per-joint residual weights

    void validate() const {
        if (free.empty()) throw ValidationError("calibration.free", "must be non-empty");
        if (free.size() != lo.size() || free.size() != hi.size())
            throw ValidationError("calibration.bounds", "must match the free list");
        for (std::size_t i = 0; i < free.size(); ++i) {
            if (!(std::isfinite(lo[i]) && std::isfinite(hi[i]) && lo[i] < hi[i]))
                throw ValidationError("calibration.bounds[" + free[i] + "]",
                                      "need finite lo < hi");
        }
        if (ref_t.size() < 2)
            throw ValidationError("calibration.reference", "needs at least 2 samples");
        for (std::size_t i = 1; i < ref_t.size(); ++i)
            if (!(ref_t[i] > ref_t[i - 1]))
                throw ValidationError("calibration.reference", "times must be increasing");
        check_reference_resolution();
    }

    // Reject references sampled coarser than 10x the dominant oscillation
    // period of the linearization at q = 0.
    void check_reference_resolution() const {
        const Mat3 d0 = inertia_matrix_jacobian(Vec3::Zero(), baseline);
        Mat3 k;  // stiffness: Jacobian of phi at q = 0, by central difference
        for (int i = 0; i < 3; ++i) {
            Vec3 qp = Vec3::Zero(), qm = Vec3::Zero();
            qp[i] += kFdStep;
            qm[i] -= kFdStep;
            k.col(i) = (potential_gradient(qp, baseline) - potential_gradient(qm, baseline)) /
                       (2.0 * kFdStep);
        }
        Mat3 ks = 0.5 * (k + k.transpose());
        Eigen::GeneralizedSelfAdjointEigenSolver<Mat3> es(ks, d0);
        double w2_max = es.eigenvalues().maxCoeff();
        if (!(w2_max > 0)) return;  // no restoring stiffness; nothing to resolve
        const double period = 2.0 * M_PI / std::sqrt(w2_max);
        double dt_max = 0;
        for (std::size_t i = 1; i < ref_t.size(); ++i)
            dt_max = std::max(dt_max, ref_t[i] - ref_t[i - 1]);
        if (dt_max > 10.0 * period)
            throw ValidationError("calibration.reference",
                                  "sampling interval " + std::to_string(dt_max) +
                                      " s is coarser than 10x the dominant period " +
                                      std::to_string(period) + " s");
    }

    FingerParams with(const Eigen::VectorXd& x) const {
        FingerParams p = baseline;
        for (std::size_t i = 0; i < free.size(); ++i) apply_parameter(p, free[i], x[i]);
        return p;
    }
};

// Weighted stacked differences between the simulated and reference joint
// angles, 3 rows per reference time. Divergent simulations yield a large
// constant penalty residual.
inline Eigen::VectorXd residual(const Eigen::VectorXd& x, const CalibrationProblem& prob) {
    const auto n = static_cast<Eigen::Index>(prob.ref_t.size());
    Eigen::VectorXd r(3 * n);
    Trajectory traj;
    try {
        SimConfig cfg = prob.sim;
        cfg.t_end = std::max(cfg.t_end, prob.ref_t.back());
        traj = simulate(cfg, prob.with(x), prob.profile);
    } catch (const std::exception&) {
        r.setConstant(1e6);
        return r;
    }
    // linear interpolation of the simulated q at the reference times
    std::size_t j = 1;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = prob.ref_t[i];
        while (j + 1 < traj.samples.size() && traj.samples[j].t < t) ++j;
        const auto& a = traj.samples[j - 1];
        const auto& b = traj.samples[j];
        const double w = std::clamp((t - a.t) / std::max(b.t - a.t, 1e-300), 0.0, 1.0);
        const Vec3 q_sim = a.q + w * (b.q - a.q);
        const Vec3 diff = q_sim - prob.ref_q[i];
        for (int c = 0; c < 3; ++c) r[3 * i + c] = prob.weights[c] * diff[c];
    }
    return r;
}

inline double cost(const Eigen::VectorXd& x, const CalibrationProblem& prob) {
    return 0.5 * residual(x, prob).squaredNorm();
}

struct FitResult {
    Eigen::VectorXd x;
    double cost = 0;
    int iterations = 0;
    bool converged = false;
    bool flat_cost = false;  // cost insensitive to the free parameters
    std::string message;
};

// Bounded Nelder-Mead: reflection/expansion/contraction/shrink with
// coordinate-wise clamping into the bounds. Converges on simplex diameter
// < 1e-8 or cost change < 1e-12; iteration cap 2000.
inline FitResult fit(const CalibrationProblem& prob, const Eigen::VectorXd& x0) {
    prob.validate();
    const auto dim = static_cast<int>(prob.free.size());
    if (x0.size() != dim)
        throw ValidationError("calibration.initial", "size must match the free list");
    for (int i = 0; i < dim; ++i)
        if (x0[i] < prob.lo[i] || x0[i] > prob.hi[i])
            throw ValidationError("calibration.initial[" + prob.free[i] + "]",
                                  "outside bounds");

    auto clamp = [&](Eigen::VectorXd v) {
        for (int i = 0; i < dim; ++i) v[i] = std::clamp(v[i], prob.lo[i], prob.hi[i]);
        return v;
    };

    std::vector<Eigen::VectorXd> vertex(dim + 1, x0);
    for (int i = 0; i < dim; ++i) {
        double span = prob.hi[i] - prob.lo[i];
        double delta = 0.05 * span;
        vertex[i + 1][i] = (x0[i] + delta <= prob.hi[i]) ? x0[i] + delta : x0[i] - delta;
    }
    std::vector<double> f(dim + 1);
    for (int i = 0; i <= dim; ++i) f[i] = cost(vertex[i], prob);

    FitResult out;
    {
        double fmin = *std::min_element(f.begin(), f.end());
        double fmax = *std::max_element(f.begin(), f.end());
        if (fmax - fmin <= 1e-14 * std::max(1.0, fmax)) {
            out.flat_cost = true;
            out.converged = false;
            int best = static_cast<int>(std::min_element(f.begin(), f.end()) - f.begin());
            out.x = vertex[best];
            out.cost = f[best];
            out.message = "cost is flat across the initial simplex (zero cost gradient; "
                          "parameters unidentifiable with this actuation)";
            return out;
        }
    }

    constexpr int kMaxIter = 2000;
    double prev_best = *std::min_element(f.begin(), f.end());
    for (out.iterations = 0; out.iterations < kMaxIter; ++out.iterations) {
        std::vector<int> order(dim + 1);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) { return f[a] < f[b]; });
        const int best = order[0], worst = order[dim], second = order[dim - 1];

        double diameter = 0;
        for (int i = 1; i <= dim; ++i)
            diameter = std::max(diameter,
                                (vertex[order[i]] - vertex[best]).lpNorm<Eigen::Infinity>());
        const double improvement = prev_best - f[best];
        if (diameter < 1e-8 || (out.iterations > 0 && improvement >= 0 &&
                                improvement < 1e-12 && f[worst] - f[best] < 1e-12)) {
            out.converged = true;
            break;
        }
        prev_best = f[best];

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
        for (int i = 0; i <= dim; ++i)
            if (i != worst) centroid += vertex[i];
        centroid /= dim;

        Eigen::VectorXd xr = clamp(centroid + (centroid - vertex[worst]));
        double fr = cost(xr, prob);
        if (fr < f[best]) {
            Eigen::VectorXd xe = clamp(centroid + 2.0 * (centroid - vertex[worst]));
            double fe = cost(xe, prob);
            if (fe < fr) { vertex[worst] = xe; f[worst] = fe; }
            else { vertex[worst] = xr; f[worst] = fr; }
        } else if (fr < f[second]) {
            vertex[worst] = xr;
            f[worst] = fr;
        } else {
            Eigen::VectorXd xc = clamp(centroid + 0.5 * (vertex[worst] - centroid));
            double fc = cost(xc, prob);
            if (fc < f[worst]) {
                vertex[worst] = xc;
                f[worst] = fc;
            } else {
                for (int i = 0; i <= dim; ++i) {
                    if (i == best) continue;
                    vertex[i] = clamp(vertex[best] + 0.5 * (vertex[i] - vertex[best]));
                    f[i] = cost(vertex[i], prob);
                }
            }
        }
    }

    int best = static_cast<int>(std::min_element(f.begin(), f.end()) - f.begin());
    out.x = vertex[best];
    out.cost = f[best];
    if (!out.converged) out.message = "iteration cap reached before convergence";
    return out;
}

}  // namespace fingersim
