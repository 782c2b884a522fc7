#pragma once

// Actuator force profiles and the tendon torque-distribution law
// tau = F*e split as (alpha, beta, gamma) across the three joints, with an
// optional constant tendon-friction deduction before the split.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fingersim/params.hpp"

namespace fingersim {

struct StepProfile {
    double f0 = 0;    // force while on (N)
    double t_on = 0;  // onset time (s)
    double t_off = 0; // release time (s)
};

struct RampProfile {
    double f0 = 0, f1 = 0;  // start/end force (N)
    double t0 = 0, t1 = 0;  // ramp interval (s)
};

struct PulseProfile {
    double f0 = 0;
    double period = 1;
    double duty = 0.5;  // fraction of the period spent on
};

// Sorted (t, F) pairs; linear interpolation, clamped outside the domain.
// May carry a parallel temperature column as metadata; it does not enter
// the dynamics.
struct TableProfile {
    std::vector<std::pair<double, double>> points;
    std::vector<double> temperature;  // optional, same length as points
};

using ForceProfile = std::variant<StepProfile, RampProfile, PulseProfile, TableProfile>;

inline double force_at(const ForceProfile& profile, double t) {
    return std::visit(
        [t](const auto& pr) -> double {
            using T = std::decay_t<decltype(pr)>;
            if constexpr (std::is_same_v<T, StepProfile>) {
                return (t >= pr.t_on && t < pr.t_off) ? pr.f0 : 0.0;
            } else if constexpr (std::is_same_v<T, RampProfile>) {
                if (t <= pr.t0) return pr.f0;
                if (t >= pr.t1) return pr.f1;
                return pr.f0 + (pr.f1 - pr.f0) * (t - pr.t0) / (pr.t1 - pr.t0);
            } else if constexpr (std::is_same_v<T, PulseProfile>) {
                double phase = std::fmod(t, pr.period);
                return phase < pr.duty * pr.period ? pr.f0 : 0.0;
            } else {
                const auto& pts = pr.points;
                if (pts.empty()) return 0.0;
                if (t <= pts.front().first) return pts.front().second;
                if (t >= pts.back().first) return pts.back().second;
                auto hi = std::upper_bound(
                    pts.begin(), pts.end(), t,
                    [](double v, const auto& pt) { return v < pt.first; });
                auto lo = hi - 1;
                double w = (t - lo->first) / (hi->first - lo->first);
                return lo->second + w * (hi->second - lo->second);
            }
        },
        profile);
}

// Eq.-4 torque split. A tendon cannot push: negative effective force clamps
// to zero.
inline Vec3 joint_torques(double force, const FingerParams& p) {
    const double f_eff = std::max(force - p.frictionForce, 0.0);
    const double tau = f_eff * p.e;
    return {p.alpha * tau, p.beta * tau, p.gamma * tau};
}

inline void validate_table(const TableProfile& table) {
    for (std::size_t i = 0; i < table.points.size(); ++i) {
        if (table.points[i].second < 0)
            throw ValidationError("profile.points[" + std::to_string(i) + "]",
                                  "force must be >= 0");
        if (i > 0 && !(table.points[i].first > table.points[i - 1].first))
            throw ValidationError("profile.points[" + std::to_string(i) + "]",
                                  "times must be strictly increasing");
    }
}

}  // namespace fingersim
