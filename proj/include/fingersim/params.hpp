#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>

namespace fingersim {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct NonFiniteInput : std::runtime_error {
    explicit NonFiniteInput(const std::string& what) : std::runtime_error(what) {}
};

struct SingularInertia : std::runtime_error {
    double condition;
    explicit SingularInertia(double cond)
        : std::runtime_error("inertia matrix condition estimate " + std::to_string(cond) +
                             " exceeds 1e12"),
          condition(cond) {}
};

struct ValidationError : std::runtime_error {
    std::string key;
    std::string constraint;
    ValidationError(std::string k, std::string c)
        : std::runtime_error(k + ": " + c), key(std::move(k)), constraint(std::move(c)) {}
};

// All physical constants of the 3-link chain, SI units throughout.
struct FingerParams {
    double m1 = 0, m2 = 0, m3 = 0;     // link masses (kg)
    double l1 = 0, l2 = 0, l3 = 0;     // link lengths (m)
    double lc1 = 0, lc2 = 0, lc3 = 0;  // center-of-mass distances (m)
    double I1 = 0, I2 = 0, I3 = 0;     // centroidal inertias, planar axis (kg m^2)
    double kt1 = 0, kt2 = 0, kt3 = 0;  // torsional spring stiffnesses (N m/rad)
    double cd = 0;                     // joint damping (N m s/rad), shared across joints
    double e = 0.0045;                 // tendon offset (m)
    double alpha = 1, beta = 1, gamma = 1;  // torque fractions at MCP/PIP/DIP
    double frictionForce = 0;          // constant tendon friction deduction (N)
    double g = 9.81;                   // gravitational acceleration (m/s^2)

    void validate(const std::string& prefix = "params.") const {
        auto pos = [&](double v, const char* name) {
            if (!(v > 0)) throw ValidationError(prefix + name, "must be > 0");
        };
        auto nonneg = [&](double v, const char* name) {
            if (!(v >= 0)) throw ValidationError(prefix + name, "must be >= 0");
        };
        pos(m1, "m1"); pos(m2, "m2"); pos(m3, "m3");
        pos(l1, "l1"); pos(l2, "l2"); pos(l3, "l3");
        pos(lc1, "lc1"); pos(lc2, "lc2"); pos(lc3, "lc3");
        if (lc1 > l1) throw ValidationError(prefix + "lc1", "must satisfy lc1 <= l1");
        if (lc2 > l2) throw ValidationError(prefix + "lc2", "must satisfy lc2 <= l2");
        if (lc3 > l3) throw ValidationError(prefix + "lc3", "must satisfy lc3 <= l3");
        nonneg(I1, "I1"); nonneg(I2, "I2"); nonneg(I3, "I3");
        nonneg(kt1, "kt1"); nonneg(kt2, "kt2"); nonneg(kt3, "kt3");
        nonneg(cd, "cd");
        pos(e, "e");
        nonneg(alpha, "alpha"); nonneg(beta, "beta"); nonneg(gamma, "gamma");
        nonneg(frictionForce, "frictionForce");
        nonneg(g, "g");
    }

    // FNV-1a over the raw parameter doubles; used to tag trajectories.
    std::uint64_t hash() const {
        const double vals[] = {m1, m2, m3, l1, l2, l3, lc1, lc2, lc3, I1, I2, I3,
                               kt1, kt2, kt3, cd, e, alpha, beta, gamma, frictionForce, g};
        std::uint64_t h = 1469598103934665603ull;
        for (double v : vals) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, sizeof bits);
            for (int i = 0; i < 8; ++i) {
                h ^= (bits >> (8 * i)) & 0xff;
                h *= 1099511628211ull;
            }
        }
        return h;
    }
};

struct JointState {
    Vec3 q = Vec3::Zero();     // joint angles (rad)
    Vec3 qdot = Vec3::Zero();  // joint angular velocities (rad/s)
};

inline bool all_finite(const Vec3& v) {
    return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]);
}

inline void require_finite(const Vec3& v, const char* what) {
    if (!all_finite(v)) throw NonFiniteInput(std::string("non-finite ") + what);
}

}  // namespace fingersim
