#pragma once

// Kinematics and energetics of the planar 3-link finger: velocity Jacobians,
// inertia matrix (closed form and Jacobian assembly), Christoffel coefficients
// (closed form and finite-difference), potential energy and its gradient.
// All functions are pure; angles follow the straight-horizontal zero
// configuration with gravity acting downward.

#include <array>
#include <cmath>

#include "fingersim/params.hpp"

namespace fingersim {

// C(i,j,k) multiplies qdot_i * qdot_j in torque row k. Zero-based indices.
struct ChristoffelTensor {
    std::array<double, 27> c{};
    double& operator()(int i, int j, int k) { return c[9 * i + 3 * j + k]; }
    double operator()(int i, int j, int k) const { return c[9 * i + 3 * j + k]; }
};

// Centers of mass of the three links in the base frame (z = 0, planar).
inline std::array<Vec3, 3> com_positions(const Vec3& q, const FingerParams& p) {
    const double a1 = q[0], a2 = q[0] + q[1], a3 = q[0] + q[1] + q[2];
    Vec3 c1{p.lc1 * std::cos(a1), p.lc1 * std::sin(a1), 0.0};
    Vec3 c2{p.l1 * std::cos(a1) + p.lc2 * std::cos(a2),
            p.l1 * std::sin(a1) + p.lc2 * std::sin(a2), 0.0};
    Vec3 c3{p.l1 * std::cos(a1) + p.l2 * std::cos(a2) + p.lc3 * std::cos(a3),
            p.l1 * std::sin(a1) + p.l2 * std::sin(a2) + p.lc3 * std::sin(a3), 0.0};
    return {c1, c2, c3};
}

// Fingertip position, for rendering; uses l3 rather than lc3.
inline Vec3 fingertip_position(const Vec3& q, const FingerParams& p) {
    const double a1 = q[0], a2 = q[0] + q[1], a3 = q[0] + q[1] + q[2];
    return {p.l1 * std::cos(a1) + p.l2 * std::cos(a2) + p.l3 * std::cos(a3),
            p.l1 * std::sin(a1) + p.l2 * std::sin(a2) + p.l3 * std::sin(a3), 0.0};
}

// Linear-velocity Jacobians of the three link centers of mass. Third row is
// zero (planar motion).
inline std::array<Mat3, 3> velocity_jacobians(const Vec3& q, const FingerParams& p) {
    require_finite(q, "q");
    const double a1 = q[0], a2 = q[0] + q[1], a3 = q[0] + q[1] + q[2];
    const double s1 = std::sin(a1), c1 = std::cos(a1);
    const double s12 = std::sin(a2), c12 = std::cos(a2);
    const double s123 = std::sin(a3), c123 = std::cos(a3);

    Mat3 jv1 = Mat3::Zero();
    jv1(0, 0) = -p.lc1 * s1;
    jv1(1, 0) = p.lc1 * c1;

    Mat3 jv2 = Mat3::Zero();
    jv2(0, 0) = -p.l1 * s1 - p.lc2 * s12;
    jv2(0, 1) = -p.lc2 * s12;
    jv2(1, 0) = p.l1 * c1 + p.lc2 * c12;
    jv2(1, 1) = p.lc2 * c12;

    Mat3 jv3 = Mat3::Zero();
    jv3(0, 0) = -p.l1 * s1 - p.l2 * s12 - p.lc3 * s123;
    jv3(0, 1) = -p.l2 * s12 - p.lc3 * s123;
    jv3(0, 2) = -p.lc3 * s123;
    jv3(1, 0) = p.l1 * c1 + p.l2 * c12 + p.lc3 * c123;
    jv3(1, 1) = p.l2 * c12 + p.lc3 * c123;
    jv3(1, 2) = p.lc3 * c123;

    return {jv1, jv2, jv3};
}

// Rotational contribution R to the inertia matrix: for a planar chain
// omega_i = sum_{j<=i} qdot_j, so R = I1*E1 + I2*E2 + I3*E3 with the 0/1
// pattern matrices. The 1/2 lives in the kinetic-energy quadratic form.
inline Mat3 rotational_energy_matrix(const FingerParams& p) {
    Mat3 r = Mat3::Zero();
    r(0, 0) = p.I1;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r(i, j) += p.I2;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) += p.I3;
    return r;
}

// Inertia matrix assembled as D = sum_i m_i Jv_i^T Jv_i + R. This is the
// derivation-level form and serves as the oracle for the closed form.
inline Mat3 inertia_matrix_jacobian(const Vec3& q, const FingerParams& p) {
    auto jv = velocity_jacobians(q, p);
    Mat3 d = p.m1 * jv[0].transpose() * jv[0] + p.m2 * jv[1].transpose() * jv[1] +
             p.m3 * jv[2].transpose() * jv[2] + rotational_energy_matrix(p);
    // enforce exact symmetry against rounding in the products
    return 0.5 * (d + d.transpose());
}

// Closed-form inertia matrix. The d_11 cross term between link 1 and the
// distal center of mass is 2*l1*lc3*cos(q2+q3); set use_paper_d11 to evaluate
// the dimensionally inconsistent lc3*cos(q2+q3) variant instead (debug path
// exercised by the validate command).
inline Mat3 inertia_matrix_closed(const Vec3& q, const FingerParams& p,
                                  bool use_paper_d11 = false) {
    require_finite(q, "q");
    const double c2 = std::cos(q[1]);
    const double c3 = std::cos(q[2]);
    const double c23 = std::cos(q[1] + q[2]);

    const double d11_cross = use_paper_d11 ? p.lc3 * c23 : 2.0 * p.l1 * p.lc3 * c23;
    Mat3 d;
    d(0, 0) = p.m1 * p.lc1 * p.lc1 +
              p.m2 * (p.l1 * p.l1 + p.lc2 * p.lc2 + 2.0 * p.l1 * p.lc2 * c2) +
              p.m3 * (p.l1 * p.l1 + p.l2 * p.l2 + p.lc3 * p.lc3 + 2.0 * p.l1 * p.l2 * c2 +
                      2.0 * p.l2 * p.lc3 * c3 + d11_cross) +
              p.I1 + p.I2 + p.I3;
    d(0, 1) = p.m2 * (p.lc2 * p.lc2 + p.l1 * p.lc2 * c2) +
              p.m3 * (p.l2 * p.l2 + p.lc3 * p.lc3 + 2.0 * p.l2 * p.lc3 * c3 +
                      p.l1 * p.l2 * c2 + p.l1 * p.lc3 * c23) +
              p.I2 + p.I3;
    d(0, 2) = p.m3 * (p.lc3 * p.lc3 + p.l1 * p.lc3 * c23 + p.l2 * p.lc3 * c3) + p.I3;
    d(1, 1) = p.m3 * (p.l2 * p.l2 + p.lc3 * p.lc3 + 2.0 * p.l2 * p.lc3 * c3) +
              p.m2 * p.lc2 * p.lc2 + p.I2 + p.I3;
    d(1, 2) = p.m3 * (p.lc3 * p.lc3 + p.l2 * p.lc3 * c3) + p.I3;
    d(2, 2) = p.m3 * p.lc3 * p.lc3 + p.I3;
    d(1, 0) = d(0, 1);
    d(2, 0) = d(0, 2);
    d(2, 1) = d(1, 2);
    return d;
}

inline double kinetic_energy(const JointState& s, const FingerParams& p) {
    require_finite(s.q, "q");
    require_finite(s.qdot, "qdot");
    Mat3 d = inertia_matrix_jacobian(s.q, p);
    return 0.5 * s.qdot.dot(d * s.qdot);
}

// Gravity potential plus torsional-spring energy; zero at the straight
// horizontal configuration.
inline double potential_energy(const Vec3& q, const FingerParams& p) {
    require_finite(q, "q");
    const double a = (p.m1 * p.lc1 + p.m2 * p.l1 + p.m3 * p.l1) * p.g;
    const double b = (p.m2 * p.lc2 + p.m3 * p.l2) * p.g;
    const double c = p.m3 * p.lc3 * p.g;
    return a * std::sin(q[0]) + b * std::sin(q[0] + q[1]) + c * std::sin(q[0] + q[1] + q[2]) +
           0.5 * (p.kt1 * q[0] * q[0] + p.kt2 * q[1] * q[1] + p.kt3 * q[2] * q[2]);
}

// Analytic gradient of potential_energy (the phi vector of the torque balance).
inline Vec3 potential_gradient(const Vec3& q, const FingerParams& p) {
    require_finite(q, "q");
    const double a = (p.m1 * p.lc1 + p.m2 * p.l1 + p.m3 * p.l1) * p.g;
    const double b = (p.m2 * p.lc2 + p.m3 * p.l2) * p.g;
    const double c = p.m3 * p.lc3 * p.g;
    const double c1 = std::cos(q[0]);
    const double c12 = std::cos(q[0] + q[1]);
    const double c123 = std::cos(q[0] + q[1] + q[2]);
    return {a * c1 + b * c12 + c * c123 + p.kt1 * q[0],
            b * c12 + c * c123 + p.kt2 * q[1],
            c * c123 + p.kt3 * q[2]};
}

// Closed-form Christoffel coefficients. All nonzero entries are combinations
// of h1 = l1*lc2*sin q2, h2 = l1*lc3*sin(q2+q3), h3 = l2*lc3*sin q3,
// h4 = l1*l2*sin q2.
inline ChristoffelTensor christoffel_closed(const Vec3& q, const FingerParams& p) {
    require_finite(q, "q");
    const double h1 = p.l1 * p.lc2 * std::sin(q[1]);
    const double h2 = p.l1 * p.lc3 * std::sin(q[1] + q[2]);
    const double h3 = p.l2 * p.lc3 * std::sin(q[2]);
    const double h4 = p.l1 * p.l2 * std::sin(q[1]);

    const double a = p.m2 * h1 + p.m3 * (h2 + h4);
    const double b = p.m3 * (h2 + h3);
    const double c = p.m3 * h3;

    ChristoffelTensor t;
    t(0, 0, 1) = a;                            // C_112
    t(0, 0, 2) = b;                            // C_113
    t(0, 1, 2) = t(1, 0, 2) = t(1, 1, 2) = c;  // C_123 = C_213 = C_223
    t(0, 1, 0) = t(1, 0, 0) = t(1, 1, 0) = -a; // C_121 = C_211 = C_221
    t(1, 2, 1) = t(2, 1, 1) = t(2, 2, 1) = t(0, 2, 1) = t(2, 0, 1) = -c;
    t(0, 2, 0) = t(2, 0, 0) = t(1, 2, 0) = t(2, 1, 0) = t(2, 2, 0) = -b;
    return t;
}

inline constexpr double kFdStep = 1e-6;  // central-difference step (rad)

// Partial derivatives of D by central difference.
inline std::array<Mat3, 3> inertia_matrix_partials(const Vec3& q, const FingerParams& p,
                                                   double h = kFdStep) {
    std::array<Mat3, 3> dD;
    for (int i = 0; i < 3; ++i) {
        Vec3 qp = q, qm = q;
        qp[i] += h;
        qm[i] -= h;
        dD[i] = (inertia_matrix_jacobian(qp, p) - inertia_matrix_jacobian(qm, p)) / (2.0 * h);
    }
    return dD;
}

// Finite-difference Christoffel oracle, independent of the closed forms.
// Uses the symmetrized definition
//   C_ijk = 1/2 (dd_kj/dq_i + dd_ki/dq_j - dd_ij/dq_k),
// which is what the closed-form table realizes; its (i,j)-antisymmetric
// difference from dd_kj/dq_i - 1/2 dd_ij/dq_k cancels in the quadratic form.
inline ChristoffelTensor christoffel_fd(const Vec3& q, const FingerParams& p,
                                        double h = kFdStep) {
    auto dD = inertia_matrix_partials(q, p, h);
    ChristoffelTensor t;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                t(i, j, k) = 0.5 * (dD[i](k, j) + dD[j](k, i) - dD[k](i, j));
    return t;
}

// Coriolis/centrifugal matrix: Cm(k,j) = sum_i C_ijk(q) qdot_i, so Cm*qdot
// reproduces the full quadratic-velocity torque row by row.
inline Mat3 coriolis_matrix(const Vec3& q, const Vec3& qdot, const FingerParams& p) {
    require_finite(qdot, "qdot");
    ChristoffelTensor t = christoffel_closed(q, p);
    Mat3 cm = Mat3::Zero();
    for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 3; ++i) cm(k, j) += t(i, j, k) * qdot[i];
    return cm;
}

}  // namespace fingersim
