#include <catch2/catch_amalgamated.hpp>

#include "fingersim/dynamics.hpp"
#include "test_common.hpp"

using namespace fingersim;
using fingersim::testing::finger_params;

namespace {

struct Rng {
    std::mt19937_64 eng;
    explicit Rng(std::uint64_t seed) : eng(seed) {}
    double operator()(double lo, double hi) {
        return lo + ((eng() >> 11) * 0x1.0p-53) * (hi - lo);
    }
    Vec3 vec(double lo, double hi) { return {(*this)(lo, hi), (*this)(lo, hi), (*this)(lo, hi)}; }
};

}  // namespace

TEST_CASE("unforced equilibrium gives zero acceleration") {
    FingerParams p = finger_params();
    p.g = 0;
    p.kt1 = p.kt2 = p.kt3 = 0;
    p.cd = 0;
    JointState s;
    s.q = {0.3, -0.5, 0.8};
    for (ModelVariant v : {ModelVariant::Full, ModelVariant::Reduced}) {
        Vec3 qdd = forward_dynamics(s, Vec3::Zero(), p, v);
        CHECK(qdd.lpNorm<Eigen::Infinity>() < 1e-15);
    }
}

TEST_CASE("gravity release matches an independent 3x3 solve") {
    FingerParams p = unit_params();
    JointState s;  // straight, at rest
    Vec3 qdd = forward_dynamics(s, Vec3::Zero(), p, ModelVariant::Full);
    Mat3 d = inertia_matrix_jacobian(Vec3::Zero(), p);
    Vec3 phi = potential_gradient(Vec3::Zero(), p);
    Vec3 expected = d.fullPivLu().solve(-phi);
    CHECK((qdd - expected).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK(phi[0] == Catch::Approx(44.145).margin(1e-10));
}

TEST_CASE("forward and inverse dynamics are mutual inverses") {
    FingerParams p = finger_params();
    Rng rng(17);
    for (int it = 0; it < 200; ++it) {
        JointState s{rng.vec(-M_PI, M_PI), rng.vec(-3, 3)};
        Vec3 tau = rng.vec(-0.05, 0.05);
        Vec3 qdd = forward_dynamics(s, tau, p, ModelVariant::Full);
        Vec3 tau_back = inverse_dynamics(s, qdd, p, ModelVariant::Full);
        REQUIRE((tau_back - tau).lpNorm<Eigen::Infinity>() < 1e-10);
    }
}

TEST_CASE("inverse dynamics at rest reduces to the holding torque") {
    FingerParams p = finger_params();
    Vec3 q{0.4, 0.2, -0.1};
    Vec3 tau = inverse_dynamics({q, Vec3::Zero()}, Vec3::Zero(), p, ModelVariant::Full);
    CHECK((tau - potential_gradient(q, p)).lpNorm<Eigen::Infinity>() < 1e-15);
}

TEST_CASE("inverse dynamics matches the explicit torque-balance expansion") {
    FingerParams p = finger_params();
    Rng rng(23);
    for (int it = 0; it < 100; ++it) {
        JointState s{rng.vec(-M_PI, M_PI), rng.vec(-2, 2)};
        Vec3 qdd = rng.vec(-5, 5);
        Vec3 tau = inverse_dynamics(s, qdd, p, ModelVariant::Full);

        Mat3 d = inertia_matrix_closed(s.q, p);
        ChristoffelTensor c = christoffel_closed(s.q, p);
        for (int k = 0; k < 3; ++k) {
            double row = d(k, 0) * qdd[0] + d(k, 1) * qdd[1] + d(k, 2) * qdd[2];
            row += c(0, 0, k) * s.qdot[0] * s.qdot[0] + c(1, 1, k) * s.qdot[1] * s.qdot[1] +
                   c(2, 2, k) * s.qdot[2] * s.qdot[2];
            row += (c(1, 0, k) + c(0, 1, k)) * s.qdot[0] * s.qdot[1];
            row += (c(2, 0, k) + c(0, 2, k)) * s.qdot[2] * s.qdot[0];
            row += (c(2, 1, k) + c(1, 2, k)) * s.qdot[1] * s.qdot[2];
            row += potential_gradient(s.q, p)[k] + p.cd * s.qdot[k];
            REQUIRE(tau[k] == Catch::Approx(row).margin(1e-12));
        }
    }
}

TEST_CASE("acceleration is affine in the applied torque") {
    FingerParams p = finger_params();
    Rng rng(29);
    JointState s{rng.vec(-1, 1), rng.vec(-1, 1)};
    Vec3 ta = rng.vec(-0.01, 0.01), tb = rng.vec(-0.01, 0.01);
    Vec3 lhs = forward_dynamics(s, ta + tb, p, ModelVariant::Full) -
               forward_dynamics(s, tb, p, ModelVariant::Full);
    Vec3 rhs = inertia_matrix_closed(s.q, p).fullPivLu().solve(ta);
    CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() <
          1e-12 * rhs.lpNorm<Eigen::Infinity>());
}

TEST_CASE("FULL and REDUCED agree when the inertia is effectively diagonal") {
    FingerParams p = fingersim::testing::oscillator_params();
    p.g = 0;
    p.kt1 = 1.0;
    JointState s;
    s.q = {0.4, 0, 0};
    Vec3 full = forward_dynamics(s, Vec3::Zero(), p, ModelVariant::Full);
    Vec3 red = forward_dynamics(s, Vec3::Zero(), p, ModelVariant::Reduced);
    CHECK(std::abs(full[0] - red[0]) < 1e-6 * std::abs(full[0]));
}

TEST_CASE("REDUCED drops the off-diagonal and Coriolis couplings") {
    FingerParams p = finger_params();
    JointState s{{0.2, 0.4, -0.3}, {1.0, -0.5, 0.7}};
    Vec3 tau{0.01, 0.005, 0.002};
    Vec3 red = forward_dynamics(s, tau, p, ModelVariant::Reduced);
    Mat3 d = inertia_matrix_closed(s.q, p);
    Vec3 phi = potential_gradient(s.q, p);
    for (int k = 0; k < 3; ++k)
        REQUIRE(red[k] == (tau[k] - phi[k] - p.cd * s.qdot[k]) / d(k, k));
}

TEST_CASE("static equilibrium: pure springs") {
    FingerParams p = finger_params();
    p.g = 0;
    auto res = static_equilibrium(Vec3::Zero(), p);
    REQUIRE(res.converged);
    CHECK(res.q.lpNorm<Eigen::Infinity>() < 1e-12);

    FingerParams p2 = finger_params();
    p2.g = 0;
    p2.kt1 = p2.kt2 = p2.kt3 = 2.0;
    auto res2 = static_equilibrium(Vec3::Ones(), p2);
    REQUIRE(res2.converged);
    CHECK((res2.q - Vec3::Constant(0.5)).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("static equilibrium residual bound") {
    FingerParams p = finger_params();
    auto res = static_equilibrium({0.0135, 0.00945, 0.00675}, p);
    REQUIRE(res.converged);
    CHECK(res.residual < 1e-10);
    CHECK((potential_gradient(res.q, p) - Vec3{0.0135, 0.00945, 0.00675})
              .lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("singular inertia is reported") {
    FingerParams p = finger_params();
    p.m2 = 1e-30;  // leaves D numerically rank deficient
    p.m3 = 1e-30;
    p.I1 = p.I2 = p.I3 = 0;
    JointState s;
    CHECK_THROWS_AS(forward_dynamics(s, Vec3::Zero(), p, ModelVariant::Full), SingularInertia);
}
