#pragma once

#include "fingersim/checks.hpp"
#include "fingersim/params.hpp"

namespace fingersim::testing {

// Plausible centimeter-scale finger values; mirrors configs/default.json.
// The prototype's link parameters are not published anywhere, so these are
// illustrative only.
inline FingerParams finger_params() {
    FingerParams p;
    p.m1 = 0.008; p.m2 = 0.006; p.m3 = 0.004;
    p.l1 = 0.045; p.l2 = 0.03; p.l3 = 0.022;
    p.lc1 = 0.0225; p.lc2 = 0.015; p.lc3 = 0.011;
    p.I1 = 1.35e-6; p.I2 = 4.5e-7; p.I3 = 1.6e-7;
    p.kt1 = 0.02; p.kt2 = 0.015; p.kt3 = 0.01;
    p.cd = 0.002;
    p.e = 0.0045;
    p.alpha = 1.0; p.beta = 0.7; p.gamma = 0.5;
    p.g = 9.81;
    return p;
}

// Near-single-joint reduction: links 2 and 3 carry negligible mass/inertia,
// joint 1 sees a linear torsional spring and no gravity.
inline FingerParams oscillator_params(double kt1 = 1.0) {
    FingerParams p;
    p.m1 = 1.0; p.m2 = 1e-9; p.m3 = 1e-9;
    p.l1 = 1.0; p.l2 = 1.0; p.l3 = 1.0;
    p.lc1 = 0.5; p.lc2 = 0.5; p.lc3 = 0.5;
    p.I1 = 0.0; p.I2 = 1e-9; p.I3 = 1e-9;
    p.kt1 = kt1;
    p.g = 0.0;
    return p;
}

}  // namespace fingersim::testing
