#pragma once

// JSON run-configuration ingestion: sections `params`, `sim`, `profile` and
// an optional `calibration`. Unknown keys are rejected with their location;
// all module invariants are validated at load time.

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "fingersim/calibrate.hpp"
#include "fingersim/csv.hpp"
#include "fingersim/simulate.hpp"

namespace fingersim {

struct CalibrationConfig {
    std::vector<std::string> free;
    std::vector<double> lo, hi;
    std::vector<double> initial;
    std::string reference;  // path to t,q1,q2,q3 CSV; may be overridden on the CLI
    Vec3 weights = Vec3::Ones();
};

struct RunConfig {
    FingerParams params;
    SimConfig sim;
    ForceProfile profile;
    std::optional<CalibrationConfig> calibration;
    std::filesystem::path base_dir;  // directory of the config file, for relative paths
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown(const json& obj, const std::set<std::string>& known,
                           const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!known.count(it.key()))
            throw ParseError(where + "." + it.key() + ": unknown key");
}

inline double get_num(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ParseError(where + "." + key + ": missing required key");
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ParseError(where + "." + key + ": expected a number");
    return v.get<double>();
}

inline double get_num_or(const json& obj, const std::string& key, double fallback,
                         const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ParseError(where + "." + key + ": expected a number");
    return v.get<double>();
}

inline Vec3 get_vec3_or(const json& obj, const std::string& key, const Vec3& fallback,
                        const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_array() || v.size() != 3)
        throw ParseError(where + "." + key + ": expected an array of 3 numbers");
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

inline FingerParams parse_params(const json& j) {
    static const std::set<std::string> known = {
        "m1", "m2", "m3", "l1", "l2", "l3", "lc1", "lc2", "lc3", "I1", "I2", "I3",
        "kt1", "kt2", "kt3", "cd", "e", "alpha", "beta", "gamma", "frictionForce", "g"};
    reject_unknown(j, known, "params");
    FingerParams p;
    p.m1 = get_num(j, "m1", "params");
    p.m2 = get_num(j, "m2", "params");
    p.m3 = get_num(j, "m3", "params");
    p.l1 = get_num(j, "l1", "params");
    p.l2 = get_num(j, "l2", "params");
    p.l3 = get_num(j, "l3", "params");
    p.lc1 = get_num(j, "lc1", "params");
    p.lc2 = get_num(j, "lc2", "params");
    p.lc3 = get_num(j, "lc3", "params");
    p.I1 = get_num(j, "I1", "params");
    p.I2 = get_num(j, "I2", "params");
    p.I3 = get_num(j, "I3", "params");
    p.kt1 = get_num_or(j, "kt1", 0.0, "params");
    p.kt2 = get_num_or(j, "kt2", 0.0, "params");
    p.kt3 = get_num_or(j, "kt3", 0.0, "params");
    p.cd = get_num_or(j, "cd", 0.0, "params");
    p.e = get_num_or(j, "e", 0.0045, "params");
    p.alpha = get_num_or(j, "alpha", 1.0, "params");
    p.beta = get_num_or(j, "beta", 1.0, "params");
    p.gamma = get_num_or(j, "gamma", 1.0, "params");
    p.frictionForce = get_num_or(j, "frictionForce", 0.0, "params");
    p.g = get_num_or(j, "g", 9.81, "params");
    p.validate();
    return p;
}

inline SimConfig parse_sim(const json& j) {
    static const std::set<std::string> known = {"integrator", "step",   "rtol",
                                                "atol",       "h_min",  "h_max",
                                                "t_end",      "record_every",
                                                "initial_q",  "initial_qdot", "variant"};
    reject_unknown(j, known, "sim");
    SimConfig cfg;
    if (j.contains("integrator")) {
        const std::string s = j.at("integrator").get<std::string>();
        if (s == "rk4") cfg.integrator = Integrator::FixedRK4;
        else if (s == "semi_implicit_euler") cfg.integrator = Integrator::SemiImplicitEuler;
        else if (s == "rk45") cfg.integrator = Integrator::AdaptiveRK45;
        else throw ParseError("sim.integrator: unknown integrator '" + s + "'");
    }
    cfg.step = get_num_or(j, "step", cfg.step, "sim");
    cfg.rtol = get_num_or(j, "rtol", cfg.rtol, "sim");
    cfg.atol = get_num_or(j, "atol", cfg.atol, "sim");
    cfg.h_min = get_num_or(j, "h_min", cfg.h_min, "sim");
    cfg.h_max = get_num_or(j, "h_max", cfg.h_max, "sim");
    cfg.t_end = get_num_or(j, "t_end", cfg.t_end, "sim");
    cfg.record_every = get_num_or(j, "record_every", cfg.record_every, "sim");
    cfg.initial.q = get_vec3_or(j, "initial_q", Vec3::Zero(), "sim");
    cfg.initial.qdot = get_vec3_or(j, "initial_qdot", Vec3::Zero(), "sim");
    if (j.contains("variant")) {
        const std::string s = j.at("variant").get<std::string>();
        if (s == "full") cfg.variant = ModelVariant::Full;
        else if (s == "reduced") cfg.variant = ModelVariant::Reduced;
        else throw ParseError("sim.variant: expected 'full' or 'reduced'");
    }
    cfg.validate();
    return cfg;
}

inline ForceProfile parse_profile(const json& j, const std::filesystem::path& base) {
    if (!j.contains("kind")) throw ParseError("profile.kind: missing required key");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "step") {
        reject_unknown(j, {"kind", "F0", "t_on", "t_off"}, "profile");
        StepProfile pr{get_num(j, "F0", "profile"), get_num(j, "t_on", "profile"),
                       get_num(j, "t_off", "profile")};
        if (pr.f0 < 0) throw ValidationError("profile.F0", "must be >= 0");
        return pr;
    }
    if (kind == "ramp") {
        reject_unknown(j, {"kind", "F0", "F1", "t0", "t1"}, "profile");
        RampProfile pr{get_num(j, "F0", "profile"), get_num(j, "F1", "profile"),
                       get_num(j, "t0", "profile"), get_num(j, "t1", "profile")};
        if (pr.f0 < 0 || pr.f1 < 0) throw ValidationError("profile.F0", "must be >= 0");
        if (!(pr.t1 > pr.t0)) throw ValidationError("profile.t1", "must be > t0");
        return pr;
    }
    if (kind == "pulse") {
        reject_unknown(j, {"kind", "F0", "period", "duty"}, "profile");
        PulseProfile pr{get_num(j, "F0", "profile"), get_num(j, "period", "profile"),
                        get_num(j, "duty", "profile")};
        if (pr.f0 < 0) throw ValidationError("profile.F0", "must be >= 0");
        if (!(pr.period > 0)) throw ValidationError("profile.period", "must be > 0");
        if (pr.duty < 0 || pr.duty > 1) throw ValidationError("profile.duty", "must be in [0,1]");
        return pr;
    }
    if (kind == "table") {
        reject_unknown(j, {"kind", "path", "points"}, "profile");
        TableProfile table;
        if (j.contains("path")) {
            return load_force_table((base / j.at("path").get<std::string>()).string());
        }
        if (!j.contains("points"))
            throw ParseError("profile.points: table profile needs 'path' or 'points'");
        for (const auto& pt : j.at("points")) {
            if (!pt.is_array() || pt.size() != 2)
                throw ParseError("profile.points: expected [t, F] pairs");
            table.points.emplace_back(pt[0].get<double>(), pt[1].get<double>());
        }
        validate_table(table);
        return table;
    }
    throw ParseError("profile.kind: unknown kind '" + kind + "'");
}

inline CalibrationConfig parse_calibration(const json& j) {
    static const std::set<std::string> known = {"free", "bounds", "initial", "reference",
                                               "weights"};
    reject_unknown(j, known, "calibration");
    CalibrationConfig cc;
    if (!j.contains("free")) throw ParseError("calibration.free: missing required key");
    for (const auto& name : j.at("free")) cc.free.push_back(name.get<std::string>());
    if (!j.contains("bounds")) throw ParseError("calibration.bounds: missing required key");
    for (const auto& b : j.at("bounds")) {
        if (!b.is_array() || b.size() != 2)
            throw ParseError("calibration.bounds: expected [lo, hi] pairs");
        cc.lo.push_back(b[0].get<double>());
        cc.hi.push_back(b[1].get<double>());
    }
    if (j.contains("initial"))
        for (const auto& v : j.at("initial")) cc.initial.push_back(v.get<double>());
    if (j.contains("reference")) cc.reference = j.at("reference").get<std::string>();
    cc.weights = get_vec3_or(j, "weights", Vec3::Ones(), "calibration");
    return cc;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    detail::reject_unknown(j, {"params", "sim", "profile", "calibration"}, path);
    if (!j.contains("params")) throw ParseError(path + ": missing 'params' section");
    RunConfig cfg;
    cfg.base_dir = std::filesystem::path(path).parent_path();
    cfg.params = detail::parse_params(j.at("params"));
    cfg.sim = j.contains("sim") ? detail::parse_sim(j.at("sim")) : SimConfig{};
    cfg.profile = j.contains("profile") ? detail::parse_profile(j.at("profile"), cfg.base_dir)
                                        : ForceProfile{StepProfile{}};
    if (j.contains("calibration"))
        cfg.calibration = detail::parse_calibration(j.at("calibration"));
    return cfg;
}

}  // namespace fingersim
