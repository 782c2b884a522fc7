// finger-dyn: simulate, validate, compare and calibrate the tendon-driven
// three-link finger model.
//
// Exit codes: 0 success, 1 config/IO error, 2 simulation failure,
// 3 calibration non-convergence.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "fingersim/checks.hpp"
#include "fingersim/config.hpp"
#include "fingersim/csv.hpp"

namespace {

using namespace fingersim;

constexpr double kRadToDeg = 180.0 / M_PI;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

int cmd_simulate(const RunConfig& cfg, const std::string& out_path) {
    Trajectory traj;
    try {
        traj = simulate(cfg.sim, cfg.params, cfg.profile);
    } catch (const NonFiniteState& e) {
        std::cerr << "simulation failed: " << e.what() << "\n";
        return 2;
    } catch (const StepUnderflow& e) {
        std::cerr << "simulation failed: " << e.what() << "\n";
        return 2;
    } catch (const SingularInertia& e) {
        std::cerr << "simulation failed: " << e.what() << "\n";
        return 2;
    }
    if (!out_path.empty()) write_trajectory_file(out_path, traj);

    const auto& last = traj.samples.back();
    double peak_qd = 0;
    for (const auto& s : traj.samples)
        peak_qd = std::max(peak_qd, s.qdot.lpNorm<Eigen::Infinity>());
    EnergyAuditReport audit = energy_audit(traj, cfg.params);
    std::cout << "variant: " << to_string(traj.variant) << "\n";
    std::cout << "samples: " << traj.samples.size() << "\n";
    std::cout << "final q [rad]: " << fmt(last.q[0]) << " " << fmt(last.q[1]) << " "
              << fmt(last.q[2]) << "  [deg]: " << fmt(last.q[0] * kRadToDeg) << " "
              << fmt(last.q[1] * kRadToDeg) << " " << fmt(last.q[2] * kRadToDeg) << "\n";
    std::cout << "peak |qdot| [rad/s]: " << fmt(peak_qd) << "\n";
    std::cout << "injected work [J]: " << fmt(audit.injected_work)
              << "  dissipated [J]: " << fmt(audit.dissipated_work) << "\n";
    std::cout << "work-balance residual (rel): " << fmt(audit.max_drift_rel) << "\n";
    if (!out_path.empty()) std::cout << "trajectory written to " << out_path << "\n";
    return 0;
}

int cmd_validate(const RunConfig& cfg, std::uint64_t seed, bool use_paper_d11,
                 const std::string& report_path) {
    auto results = run_validate_checks(cfg.params, seed, use_paper_d11);
    bool all_pass = true;
    std::string report;
    char line[256];
    std::snprintf(line, sizeof line, "# seed: %llu\n",
                  static_cast<unsigned long long>(seed));
    report += line;
    for (const auto& r : results) {
        std::snprintf(line, sizeof line, "%-26s %s  max_dev=%.6e  tol=%.6e%s%s\n",
                      r.name.c_str(), r.pass ? "PASS" : "FAIL", r.max_dev, r.tol,
                      r.detail.empty() ? "" : "  worst=", r.detail.c_str());
        report += line;
        all_pass = all_pass && r.pass;
    }
    std::cout << report;
    if (!all_pass) {
        std::ofstream os(report_path);
        os << "discrepancy report\n" << report;
        for (const auto& r : results)
            if (!r.pass && !r.detail.empty())
                os << "check '" << r.name << "' disagrees beyond tolerance at " << r.detail
                   << "\n";
        std::cerr << "validation failed; discrepancy report written to " << report_path
                  << "\n";
        return 2;
    }
    std::cout << "all checks passed\n";
    return 0;
}

int cmd_compare(const RunConfig& cfg) {
    CompareReport rep;
    try {
        rep = run_compare(cfg.sim, cfg.params, cfg.profile);
    } catch (const std::exception& e) {
        std::cerr << "compare failed: " << e.what() << "\n";
        return 2;
    }
    std::cout << "full-vs-reduced comparison over t_end=" << fmt(cfg.sim.t_end) << " s\n";
    for (int i = 0; i < 3; ++i)
        std::cout << "joint " << i + 1 << ": max |dq| = " << fmt(rep.max_dq[i])
                  << " rad, max |dqdot| = " << fmt(rep.max_dqdot[i]) << " rad/s\n";
    std::cout << "peak neglected-term torque: " << fmt(rep.peak_neglected_torque)
              << " N m\n";
    std::cout << "peak joint speed: " << fmt(rep.peak_speed) << " rad/s\n";
    return 0;
}

int cmd_calibrate(const RunConfig& cfg, const std::string& reference_path,
                  const std::string& out_path) {
    if (!cfg.calibration) {
        std::cerr << "config has no calibration section\n";
        return 1;
    }
    const CalibrationConfig& cc = *cfg.calibration;
    std::string ref_path = reference_path.empty() ? cc.reference : reference_path;
    if (ref_path.empty()) {
        std::cerr << "no reference trajectory given (calibration.reference or --reference)\n";
        return 1;
    }
    if (!std::filesystem::path(ref_path).is_absolute() &&
        !std::filesystem::exists(ref_path) && !cfg.base_dir.empty())
        ref_path = (cfg.base_dir / ref_path).string();

    ReferenceSeries ref = load_reference(ref_path);
    CalibrationProblem prob;
    prob.ref_t = ref.t;
    prob.ref_q = ref.q;
    prob.free = cc.free;
    prob.lo = cc.lo;
    prob.hi = cc.hi;
    prob.baseline = cfg.params;
    prob.profile = cfg.profile;
    prob.sim = cfg.sim;
    prob.weights = cc.weights;

    Eigen::VectorXd x0(static_cast<Eigen::Index>(prob.free.size()));
    for (std::size_t i = 0; i < prob.free.size(); ++i)
        x0[static_cast<Eigen::Index>(i)] =
            i < cc.initial.size() ? cc.initial[i] : 0.5 * (prob.lo[i] + prob.hi[i]);

    FitResult res = fit(prob, x0);
    std::cout << "iterations: " << res.iterations << "\n";
    std::cout << "final cost: " << fmt(res.cost) << "\n";
    for (std::size_t i = 0; i < prob.free.size(); ++i)
        std::cout << prob.free[i] << " = "
                  << format_double(res.x[static_cast<Eigen::Index>(i)]) << "\n";
    std::cout << "converged: " << (res.converged ? "yes" : "no") << "\n";
    if (!res.message.empty()) std::cout << "diagnostic: " << res.message << "\n";

    if (!out_path.empty()) {
        // fitted-params fragment, reusable inside a config's params section
        std::ofstream os(out_path);
        if (!os) throw IoError("cannot open '" + out_path + "' for writing");
        os << "{\n";
        for (std::size_t i = 0; i < prob.free.size(); ++i)
            os << "  \"" << prob.free[i]
               << "\": " << format_double(res.x[static_cast<Eigen::Index>(i)])
               << (i + 1 < prob.free.size() ? ",\n" : "\n");
        os << "}\n";
        std::cout << "fitted params written to " << out_path << "\n";
    }
    return res.converged ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamics engine for a tendon-driven three-link robotic finger"};
    app.require_subcommand(1);

    std::string config_path, out_path, reference_path, variant_override;
    std::uint64_t seed = 12345;
    bool use_paper_d11 = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "run configuration JSON")->required();
        sub->add_option("--variant", variant_override, "model variant: full|reduced");
        sub->add_option("--seed", seed, "seed for randomized sweeps");
    };

    CLI::App* sim = app.add_subcommand("simulate", "integrate and write a trajectory CSV");
    add_common(sim);
    sim->add_option("--out", out_path, "trajectory CSV output path");

    CLI::App* val = app.add_subcommand("validate", "run the self-verification sweeps");
    add_common(val);
    val->add_option("--out", out_path, "discrepancy report path");
    val->add_flag("--use-paper-d11", use_paper_d11,
                  "evaluate the uncorrected d_11 closed form (expected to fail)");

    CLI::App* cmp = app.add_subcommand("compare", "measure FULL vs REDUCED discrepancies");
    add_common(cmp);

    CLI::App* cal = app.add_subcommand("calibrate", "fit free parameters to a reference");
    add_common(cal);
    cal->add_option("--reference", reference_path, "reference CSV (t,q1,q2,q3)");
    cal->add_option("--out", out_path, "fitted-params JSON fragment output path");

    CLI11_PARSE(app, argc, argv);

    try {
        fingersim::RunConfig cfg = fingersim::parse_config(config_path);
        if (variant_override == "full")
            cfg.sim.variant = fingersim::ModelVariant::Full;
        else if (variant_override == "reduced")
            cfg.sim.variant = fingersim::ModelVariant::Reduced;
        else if (!variant_override.empty()) {
            std::cerr << "unknown variant '" << variant_override << "'\n";
            return 1;
        }

        if (sim->parsed()) return cmd_simulate(cfg, out_path);
        if (val->parsed())
            return cmd_validate(cfg, seed, use_paper_d11,
                                out_path.empty() ? "discrepancy_report.txt" : out_path);
        if (cmp->parsed()) return cmd_compare(cfg);
        if (cal->parsed()) return cmd_calibrate(cfg, reference_path, out_path);
    } catch (const fingersim::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 1;
    } catch (const fingersim::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const fingersim::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
