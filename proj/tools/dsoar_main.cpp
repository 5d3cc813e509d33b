#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "dsoar/config.hpp"
#include "dsoar/ocp.hpp"
#include "dsoar/path_library.hpp"
#include "dsoar/sim.hpp"
#include "dsoar/trace.hpp"
#include "dsoar/wind_estimation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char *kToolVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitDiverged = 4;

struct RunContext {
    std::string command;
    dsoar::Config config;
    std::string out_dir;
    std::uint64_t seed = 1;
    std::vector<std::string> artifacts;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    std::string path_for(const std::string &name) {
        fs::create_directories(out_dir);
        const std::string full = (fs::path(out_dir) / name).string();
        artifacts.push_back(full);
        return full;
    }

    void write_manifest() {
        fs::create_directories(out_dir);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        json j;
        j["command"] = command;
        j["tool_version"] = kToolVersion;
        j["seed"] = seed;
        j["config_snapshot"] = config.serialize();
        j["artifacts"] = artifacts;
        j["wall_clock_s"] = wall;
        std::ofstream out(fs::path(out_dir) / "manifest.json");
        out << j.dump(1) << "\n";

        std::ofstream snap(fs::path(out_dir) / "config_resolved.cfg");
        snap << config.serialize();
    }
};

std::string default_out_dir(const std::string &command) {
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    const auto us = std::chrono::duration_cast<std::chrono::microseconds>(now).count();
    return "runs/" + command + "-" + std::to_string(us);
}

dsoar::Config load_config(const std::string &path, const std::vector<std::string> &overrides) {
    if (path.empty()) throw dsoar::ConfigError("--config is required (path to a .cfg file)");
    dsoar::Config cfg = dsoar::Config::from_file(path);
    for (const auto &ov : overrides) cfg.apply_override(ov);
    return cfg;
}

std::unique_ptr<dsoar::PathProvider> make_provider(const std::string &library_file,
                                                   const std::string &path_file) {
    if (!library_file.empty() && !path_file.empty())
        throw dsoar::ConfigError("pass either --library or --path, not both");
    if (!library_file.empty()) {
        if (!fs::exists(library_file))
            throw dsoar::ConfigError("library file not found: " + library_file +
                                     " (build one with: dsoar optimize --grid ...)");
        return std::make_unique<dsoar::LibraryPathProvider>(dsoar::load_path_library(library_file));
    }
    if (!path_file.empty()) {
        if (!fs::exists(path_file))
            throw dsoar::ConfigError("path file not found: " + path_file +
                                     " (build one with: dsoar optimize ...)");
        return std::make_unique<dsoar::FixedPathProvider>(dsoar::load_path_spline(path_file));
    }
    throw dsoar::ConfigError("a reference path source is required: --library <file> or --path <file>");
}

int cmd_optimize(RunContext &ctx, bool grid_mode) {
    auto aircraft = dsoar::AircraftParams::from_config(ctx.config);
    auto ocp_cfg = dsoar::OcpConfig::from_config(ctx.config);
    auto nominal = dsoar::WindFieldParams::from_config(ctx.config);
    auto sigmas = dsoar::WindSigmas::from_config(ctx.config);
    const int scenarios = static_cast<int>(
        ctx.config.get_or("optimize.scenarios", static_cast<std::int64_t>(5)));
    const double v0 = ctx.config.get_or("optimize.v0_mps", 18.0);

    if (grid_mode) {
        auto axes = dsoar::LibraryAxes::from_config(ctx.config);
        const auto lib = dsoar::build_path_library(axes, aircraft, ocp_cfg, nominal, sigmas,
                                                   scenarios, ctx.seed);
        dsoar::save_path_library(lib, ctx.path_for("library.json"));
        json report;
        report["nodes"] = lib.entries.size();
        report["feasible"] = lib.feasible_count();
        std::ofstream(fs::path(ctx.out_dir) / "build_report.json") << report.dump(1) << "\n";
        ctx.artifacts.push_back((fs::path(ctx.out_dir) / "build_report.json").string());
        ctx.write_manifest();
        if (lib.feasible_count() == 0) {
            std::cerr << "error: no feasible grid nodes\n";
            return kExitInfeasible;
        }
        std::cout << "library: " << lib.feasible_count() << "/" << lib.entries.size()
                  << " nodes feasible\n";
        return kExitOk;
    }

    const auto set = dsoar::sample_perturbed_fields(nominal, sigmas, scenarios, ctx.seed);
    const auto sol = dsoar::solve_robust_ocp(set, dsoar::V0Range::fixed(v0), aircraft, ocp_cfg);
    json report;
    report["objective_mps"] = sol.objective;
    report["feasible"] = sol.feasible;
    report["status"] = sol.diag.message;
    report["iterations"] = sol.diag.inner_iterations;
    report["feasibility"] = sol.diag.feasibility;
    report["spline_fit_rms_m"] = sol.diag.spline_fit_rms;
    std::ofstream(fs::path(ctx.out_dir) / "solve_report.json") << report.dump(1) << "\n";
    ctx.artifacts.push_back((fs::path(ctx.out_dir) / "solve_report.json").string());
    if (sol.feasible) dsoar::save_path_spline(sol.path, ctx.path_for("path.json"));
    ctx.write_manifest();
    if (!sol.feasible) {
        std::cerr << "error: optimization did not converge: " << sol.diag.message << "\n";
        return kExitInfeasible;
    }
    std::cout << "objective (worst-case terminal airspeed): " << sol.objective << " m/s\n";
    return kExitOk;
}

int cmd_simulate(RunContext &ctx, const std::string &library_file, const std::string &path_file) {
    auto aircraft = dsoar::AircraftParams::from_config(ctx.config);
    auto gains = dsoar::ControllerGains::from_config(ctx.config);
    auto scenario = dsoar::ScenarioConfig::from_config(ctx.config);
    scenario.seed = ctx.seed;
    const auto provider = make_provider(library_file, path_file);

    const auto trace = dsoar::run_rollout(scenario, aircraft, gains, *provider);
    dsoar::write_trace_csv(trace, ctx.path_for("trace.csv"));
    dsoar::write_airdata_csv(trace.airdata, ctx.path_for("airdata.csv"));
    const auto metrics = dsoar::compute_metrics(trace);
    json j;
    j["rms_error_m"] = metrics.rms_tracking_error;
    j["max_error_m"] = metrics.max_tracking_error;
    j["cycles"] = metrics.cycles_completed;
    j["energy_delta_jpkg"] = metrics.terminal_energy - metrics.initial_energy;
    j["diverged"] = metrics.diverged;
    std::ofstream(fs::path(ctx.out_dir) / "metrics.json") << j.dump(1) << "\n";
    ctx.artifacts.push_back((fs::path(ctx.out_dir) / "metrics.json").string());
    ctx.write_manifest();
    if (trace.diverged) {
        std::cerr << "error: rollout diverged at t=" << trace.diverged_at << " s ("
                  << trace.divergence_reason << ")\n";
        return kExitDiverged;
    }
    std::cout << "rollout complete: rms error " << metrics.rms_tracking_error << " m over "
              << trace.records.size() << " records\n";
    return kExitOk;
}

int cmd_montecarlo(RunContext &ctx, const std::string &library_file, const std::string &path_file,
                   int scenario_override) {
    auto aircraft = dsoar::AircraftParams::from_config(ctx.config);
    auto gains = dsoar::ControllerGains::from_config(ctx.config);
    auto scenario = dsoar::ScenarioConfig::from_config(ctx.config);
    auto sigmas = dsoar::WindSigmas::from_config(ctx.config);
    scenario.seed = ctx.seed;
    int count = static_cast<int>(
        ctx.config.get_or("montecarlo.scenarios", static_cast<std::int64_t>(20)));
    if (scenario_override > 0) {
        count = scenario_override;
        ctx.config.set_int("montecarlo.scenarios", count);
    }
    const auto provider = make_provider(library_file, path_file);

    const auto summary = dsoar::run_monte_carlo(scenario, sigmas, count, aircraft, gains, *provider);
    std::ofstream(ctx.path_for("summary.json")) << dsoar::campaign_summary_json(summary);
    ctx.write_manifest();
    std::cout << "campaign: " << summary.completed_count << "/" << summary.runs.size()
              << " runs completed, worst max error " << summary.worst_max_error << " m\n";
    return kExitOk;
}

int cmd_estimate(RunContext &ctx, const std::string &log_file) {
    auto aircraft = dsoar::AircraftParams::from_config(ctx.config);
    auto noise = dsoar::EstimatorNoise::from_config(ctx.config);
    if (log_file.empty()) throw dsoar::ConfigError("--log is required (airdata CSV)");
    const auto samples = dsoar::read_airdata_csv(log_file);
    if (samples.empty()) throw dsoar::ConfigError("airdata log is empty: " + log_file);

    const auto fit = dsoar::fit_body_flow_coeffs(aircraft);
    auto belief = dsoar::initial_belief(samples.front().alt, samples.front().t);
    std::vector<dsoar::ConvergenceRecord> records;
    records.reserve(samples.size());
    double prev_t = samples.front().t - 0.1;
    for (const auto &sample : samples) {
        const double dt = sample.t - prev_t;
        prev_t = sample.t;
        bool gated = false;
        try {
            const Eigen::Vector3d wind = dsoar::local_wind_estimate(sample, aircraft, fit);
            const auto [next, outcome] = dsoar::ekf_step(
                belief, Eigen::Vector2d(wind.x(), wind.y()), sample.alt, dt, noise);
            belief = next;
            gated = outcome == dsoar::EkfOutcome::Gated;
        } catch (const dsoar::SingularAirflowError &) {
            gated = true;  // low-airspeed sample skipped
        }
        dsoar::ConvergenceRecord rec;
        rec.t = sample.t;
        rec.mean = belief.mean;
        rec.var = belief.cov.diagonal();
        rec.gated = gated;
        records.push_back(rec);
    }
    dsoar::write_convergence_csv(records, ctx.path_for("convergence.csv"));
    ctx.write_manifest();
    const auto &mean = belief.mean;
    std::cout << "final estimate: w0=(" << mean[0] << ", " << mean[1] << ") m/s bias=(" << mean[2]
              << ", " << mean[3] << ") m/s s=" << mean[4] << " 1/m h=" << mean[5] << " m\n";
    return kExitOk;
}

int cmd_export(RunContext &ctx, const std::string &trace_file) {
    if (trace_file.empty()) throw dsoar::ConfigError("--trace is required (trace CSV)");
    const auto trace = dsoar::read_trace_csv(trace_file);

    {
        std::ofstream out(ctx.path_for("tracking_error.csv"));
        out << "t_s,err_m,switched\n";
        for (const auto &r : trace.records)
            out << r.t << "," << r.tracking_error << "," << (r.switched ? 1 : 0) << "\n";
    }
    {
        std::ofstream out(ctx.path_for("airspeed_height.csv"));
        out << "z_m,tas_mps,t_s\n";
        for (const auto &r : trace.records) out << r.r.z() << "," << r.tas << "," << r.t << "\n";
    }
    {
        std::ofstream out(ctx.path_for("path3d.csv"));
        out << "t_s,x_m,y_m,z_m,ref_x_m,ref_y_m,ref_z_m\n";
        for (const auto &r : trace.records)
            out << r.t << "," << r.r.x() << "," << r.r.y() << "," << r.r.z() << "," << r.ref_r.x()
                << "," << r.ref_r.y() << "," << r.ref_r.z() << "\n";
    }
    ctx.write_manifest();
    std::cout << "exported " << trace.records.size() << " records\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"dsoar: wind-shear soaring simulation and guidance toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string library_file;
    std::string path_file;
    std::string log_file;
    std::string trace_file;
    std::uint64_t seed_flag = 0;
    bool seed_given = false;
    int scenarios_flag = 0;
    bool grid_mode = false;
    std::vector<std::string> overrides;

    auto add_common = [&](CLI::App *cmd, bool needs_config) {
        auto *copt = cmd->add_option("--config", config_path, "configuration file (.cfg)");
        if (needs_config) copt->required();
        cmd->add_option("--out", out_dir, "output directory (default: runs/<command>-<stamp>)");
        cmd->add_option("--seed", seed_flag, "RNG seed override")
            ->each([&](const std::string &) { seed_given = true; });
        cmd->add_option("--set", overrides, "config override, section.key=value (repeatable)");
    };

    auto *optimize = app.add_subcommand(
        "optimize", "solve a robust soaring path, or a full library with --grid");
    add_common(optimize, true);
    optimize->add_flag("--grid", grid_mode, "build the full path library over [library] axes");
    optimize->add_option("--scenarios", scenarios_flag,
                         "wind scenarios per solve (overrides optimize.scenarios)");

    auto *simulate = app.add_subcommand("simulate", "run one closed-loop rollout");
    add_common(simulate, true);
    simulate->add_option("--library", library_file, "path library JSON");
    simulate->add_option("--path", path_file, "single path JSON");
    simulate->add_option("--duration-s", overrides,
                         "rollout duration in seconds (shorthand for sim.duration_s)")
        ->each([&](const std::string &v) { overrides.back() = "sim.duration_s=" + v; });

    auto *montecarlo = app.add_subcommand("montecarlo", "run a Monte-Carlo rollout campaign");
    add_common(montecarlo, true);
    montecarlo->add_option("--library", library_file, "path library JSON");
    montecarlo->add_option("--path", path_file, "single path JSON");
    montecarlo->add_option("--scenarios", scenarios_flag, "number of perturbed wind fields");
    montecarlo->add_option("--duration-s", overrides,
                           "rollout duration in seconds (shorthand for sim.duration_s)")
        ->each([&](const std::string &v) { overrides.back() = "sim.duration_s=" + v; });

    auto *estimate = app.add_subcommand("estimate", "replay an airdata log through the estimator");
    add_common(estimate, true);
    estimate->add_option("--log", log_file, "airdata CSV log")->required();

    auto *export_cmd = app.add_subcommand("export", "extract plot-ready CSVs from a trace");
    add_common(export_cmd, false);
    export_cmd->add_option("--trace", trace_file, "rollout trace CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        RunContext ctx;
        ctx.command = app.get_subcommands().front()->get_name();
        ctx.out_dir = out_dir.empty() ? default_out_dir(ctx.command) : out_dir;
        if (!config_path.empty() || ctx.command != "export") {
            ctx.config = load_config(config_path, overrides);
        }
        ctx.seed = seed_given ? seed_flag
                              : static_cast<std::uint64_t>(ctx.config.get_or(
                                    "run.seed", static_cast<std::int64_t>(1)));
        ctx.config.set_int("run.seed", static_cast<std::int64_t>(ctx.seed));

        if (ctx.command == "optimize") {
            if (scenarios_flag > 0) ctx.config.set_int("optimize.scenarios", scenarios_flag);
            return cmd_optimize(ctx, grid_mode);
        }
        if (ctx.command == "simulate") return cmd_simulate(ctx, library_file, path_file);
        if (ctx.command == "montecarlo")
            return cmd_montecarlo(ctx, library_file, path_file, scenarios_flag);
        if (ctx.command == "estimate") return cmd_estimate(ctx, log_file);
        if (ctx.command == "export") return cmd_export(ctx, trace_file);
        std::cerr << "error: unknown command\n";
        return kExitConfig;
    } catch (const dsoar::ConfigError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
