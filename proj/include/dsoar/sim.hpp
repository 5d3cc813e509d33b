#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dsoar/aircraft.hpp"
#include "dsoar/config.hpp"
#include "dsoar/controller.hpp"
#include "dsoar/path_library.hpp"
#include "dsoar/trace.hpp"
#include "dsoar/wind_estimation.hpp"
#include "dsoar/wind_field.hpp"

namespace dsoar {

struct SensorNoise {
    double accel = 0.05;      ///< [m/s^2]
    double airspeed = 0.3;    ///< [m/s]
    double position = 0.05;   ///< [m]
    double velocity = 0.05;   ///< [m/s]
    double attitude = 0.0035; ///< [rad], ~0.2 deg per axis
    double gyro = 0.002;      ///< [rad/s]

    static SensorNoise from_config(Config &cfg, const std::string &section = "noise");
};

/// First-order colored (Ornstein-Uhlenbeck) gusts added to the true wind.
struct GustConfig {
    double sigma = 0.5;     ///< stationary std [m/s]
    double tau_corr = 1.0;  ///< correlation time [s]

    static GustConfig from_config(Config &cfg, const std::string &section = "gust");
};

/// Where the controller's local wind input comes from.
enum class WindSource {
    Estimate,    ///< local estimator on noisy sensors
    Truth,       ///< exact local wind
    TruthNoisy,  ///< exact wind plus white noise of wind_noise_sigma
};

struct ScenarioConfig {
    WindFieldParams nominal_wind;  ///< field the reference path was built for
    WindFieldParams true_wind;     ///< field the plant flies in
    double duration = 60.0;        ///< [s]
    double plant_dt = 0.002;       ///< plant/inner-loop step [s]
    int outer_decimation = 5;      ///< outer loop every k-th inner tick
    SensorNoise noise;
    GustConfig gust;
    std::uint64_t seed = 1;
    double start_airspeed = 0.0;   ///< 0: use the path's design airspeed
    bool powered_trim = false;     ///< constant body-x thrust sized for trim
    double thrust = 0.0;           ///< explicit thrust [N] (wins if nonzero)
    WindSource wind_source = WindSource::Estimate;
    double wind_noise_sigma = 1.0; ///< [m/s], TruthNoisy only
    bool run_ekf = true;
    double ekf_rate_hz = 10.0;
    double divergence_error = 100.0;  ///< [m]
    Eigen::Vector3d disturbance_force = Eigen::Vector3d::Zero();  ///< inertial [N]

    static ScenarioConfig from_config(Config &cfg);
};

/// Reference-path source for a rollout: a fixed spline, or a library that is
/// re-queried at the nominal field with the current airspeed on each cycle
/// completion.
class PathProvider {
  public:
    virtual ~PathProvider() = default;
    virtual PathSpline select(const WindFieldParams &wind, double airspeed) const = 0;
};

class FixedPathProvider : public PathProvider {
  public:
    explicit FixedPathProvider(PathSpline spline) : spline_(std::move(spline)) {}
    PathSpline select(const WindFieldParams &, double) const override { return spline_; }

  private:
    PathSpline spline_;
};

class LibraryPathProvider : public PathProvider {
  public:
    explicit LibraryPathProvider(PathLibrary lib) : lib_(std::move(lib)) {}
    PathSpline select(const WindFieldParams &wind, double airspeed) const override {
        return select_path(lib_, wind, airspeed).spline;
    }
    const PathLibrary &library() const { return lib_; }

  private:
    PathLibrary lib_;
};

/// Deterministic closed-loop rollout: 6-DOF plant in the true field (plus
/// gusts), INDI controller fed noisy sensors and local wind estimates,
/// reference re-selected from the provider at each cycle completion.
RolloutTrace run_rollout(const ScenarioConfig &cfg, const AircraftParams &aircraft,
                         const ControllerGains &gains, const PathProvider &paths);

struct RolloutMetrics {
    double rms_tracking_error = 0.0;
    double max_tracking_error = 0.0;
    double initial_energy = 0.0;
    double terminal_energy = 0.0;
    std::vector<double> cycle_energy_delta;       ///< per completed cycle [J/kg]
    std::vector<double> switch_times;             ///< [s]
    std::vector<double> settle_times;             ///< per switch, time to err < 3 m
    std::vector<std::pair<double, double>> airspeed_vs_height;  ///< (z, tas)
    bool diverged = false;
    int cycles_completed = 0;
};

RolloutMetrics compute_metrics(const RolloutTrace &trace);

struct CampaignRun {
    int index = 0;
    WindFieldParams true_field;
    RolloutMetrics metrics;
};

struct CampaignSummary {
    std::vector<CampaignRun> runs;
    int diverged_count = 0;
    int completed_count = 0;
    double worst_max_error = 0.0;
    double mean_rms_error = 0.0;
};

/// Monte-Carlo campaign: true fields sampled around cfg.nominal_wind with
/// the provided sigmas, one rollout per field, deterministic per seed.
CampaignSummary run_monte_carlo(const ScenarioConfig &cfg, const WindSigmas &sigmas, int count,
                                const AircraftParams &aircraft, const ControllerGains &gains,
                                const PathProvider &paths);

std::string campaign_summary_json(const CampaignSummary &summary);

}  // namespace dsoar
