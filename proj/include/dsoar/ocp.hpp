#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "dsoar/aircraft.hpp"
#include "dsoar/config.hpp"
#include "dsoar/nlp.hpp"
#include "dsoar/point_mass.hpp"
#include "dsoar/spline.hpp"
#include "dsoar/wind_field.hpp"

namespace dsoar {

/// State/input/time bounds of the transcription.
struct OcpBounds {
    double v_min = 8.0;        ///< [m/s]
    double v_max = 40.0;       ///< [m/s]
    double gamma_max = 1.2217; ///< 70 deg [rad]
    double cl_min = -0.2;
    double cl_max = 1.2;
    double mu_max = 1.0472;    ///< 60 deg [rad]
    double z_min = 0.5;        ///< [m]
    double z_max = 500.0;      ///< [m]
    double xy_max = 500.0;     ///< [m]
    double load_max_g = 4.0;
    double t_min = 0.01;       ///< interval duration [s]
    double t_max = 0.5;        ///< [s]
};

struct OcpConfig {
    int nodes = 40;  ///< collocation intervals N (>= 20)
    OcpBounds bounds;
    bool periodic = true;            ///< close position/heading/climb angle
    bool anchor_lowest_start = true; ///< node 0 is the lowest point
    double guess_incline_deg = 35.0;
    double guess_radius = 0.0;       ///< 0: pick from airspeed and load limit
    nlp::SolverOptions solver;

    OcpConfig();
    static OcpConfig from_config(Config &cfg, const std::string &section = "ocp");
};

struct V0Range {
    double lo = 15.0;
    double hi = 15.0;

    static V0Range fixed(double v0) { return {v0, v0}; }
};

/// One wind scenario's trajectory on the shared path.
struct ScenarioTrajectory {
    Eigen::MatrixXd states;     ///< (N+1) x 6 [x y z V gamma psi]
    Eigen::MatrixXd inputs;     ///< N x 2 [C_L mu]
    Eigen::VectorXd durations;  ///< N interval lengths [s]

    double terminal_airspeed() const { return states(states.rows() - 1, 3); }
    double initial_airspeed() const { return states(0, 3); }
    double total_time() const { return durations.sum(); }
};

struct OcpDiagnostics {
    nlp::SolveStatus status = nlp::SolveStatus::NumericalFailure;
    std::string message;
    int outer_iterations = 0;
    int inner_iterations = 0;
    double feasibility = 0.0;
    double stationarity = 0.0;
    double common_path_residual = 0.0;  ///< max over i, j of shared-position mismatch
    double spline_fit_rms = 0.0;
};

struct RobustSolution {
    bool feasible = false;
    double objective = 0.0;  ///< min over scenarios of terminal airspeed [m/s]
    PathSpline path;
    std::vector<ScenarioTrajectory> scenarios;
    OcpDiagnostics diag;

    /// Normalized cumulative time of the nominal scenario, used as the
    /// spline parameter of each node.
    Eigen::VectorXd node_tau;
};

/// Warm start: shared node positions plus one trajectory per scenario (or a
/// single trajectory replicated across scenarios).
struct OcpWarmStart {
    Eigen::MatrixXd positions;  ///< (N+1) x 3
    std::vector<ScenarioTrajectory> scenarios;
};

/// Multi-scenario trapezoidal transcription of the energy-gain cycle search:
/// shared node positions across scenarios, per-scenario speeds/angles/inputs/
/// durations, epigraph objective on the worst-case terminal airspeed,
/// optional spatial periodicity. Solved with the augmented-Lagrangian NLP.
RobustSolution solve_robust_ocp(const ScenarioSet &scenarios, const V0Range &v0,
                                const AircraftParams &aircraft, const OcpConfig &cfg,
                                const OcpWarmStart *warm = nullptr);

/// Inclined-circle warm start with the classic soaring topology (upwind
/// climb, downwind descent), lowest point at node 0.
OcpWarmStart initial_guess_circle(const WindFieldParams &wind, const V0Range &v0,
                                  const AircraftParams &aircraft, const OcpConfig &cfg);

/// RK4 replay of a scenario's inputs over its time grid; returns node states
/// starting from the trajectory's own initial state.
Eigen::MatrixXd replay_trajectory(const ScenarioTrajectory &traj, const WindFieldParams &wind,
                                  const AircraftParams &aircraft, int substeps = 8);

}  // namespace dsoar
