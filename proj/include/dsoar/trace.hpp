#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <string>
#include <vector>

#include "dsoar/aircraft.hpp"
#include "dsoar/wind_estimation.hpp"

namespace dsoar {

/// One record of a closed-loop rollout, written at the outer control rate.
struct TraceRecord {
    double t = 0.0;
    Eigen::Vector3d r = Eigen::Vector3d::Zero();
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
    Eigen::Vector3d omega = Eigen::Vector3d::Zero();
    double tas = 0.0;    ///< true air-relative speed [m/s]
    double alpha = 0.0;  ///< [rad]
    double beta = 0.0;   ///< [rad]
    double tau = 0.0;    ///< path parameter of the reference
    Eigen::Vector3d ref_r = Eigen::Vector3d::Zero();
    double tracking_error = 0.0;  ///< [m]
    SurfaceDeflections cmd;
    Eigen::Vector3d wind_true = Eigen::Vector3d::Zero();
    Eigen::Vector3d wind_est = Eigen::Vector3d::Zero();
    Vector6d ekf_mean = Vector6d::Zero();
    Vector6d ekf_var = Vector6d::Zero();
    double energy = 0.0;  ///< specific energy g z + V_air^2/2 [J/kg]
    bool switched = false;  ///< reference switch happened at this record
};

struct RolloutTrace {
    std::vector<TraceRecord> records;
    std::vector<AirdataSample> airdata;  ///< sensor stream at record instants
    double record_dt = 0.01;  ///< [s]
    bool diverged = false;
    double diverged_at = 0.0;
    std::string divergence_reason;
    int cycles_completed = 0;

    bool empty() const { return records.empty(); }
};

/// Fixed-schema CSV (one header line; doubles round-trip bit-exactly).
void write_trace_csv(const RolloutTrace &trace, const std::string &path);
RolloutTrace read_trace_csv(const std::string &path);

/// Airdata replay log for the estimator CLI:
/// t_s, tas_mps, cas_mps, acc_x/y/z_mps2, q_w/x/y/z, vel_e/n/u_mps, alt_m.
void write_airdata_csv(const std::vector<AirdataSample> &samples, const std::string &path);
std::vector<AirdataSample> read_airdata_csv(const std::string &path);

/// Estimator convergence log: t, six means, six covariance diagonals.
struct ConvergenceRecord {
    double t = 0.0;
    Vector6d mean = Vector6d::Zero();
    Vector6d var = Vector6d::Zero();
    bool gated = false;
};
void write_convergence_csv(const std::vector<ConvergenceRecord> &records, const std::string &path);

}  // namespace dsoar
