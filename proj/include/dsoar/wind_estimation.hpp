#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <utility>

#include "dsoar/aircraft.hpp"
#include "dsoar/config.hpp"
#include "dsoar/wind_field.hpp"

namespace dsoar {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

/// Linearized body-flow inversion coefficients: normalized z-force vs alpha
/// and y-force vs beta. Fitted against the forward aero model over the trim
/// envelope so the local estimator stays consistent with the simulated truth.
struct BodyFlowFit {
    double c_a0 = 0.0;  ///< z-force coefficient at alpha = 0
    double c_a1 = 5.7;  ///< z-force slope per rad
    double c_b1 = 0.3;  ///< y-force slope per rad of sideslip
};

BodyFlowFit fit_body_flow_coeffs(const AircraftParams &p);

/// One airdata/IMU/INS sample for local wind estimation.
struct AirdataSample {
    double t = 0.0;                                  ///< [s]
    double tas = 0.0;                                ///< true airspeed [m/s]
    double cas = 0.0;                                ///< calibrated airspeed [m/s]
    Eigen::Vector3d accel = Eigen::Vector3d::Zero(); ///< body specific force [m/s^2]
    Eigen::Quaterniond q = Eigen::Quaterniond::Identity();  ///< body FRD -> ENU
    Eigen::Vector3d v_ins = Eigen::Vector3d::Zero(); ///< inertial velocity [m/s]
    double alt = 0.0;                                ///< altitude [m]
};

/// Instantaneous wind pseudo-measurement (ENU): reconstruct the body air
/// velocity from airspeed and normalized body forces, then close the wind
/// triangle against the INS velocity. Rejects samples below min_airspeed.
Eigen::Vector3d local_wind_estimate(const AirdataSample &sample, const AircraftParams &p,
                                    const BodyFlowFit &fit, double min_airspeed = 5.0);

/// Gaussian belief over the wind-field parameters
/// [w0x, w0y, bx, by, s, h].
struct EstimatorBelief {
    Vector6d mean = Vector6d::Zero();
    Matrix6d cov = Matrix6d::Identity();
    double t = 0.0;

    WindFieldParams as_params() const;
};

/// Default prior: no wind, mild layer at the current altitude, wide
/// covariance.
EstimatorBelief initial_belief(double altitude, double t = 0.0);

/// Partials of the horizontal wind model at altitude z with respect to the
/// six parameters. Requires s > 0.
Eigen::Matrix<double, 2, 6> measurement_jacobian(const Vector6d &mean, double z);

/// Horizontal wind predicted by the belief at altitude z.
Eigen::Vector2d predicted_wind(const Vector6d &mean, double z);

struct EstimatorNoise {
    Vector6d process_psd;  ///< random-walk intensity per second
    double meas_std = 0.5; ///< [m/s]
    double gate_chi2 = 9.21;  ///< 99% chi-square with 2 DoF

    EstimatorNoise();
    static EstimatorNoise from_config(Config &cfg, const std::string &section = "estimator");
};

enum class EkfOutcome { Updated, Gated };

/// Random-walk predict plus a gated EKF update with the two horizontal wind
/// components measured at altitude z. Pure: belief in, belief out.
std::pair<EstimatorBelief, EkfOutcome> ekf_step(const EstimatorBelief &belief,
                                                const Eigen::Vector2d &meas_wind_xy, double z,
                                                double dt, const EstimatorNoise &noise);

}  // namespace dsoar
