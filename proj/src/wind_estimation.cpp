#include "dsoar/wind_estimation.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace dsoar {

BodyFlowFit fit_body_flow_coeffs(const AircraftParams &p) {
    // Normalized z-force over the linear alpha envelope, least squares onto
    // c_a0 + c_a1 * alpha.
    const int n = 41;
    Eigen::MatrixXd design(n, 2);
    Eigen::VectorXd target(n);
    const double alpha_lo = -0.08;
    const double alpha_hi = 0.18;
    for (int k = 0; k < n; ++k) {
        const double alpha = alpha_lo + (alpha_hi - alpha_lo) * k / (n - 1);
        const auto cc = lift_drag_coeffs(alpha, p);
        design(k, 0) = 1.0;
        design(k, 1) = alpha;
        target[k] = std::sin(alpha) * cc.cd + std::cos(alpha) * cc.cl;
    }
    const Eigen::Vector2d ab = design.colPivHouseholderQr().solve(target);

    BodyFlowFit fit;
    fit.c_a0 = ab[0];
    fit.c_a1 = ab[1];
    // The y-force model is linear in beta by construction.
    fit.c_b1 = p.stab.side_force / p.wing_area;
    return fit;
}

Eigen::Vector3d local_wind_estimate(const AirdataSample &sample, const AircraftParams &p,
                                    const BodyFlowFit &fit, double min_airspeed) {
    if (!std::isfinite(sample.tas) || !std::isfinite(sample.cas) || !sample.accel.allFinite() ||
        !sample.v_ins.allFinite() || !sample.q.coeffs().allFinite())
        throw std::invalid_argument("local_wind_estimate: non-finite sensor values");
    if (sample.tas <= 0.0 || sample.cas < min_airspeed)
        throw SingularAirflowError("local_wind_estimate: airspeed below minimum");

    const double q_bar_area = 0.5 * p.rho * sample.cas * sample.cas * p.wing_area;
    const Eigen::Vector3d f_body = p.mass * sample.accel;

    const double u = sample.tas;
    const double v = (-f_body.y() / q_bar_area) * (u / fit.c_b1);
    const double w = (-f_body.z() / q_bar_area - fit.c_a0) * (u / fit.c_a1);

    const Eigen::Vector3d v_air_body{u, v, w};
    return sample.v_ins - sample.q.toRotationMatrix() * v_air_body;
}

WindFieldParams EstimatorBelief::as_params() const {
    WindFieldParams p;
    p.w0x = mean[0];
    p.w0y = mean[1];
    p.bx = mean[2];
    p.by = mean[3];
    p.s = std::max(mean[4], 0.01);
    p.h = mean[5];
    return p;
}

EstimatorBelief initial_belief(double altitude, double t) {
    EstimatorBelief b;
    b.mean.setZero();
    b.mean[4] = 0.3;
    b.mean[5] = altitude;
    b.cov.setZero();
    b.cov.diagonal() << 25.0, 25.0, 25.0, 25.0, 0.09, 400.0;
    b.t = t;
    return b;
}

Eigen::Matrix<double, 2, 6> measurement_jacobian(const Vector6d &mean, double z) {
    const double s = mean[4];
    if (!(s > 0.0)) throw std::invalid_argument("measurement_jacobian: steepness must be > 0");
    const double h = mean[5];
    const double sig = sigmoid_shear(z, s, h);
    const double bump = sig * (1.0 - sig);

    Eigen::Matrix<double, 2, 6> jac = Eigen::Matrix<double, 2, 6>::Zero();
    jac(0, 0) = sig;
    jac(0, 2) = 1.0;
    jac(0, 4) = mean[0] * bump * (z - h);
    jac(0, 5) = -mean[0] * bump * s;
    jac(1, 1) = sig;
    jac(1, 3) = 1.0;
    jac(1, 4) = mean[1] * bump * (z - h);
    jac(1, 5) = -mean[1] * bump * s;
    return jac;
}

Eigen::Vector2d predicted_wind(const Vector6d &mean, double z) {
    const double sig = sigmoid_shear(z, std::max(mean[4], 0.01), mean[5]);
    return {mean[0] * sig + mean[2], mean[1] * sig + mean[3]};
}

EstimatorNoise::EstimatorNoise() {
    process_psd << 0.01, 0.01, 0.001, 0.001, 1e-4, 0.05;
}

EstimatorNoise EstimatorNoise::from_config(Config &cfg, const std::string &section) {
    EstimatorNoise n;
    n.process_psd[0] = cfg.get_or(section + ".q_w0x", n.process_psd[0]);
    n.process_psd[1] = cfg.get_or(section + ".q_w0y", n.process_psd[1]);
    n.process_psd[2] = cfg.get_or(section + ".q_bx", n.process_psd[2]);
    n.process_psd[3] = cfg.get_or(section + ".q_by", n.process_psd[3]);
    n.process_psd[4] = cfg.get_or(section + ".q_s", n.process_psd[4]);
    n.process_psd[5] = cfg.get_or(section + ".q_h", n.process_psd[5]);
    n.meas_std = cfg.get_or(section + ".meas_std_mps", n.meas_std);
    n.gate_chi2 = cfg.get_or(section + ".gate_chi2", n.gate_chi2);
    return n;
}

std::pair<EstimatorBelief, EkfOutcome> ekf_step(const EstimatorBelief &belief,
                                                const Eigen::Vector2d &meas_wind_xy, double z,
                                                double dt, const EstimatorNoise &noise) {
    if (!(dt > 0.0)) throw std::invalid_argument("ekf_step: dt must be > 0");
    if (!meas_wind_xy.allFinite() || !std::isfinite(z))
        throw std::invalid_argument("ekf_step: non-finite measurement");

    EstimatorBelief out = belief;
    out.t = belief.t + dt;

    // Random-walk predict.
    out.cov.diagonal() += noise.process_psd * dt;

    const auto jac = measurement_jacobian(out.mean, z);
    const Eigen::Matrix2d meas_cov = noise.meas_std * noise.meas_std * Eigen::Matrix2d::Identity();
    const Eigen::Vector2d innovation = meas_wind_xy - predicted_wind(out.mean, z);
    const Eigen::Matrix2d innov_cov = jac * out.cov * jac.transpose() + meas_cov;
    const Eigen::Matrix2d innov_cov_inv = innov_cov.inverse();

    const double mahal = innovation.dot(innov_cov_inv * innovation);
    if (mahal > noise.gate_chi2) {
        out.cov = 0.5 * (out.cov + out.cov.transpose().eval());
        return {out, EkfOutcome::Gated};
    }

    const Eigen::Matrix<double, 6, 2> gain = out.cov * jac.transpose() * innov_cov_inv;
    out.mean += gain * innovation;
    const Matrix6d identity_minus_kh = Matrix6d::Identity() - gain * jac;
    out.cov = identity_minus_kh * out.cov * identity_minus_kh.transpose() +
              gain * meas_cov * gain.transpose();
    out.cov = 0.5 * (out.cov + out.cov.transpose().eval());
    out.mean[4] = std::max(out.mean[4], 0.01);
    return {out, EkfOutcome::Updated};
}

}  // namespace dsoar
