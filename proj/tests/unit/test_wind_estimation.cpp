#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "dsoar/rigid_body.hpp"
#include "dsoar/rng.hpp"
#include "dsoar/wind_estimation.hpp"

using namespace dsoar;

namespace {

/// Synthesize a noiseless airdata sample from the estimator's own body-flow
/// model, for the round-trip identity.
AirdataSample synth_sample(const Eigen::Vector3d &wind, const Eigen::Quaterniond &q,
                           const Eigen::Vector3d &v_air_body, const AircraftParams &p,
                           const BodyFlowFit &fit) {
    AirdataSample s;
    s.tas = v_air_body.x();
    s.cas = v_air_body.x();
    const double q_bar_area = 0.5 * p.rho * s.cas * s.cas * p.wing_area;
    // Invert the linear flow model to the forces it implies.
    const double f_y = -q_bar_area * fit.c_b1 * v_air_body.y() / s.tas;
    const double f_z = -q_bar_area * (fit.c_a0 + fit.c_a1 * v_air_body.z() / s.tas);
    s.accel = Eigen::Vector3d(0.3, f_y / p.mass, f_z / p.mass);
    s.q = q;
    s.v_ins = q.toRotationMatrix() * v_air_body + wind;
    s.alt = 12.0;
    return s;
}

WindFieldParams truth_field() {
    WindFieldParams w;
    w.w0x = 12.0;
    w.s = 0.4;
    w.h = 0.0;
    return w;
}

}  // namespace

TEST_CASE("local estimator round-trips its own flow model exactly") {
    AircraftParams p;
    const BodyFlowFit fit = fit_body_flow_coeffs(p);
    Rng rng(17);
    for (int k = 0; k < 100; ++k) {
        const Eigen::Vector3d wind(6.0 * rng.uniform(), 2.0 * (rng.uniform() - 0.5), 0.0);
        const Eigen::Quaterniond q =
            attitude_from_axes({1.0, rng.uniform() - 0.5, 0.3 * (rng.uniform() - 0.5)},
                               {0.2 * (rng.uniform() - 0.5), 0.2 * (rng.uniform() - 0.5), -1.0});
        const Eigen::Vector3d v_air_body(10.0 + 15.0 * rng.uniform(), 2.0 * (rng.uniform() - 0.5),
                                         1.5 * (rng.uniform() - 0.5));
        const auto sample = synth_sample(wind, q, v_air_body, p, fit);
        const Eigen::Vector3d est = local_wind_estimate(sample, p, fit);
        CHECK((est - wind).norm() < 1e-6);
    }
}

TEST_CASE("local estimator recovers wind from the full nonlinear model approximately") {
    AircraftParams p;
    const BodyFlowFit fit = fit_body_flow_coeffs(p);
    const Eigen::Vector3d wind(6.0, 2.0, 0.0);
    // Level flight at small alpha; forces from the actual aero model.
    const Eigen::Vector3d v_air_body(16.0, 0.3, 0.9);
    const Eigen::Quaterniond q = attitude_from_axes({1, 0.1, 0.05}, {0, 0, -1});
    AirdataSample s;
    s.tas = v_air_body.norm();
    s.cas = v_air_body.norm();
    s.accel = (aero_force_body(v_air_body, p) + stability_side_force(v_air_body, p)) / p.mass;
    s.q = q;
    s.v_ins = q.toRotationMatrix() * v_air_body + wind;
    s.alt = 5.0;
    const Eigen::Vector3d est = local_wind_estimate(s, p, fit);
    CHECK((est - wind).norm() < 0.5);
}

TEST_CASE("local estimator rejects low airspeed and bad values") {
    AircraftParams p;
    const BodyFlowFit fit = fit_body_flow_coeffs(p);
    AirdataSample s;
    s.tas = 3.0;
    s.cas = 3.0;
    CHECK_THROWS_AS(local_wind_estimate(s, p, fit), SingularAirflowError);
    s.tas = 15.0;
    s.cas = 15.0;
    s.accel.x() = std::nan("");
    CHECK_THROWS(local_wind_estimate(s, p, fit));
}

TEST_CASE("measurement jacobian structure at the layer center") {
    Vector6d mean;
    mean << 12.0, -3.0, 1.0, 0.5, 0.4, 7.0;
    const auto jac = measurement_jacobian(mean, 7.0);  // z == h
    CHECK(jac(0, 0) == doctest::Approx(0.5));
    CHECK(jac(0, 2) == 1.0);
    CHECK(jac(0, 4) == doctest::Approx(0.0));  // (z - h) = 0
    CHECK(jac(1, 1) == doctest::Approx(0.5));
    CHECK(jac(1, 3) == 1.0);

    Vector6d no_amp = mean;
    no_amp[0] = no_amp[1] = 0.0;
    const auto j0 = measurement_jacobian(no_amp, 3.0);
    CHECK(j0.col(4).norm() == 0.0);
    CHECK(j0.col(5).norm() == 0.0);
}

TEST_CASE("measurement jacobian matches finite differences") {
    Rng rng(31);
    for (int k = 0; k < 200; ++k) {
        Vector6d mean;
        mean << 15.0 * (rng.uniform() - 0.3), 8.0 * (rng.uniform() - 0.5),
            3.0 * (rng.uniform() - 0.5), 3.0 * (rng.uniform() - 0.5), 0.1 + 0.8 * rng.uniform(),
            20.0 * (rng.uniform() - 0.5);
        const double z = mean[5] + 25.0 * (rng.uniform() - 0.5);
        const auto jac = measurement_jacobian(mean, z);
        for (int col = 0; col < 6; ++col) {
            Vector6d plus = mean, minus = mean;
            const double eps = 1e-6;
            plus[col] += eps;
            minus[col] -= eps;
            const Eigen::Vector2d fd = (predicted_wind(plus, z) - predicted_wind(minus, z)) / (2 * eps);
            CHECK(std::abs(jac(0, col) - fd[0]) < 1e-5);
            CHECK(std::abs(jac(1, col) - fd[1]) < 1e-5);
        }
    }
}

TEST_CASE("no-update limit: huge measurement noise leaves the mean unchanged") {
    EstimatorNoise noise;
    noise.meas_std = 1e9;
    noise.gate_chi2 = 1e18;
    auto belief = initial_belief(5.0);
    const Vector6d mean0 = belief.mean;
    const Matrix6d cov0 = belief.cov;
    const auto [next, outcome] = ekf_step(belief, {4.0, 1.0}, 10.0, 0.5, noise);
    CHECK(outcome == EkfOutcome::Updated);
    CHECK((next.mean - mean0).norm() < 1e-6);
    // Covariance grew by about Q dt (the update is negligible).
    for (int i = 0; i < 6; ++i)
        CHECK(next.cov(i, i) == doctest::Approx(cov0(i, i) + noise.process_psd[i] * 0.5).epsilon(1e-6));
}

TEST_CASE("innovation gate rejects outliers distinctly") {
    EstimatorNoise noise;
    auto belief = initial_belief(0.0);
    belief.cov.setZero();
    belief.cov.diagonal() << 0.01, 0.01, 0.01, 0.01, 1e-4, 0.01;  // confident prior
    const auto [next, outcome] = ekf_step(belief, {500.0, -500.0}, 0.0, 0.1, noise);
    CHECK(outcome == EkfOutcome::Gated);
    CHECK((next.mean - belief.mean).norm() == 0.0);
}

TEST_CASE("single-altitude data cannot resolve layer shape") {
    EstimatorNoise noise;
    auto belief = initial_belief(0.0);
    const double var_s0 = belief.cov(4, 4);
    const double var_h0 = belief.cov(5, 5);
    Rng rng(5);
    for (int k = 0; k < 300; ++k) {
        const Eigen::Vector2d meas(6.0 + 0.1 * rng.normal(), 0.1 * rng.normal());
        belief = ekf_step(belief, meas, 0.0, 0.1, noise).first;  // always z = h = 0
    }
    // Wind components learned, layer shape stays near the prior (only the
    // random-walk inflation moves it).
    CHECK(belief.cov(0, 0) < 1.0);
    CHECK(belief.cov(4, 4) > 0.25 * var_s0);
    CHECK(belief.cov(5, 5) > 0.25 * var_h0);
}

TEST_CASE("covariance stays symmetric positive semidefinite") {
    EstimatorNoise noise;
    auto belief = initial_belief(0.0);
    Rng rng(77);
    const WindFieldParams truth = truth_field();
    for (int k = 0; k < 500; ++k) {
        const double z = 30.0 * std::sin(0.05 * k);
        const Eigen::Vector3d w = wind_at(truth, z);
        const Eigen::Vector2d meas(w.x() + 0.5 * rng.normal(), w.y() + 0.5 * rng.normal());
        belief = ekf_step(belief, meas, z, 0.1, noise).first;
        const Matrix6d &cov = belief.cov;
        CHECK((cov - cov.transpose()).cwiseAbs().maxCoeff() < 1e-9);
        Eigen::SelfAdjointEigenSolver<Matrix6d> eig(cov);
        CHECK(eig.eigenvalues().minCoeff() > -1e-9);
    }
}

TEST_CASE("zero process noise: repeated identical measurements shrink covariance monotonically") {
    EstimatorNoise noise;
    noise.process_psd.setZero();
    auto belief = initial_belief(0.0);
    double prev_trace = belief.cov.trace();
    for (int k = 0; k < 50; ++k) {
        belief = ekf_step(belief, {5.0, 1.0}, 8.0, 0.1, noise).first;
        const double tr = belief.cov.trace();
        CHECK(tr <= prev_trace + 1e-12);
        prev_trace = tr;
    }
}

TEST_CASE("altitude sweep converges all six parameters") {
    // Synthetic climb/descent oracle: truth field (12 m/s, s=0.4, h=0),
    // measurement noise 0.5 m/s, sweep +-30 m over 120 s at 10 Hz.
    const WindFieldParams truth = truth_field();
    EstimatorNoise noise;
    auto belief = initial_belief(-30.0);
    Rng rng(2024);
    const double dt = 0.1;
    for (int k = 0; k < 1200; ++k) {
        const double t = k * dt;
        const double z = 30.0 * std::sin(2.0 * M_PI * t / 40.0);  // three full sweeps
        const Eigen::Vector3d w = wind_at(truth, z);
        const Eigen::Vector2d meas(w.x() + 0.5 * rng.normal(), w.y() + 0.5 * rng.normal());
        belief = ekf_step(belief, meas, z, dt, noise).first;
    }
    // Scales: wind amplitude 12 m/s, steepness 0.4, layer thickness 4/s = 10 m.
    CHECK(std::abs(belief.mean[0] - truth.w0x) < 1.2);
    CHECK(std::abs(belief.mean[1] - truth.w0y) < 1.2);
    CHECK(std::abs(belief.mean[2] - truth.bx) < 1.2);
    CHECK(std::abs(belief.mean[3] - truth.by) < 1.2);
    CHECK(std::abs(belief.mean[4] - truth.s) < 0.04);
    CHECK(std::abs(belief.mean[5] - truth.h) < 1.0);
}
