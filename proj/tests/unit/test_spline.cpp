#include <doctest.h>

#include <cmath>

#include "dsoar/rng.hpp"
#include "dsoar/spline.hpp"

using namespace dsoar;

TEST_CASE("basis endpoint structure") {
    for (double tau : {0.0, 0.25, 0.5, 0.99, 1.0}) CHECK(basis_function(0, tau) == 1.0);
    for (int i = 1; i < kSplineBasisCount; ++i) {
        CHECK(basis_function(i, 0.0) == 0.0);
        CHECK(std::abs(basis_function(i, 1.0)) < 1e-15);
    }
    // Center bump peaks at its own node: i/16 = 0.5 makes the exponent zero.
    CHECK(basis_function(8, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("basis rejects domain violations") {
    CHECK_THROWS(basis_function(-1, 0.5));
    CHECK_THROWS(basis_function(16, 0.5));
    CHECK_THROWS(basis_function(3, -0.1));
    CHECK_THROWS(basis_function(3, 1.1));
    CHECK_THROWS(basis_derivative(3, 0.5, 3));
}

TEST_CASE("basis derivatives match finite differences") {
    Rng rng(11);
    for (int k = 0; k < 100; ++k) {
        const double tau = 0.01 + 0.98 * rng.uniform();
        const int i = static_cast<int>(rng.below(16));
        const double eps = 1e-6;
        const double d1_fd = (basis_function(i, tau + eps) - basis_function(i, tau - eps)) / (2 * eps);
        const double d2_fd = (basis_derivative(i, tau + eps, 1) - basis_derivative(i, tau - eps, 1)) / (2 * eps);
        CHECK(basis_derivative(i, tau, 1) == doctest::Approx(d1_fd).epsilon(1e-6));
        CHECK(basis_derivative(i, tau, 2) == doctest::Approx(d2_fd).epsilon(1e-6));
    }
}

TEST_CASE("fit recovers known coefficients exactly") {
    Rng rng(5);
    PathSpline truth;
    for (int d = 0; d < 3; ++d)
        for (int i = 0; i < kSplineBasisCount; ++i) truth.coeffs(d, i) = 10.0 * (rng.uniform() - 0.5);

    std::vector<std::pair<double, Eigen::Vector3d>> pts;
    for (int k = 0; k <= 100; ++k) {
        const double tau = k / 100.0;
        pts.emplace_back(tau, eval_path(truth, tau));
    }
    const SplineFit fit = fit_path_spline(pts);
    CHECK((fit.spline.coeffs - truth.coeffs).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(fit.residual_rms < 1e-9);
}

TEST_CASE("constant points collapse onto the constant basis term") {
    const Eigen::Vector3d c{3.0, -2.0, 7.5};
    std::vector<std::pair<double, Eigen::Vector3d>> pts;
    for (int k = 0; k <= 40; ++k) pts.emplace_back(k / 40.0, c);
    const SplineFit fit = fit_path_spline(pts);
    CHECK((fit.spline.coeffs.col(0) - c).norm() < 1e-9);
    CHECK(fit.spline.coeffs.rightCols(kSplineBasisCount - 1).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("fit failure on degenerate sampling") {
    std::vector<std::pair<double, Eigen::Vector3d>> pts;
    for (int k = 0; k < 20; ++k) pts.emplace_back(0.5, Eigen::Vector3d(1, 2, 3));
    CHECK_THROWS(fit_path_spline(pts));
    pts.clear();
    pts.emplace_back(0.1, Eigen::Vector3d::Zero());
    CHECK_THROWS(fit_path_spline(pts));
}

TEST_CASE("path closure and endpoint value") {
    Rng rng(9);
    PathSpline sp;
    for (int d = 0; d < 3; ++d)
        for (int i = 0; i < kSplineBasisCount; ++i) sp.coeffs(d, i) = 5.0 * (rng.uniform() - 0.5);
    const Eigen::Vector3d a = eval_path(sp, 0.0);
    const Eigen::Vector3d b = eval_path(sp, 1.0);
    CHECK((a - b).norm() == 0.0);
    CHECK((a - sp.coeffs.col(0)).norm() == 0.0);  // only the constant term survives
}

TEST_CASE("eval derivatives match finite differences at random tau") {
    Rng rng(13);
    PathSpline sp;
    for (int d = 0; d < 3; ++d)
        for (int i = 0; i < kSplineBasisCount; ++i) sp.coeffs(d, i) = 20.0 * (rng.uniform() - 0.5);
    for (int k = 0; k < 100; ++k) {
        const double tau = 0.01 + 0.98 * rng.uniform();
        const double eps = 1e-6;
        const Eigen::Vector3d fd =
            (eval_path(sp, tau + eps) - eval_path(sp, tau - eps)) / (2 * eps);
        const Eigen::Vector3d an = eval_path(sp, tau, 1);
        CHECK((an - fd).norm() / std::max(1.0, fd.norm()) < 1e-6);
    }
}
