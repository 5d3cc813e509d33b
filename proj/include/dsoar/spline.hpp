#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "dsoar/wind_field.hpp"

namespace dsoar {

constexpr int kSplineBasisCount = 16;

/// Basis over tau in [0, 1]: a constant term plus 15 sine-windowed Gaussian
/// bumps centered at i/16. Every non-constant function vanishes at both
/// endpoints, so any coefficient set describes a closed cycle.
double basis_function(int i, double tau);
/// d^order/dtau^order of basis_function, order in {0, 1, 2}.
double basis_derivative(int i, double tau, int order);

/// Closed spatial path: one 16-coefficient expansion per ENU dimension plus
/// the conditions it was optimized for.
struct PathSpline {
    Eigen::Matrix<double, 3, kSplineBasisCount> coeffs =
        Eigen::Matrix<double, 3, kSplineBasisCount>::Zero();
    WindFieldParams design_wind;  ///< nominal field the path was built for
    double design_airspeed = 0.0; ///< airspeed at tau = 0 [m/s]
};

struct SplineFit {
    PathSpline spline;
    double residual_rms = 0.0;   ///< [m]
    double condition = 0.0;      ///< design-matrix condition estimate
};

/// Per-dimension least squares of sampled points onto the basis. Requires at
/// least 16 samples with distinct tau and a design matrix whose condition
/// number stays below max_condition.
SplineFit fit_path_spline(const std::vector<std::pair<double, Eigen::Vector3d>> &points,
                          double max_condition = 1e10);

/// Position (order 0) or tau-derivative (order 1, 2) of the path.
Eigen::Vector3d eval_path(const PathSpline &spline, double tau, int order = 0);

}  // namespace dsoar
