#include "dsoar/spline.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace dsoar {

namespace {
constexpr double kBumpSharpness = 30.0;

void check_domain(int i, double tau) {
    if (i < 0 || i >= kSplineBasisCount)
        throw std::invalid_argument("basis_function: index out of range");
    if (!std::isfinite(tau) || tau < 0.0 || tau > 1.0)
        throw std::invalid_argument("basis_function: tau must lie in [0, 1]");
}
}  // namespace

double basis_function(int i, double tau) { return basis_derivative(i, tau, 0); }

double basis_derivative(int i, double tau, int order) {
    check_domain(i, tau);
    if (order < 0 || order > 2) throw std::invalid_argument("basis_derivative: order must be 0..2");
    if (i == 0) return order == 0 ? 1.0 : 0.0;
    // The sine window vanishes identically at both ends; IEEE sin(pi) does
    // not, so pin the endpoint values to keep closure exact.
    if (order == 0 && (tau == 0.0 || tau == 1.0)) return 0.0;

    const double c = static_cast<double>(i) / kSplineBasisCount;
    const double u = tau - c;
    const double g = std::exp(-kBumpSharpness * u * u);
    const double dg = -2.0 * kBumpSharpness * u * g;
    const double ddg = (-2.0 * kBumpSharpness + 4.0 * kBumpSharpness * kBumpSharpness * u * u) * g;
    const double f = std::sin(M_PI * tau);
    const double df = M_PI * std::cos(M_PI * tau);
    const double ddf = -M_PI * M_PI * f;

    switch (order) {
        case 0: return f * g;
        case 1: return df * g + f * dg;
        default: return ddf * g + 2.0 * df * dg + f * ddg;
    }
}

SplineFit fit_path_spline(const std::vector<std::pair<double, Eigen::Vector3d>> &points,
                          double max_condition) {
    const int n = static_cast<int>(points.size());
    if (n < kSplineBasisCount)
        throw std::invalid_argument("fit_path_spline: need at least 16 samples");

    Eigen::MatrixXd design(n, kSplineBasisCount);
    Eigen::MatrixXd rhs(n, 3);
    for (int k = 0; k < n; ++k) {
        const double tau = points[k].first;
        for (int i = 0; i < kSplineBasisCount; ++i) design(k, i) = basis_function(i, tau);
        rhs.row(k) = points[k].second.transpose();
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto &sv = svd.singularValues();
    const double cond = sv(0) / std::max(sv(sv.size() - 1), 1e-300);
    if (!(cond < max_condition))
        throw std::runtime_error("fit_path_spline: rank-deficient or ill-conditioned samples");

    SplineFit out;
    const Eigen::MatrixXd sol = svd.solve(rhs);  // 16 x 3
    out.spline.coeffs = sol.transpose();
    out.condition = cond;
    out.residual_rms = std::sqrt((design * sol - rhs).squaredNorm() / (3.0 * n));
    return out;
}

Eigen::Vector3d eval_path(const PathSpline &spline, double tau, int order) {
    Eigen::Matrix<double, kSplineBasisCount, 1> phi;
    for (int i = 0; i < kSplineBasisCount; ++i) phi[i] = basis_derivative(i, tau, order);
    return spline.coeffs * phi;
}

}  // namespace dsoar
