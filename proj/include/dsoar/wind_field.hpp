#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "dsoar/config.hpp"
#include "dsoar/dual.hpp"

namespace dsoar {

/// Sigmoid wind-shear field with static bias. Horizontal components only;
/// the vertical component is identically zero.
///
///   w_x(z) = w0x * sigma(z) + bx,   sigma(z) = 1 / (1 + exp(-s (z - h)))
struct WindFieldParams {
    double w0x = 0.0;  ///< shear amplitude, east [m/s]
    double w0y = 0.0;  ///< shear amplitude, north [m/s]
    double bx = 0.0;   ///< static bias, east [m/s]
    double by = 0.0;   ///< static bias, north [m/s]
    double s = 0.3;    ///< sigmoid steepness [1/m], > 0
    double h = 0.0;    ///< shear-layer center altitude [m]

    void validate() const;

    static WindFieldParams from_config(Config &cfg, const std::string &section = "wind");
    void to_config(Config &cfg, const std::string &section = "wind") const;
};

/// Per-parameter standard deviations for scenario sampling. Bias sigmas
/// default to zero: sampled fields share the nominal static wind.
struct WindSigmas {
    double w0x = 1.0;
    double w0y = 0.0;
    double bx = 0.0;
    double by = 0.0;
    double s = 0.05;
    double h = 1.0;

    void validate() const;

    static WindSigmas from_config(Config &cfg, const std::string &section = "wind_sigmas");
};

/// Ordered scenario fields; index 0 is always the unperturbed nominal.
struct ScenarioSet {
    std::vector<WindFieldParams> fields;
    std::uint64_t seed = 0;
    WindSigmas sigmas;

    const WindFieldParams &nominal() const { return fields.front(); }
    int count() const { return static_cast<int>(fields.size()); }
};

/// Logistic shear factor in (0, 1), strictly increasing in z. Templated so
/// the optimizer can differentiate through it.
template <typename T>
T sigmoid_shear_t(const T &z, double s, double h) {
    return T(1.0) / (T(1.0) + exp(T(-s) * (z - T(h))));
}

double sigmoid_shear(double z, double s, double h);

/// Wind vector at altitude z (ENU). Horizontal only.
Eigen::Vector3d wind_at(const WindFieldParams &p, double z);

/// d(wind)/dz at altitude z. Vertical component zero.
Eigen::Vector3d wind_gradient(const WindFieldParams &p, double z);

/// Scalar-generic horizontal components, used by the templated dynamics.
template <typename T>
void wind_components_t(const WindFieldParams &p, const T &z, T &wx, T &wy) {
    const T f = sigmoid_shear_t(z, p.s, p.h);
    wx = T(p.w0x) * f + T(p.bx);
    wy = T(p.w0y) * f + T(p.by);
}

/// M i.i.d. Gaussian perturbations of the nominal field plus the nominal at
/// index 0. Steepness is floored at 0.01 1/m after sampling. Deterministic
/// for a fixed seed.
ScenarioSet sample_perturbed_fields(const WindFieldParams &nominal, const WindSigmas &sigmas,
                                    int count, std::uint64_t seed);

}  // namespace dsoar
