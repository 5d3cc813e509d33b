#include "dsoar/wind_field.hpp"

#include <cmath>
#include <stdexcept>

#include "dsoar/rng.hpp"

namespace dsoar {

namespace {
constexpr double kSteepnessFloor = 0.01;  // [1/m]

void require_finite(double v, const char *name) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string("non-finite wind parameter: ") + name);
}
}  // namespace

void WindFieldParams::validate() const {
    require_finite(w0x, "w0x");
    require_finite(w0y, "w0y");
    require_finite(bx, "bx");
    require_finite(by, "by");
    require_finite(s, "s");
    require_finite(h, "h");
    if (s <= 0.0) throw std::invalid_argument("wind steepness s must be > 0");
}

WindFieldParams WindFieldParams::from_config(Config &cfg, const std::string &section) {
    WindFieldParams p;
    p.w0x = cfg.get_or(section + ".w0x_mps", p.w0x);
    p.w0y = cfg.get_or(section + ".w0y_mps", p.w0y);
    p.bx = cfg.get_or(section + ".bias_x_mps", p.bx);
    p.by = cfg.get_or(section + ".bias_y_mps", p.by);
    p.s = cfg.get_or(section + ".steepness_per_m", p.s);
    p.h = cfg.get_or(section + ".layer_center_m", p.h);
    p.validate();
    return p;
}

void WindFieldParams::to_config(Config &cfg, const std::string &section) const {
    cfg.set_double(section + ".w0x_mps", w0x);
    cfg.set_double(section + ".w0y_mps", w0y);
    cfg.set_double(section + ".bias_x_mps", bx);
    cfg.set_double(section + ".bias_y_mps", by);
    cfg.set_double(section + ".steepness_per_m", s);
    cfg.set_double(section + ".layer_center_m", h);
}

void WindSigmas::validate() const {
    for (double v : {w0x, w0y, bx, by, s, h}) {
        if (!std::isfinite(v) || v < 0.0)
            throw std::invalid_argument("wind sigmas must be finite and non-negative");
    }
}

WindSigmas WindSigmas::from_config(Config &cfg, const std::string &section) {
    WindSigmas sig;
    sig.w0x = cfg.get_or(section + ".w0x_mps", sig.w0x);
    sig.w0y = cfg.get_or(section + ".w0y_mps", sig.w0y);
    sig.bx = cfg.get_or(section + ".bias_x_mps", sig.bx);
    sig.by = cfg.get_or(section + ".bias_y_mps", sig.by);
    sig.s = cfg.get_or(section + ".steepness_per_m", sig.s);
    sig.h = cfg.get_or(section + ".layer_center_m", sig.h);
    sig.validate();
    return sig;
}

double sigmoid_shear(double z, double s, double h) {
    if (!std::isfinite(z) || !std::isfinite(s) || !std::isfinite(h))
        throw std::invalid_argument("sigmoid_shear: non-finite input");
    if (s <= 0.0) throw std::invalid_argument("sigmoid_shear: steepness must be > 0");
    return sigmoid_shear_t(z, s, h);
}

Eigen::Vector3d wind_at(const WindFieldParams &p, double z) {
    p.validate();
    if (!std::isfinite(z)) throw std::invalid_argument("wind_at: non-finite altitude");
    const double f = sigmoid_shear_t(z, p.s, p.h);
    return {p.w0x * f + p.bx, p.w0y * f + p.by, 0.0};
}

Eigen::Vector3d wind_gradient(const WindFieldParams &p, double z) {
    p.validate();
    if (!std::isfinite(z)) throw std::invalid_argument("wind_gradient: non-finite altitude");
    const double f = sigmoid_shear_t(z, p.s, p.h);
    const double df = p.s * f * (1.0 - f);
    return {p.w0x * df, p.w0y * df, 0.0};
}

ScenarioSet sample_perturbed_fields(const WindFieldParams &nominal, const WindSigmas &sigmas,
                                    int count, std::uint64_t seed) {
    nominal.validate();
    sigmas.validate();
    if (count < 0) throw std::invalid_argument("sample_perturbed_fields: count must be >= 0");

    ScenarioSet set;
    set.seed = seed;
    set.sigmas = sigmas;
    set.fields.reserve(static_cast<std::size_t>(count) + 1);
    set.fields.push_back(nominal);

    Rng rng = Rng::substream(seed, "wind-scenarios");
    for (int j = 0; j < count; ++j) {
        WindFieldParams p = nominal;
        p.w0x += sigmas.w0x * rng.normal();
        p.w0y += sigmas.w0y * rng.normal();
        p.bx += sigmas.bx * rng.normal();
        p.by += sigmas.by * rng.normal();
        p.s += sigmas.s * rng.normal();
        p.h += sigmas.h * rng.normal();
        p.s = std::max(p.s, kSteepnessFloor);
        set.fields.push_back(p);
    }
    return set;
}

}  // namespace dsoar
