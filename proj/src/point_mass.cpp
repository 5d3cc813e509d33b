#include "dsoar/point_mass.hpp"

#include <cmath>
#include <stdexcept>

namespace dsoar {

namespace {
constexpr double kGimbalMargin = 1e-3;  // [rad] away from +-pi/2

void check_state(const KinematicState &s) {
    const double values[6] = {s.x, s.y, s.z, s.v, s.gamma, s.psi};
    for (double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("point_mass: non-finite state");
    }
    if (s.v <= 0.0) throw std::invalid_argument("point_mass: airspeed must be > 0");
    if (std::abs(s.gamma) >= M_PI_2 - kGimbalMargin)
        throw std::invalid_argument("point_mass: glide path angle too close to +-pi/2");
}
}  // namespace

KinematicState point_mass_derivative(const KinematicState &s, const KinematicInput &u,
                                     const WindFieldParams &w, const AircraftParams &p) {
    check_state(s);
    const double state[6] = {s.x, s.y, s.z, s.v, s.gamma, s.psi};
    const double input[2] = {u.cl, u.mu};
    double deriv[6];
    point_mass_derivative_t(state, input, w, p, deriv);
    return {deriv[0], deriv[1], deriv[2], deriv[3], deriv[4], deriv[5]};
}

KinematicState point_mass_rk4_step(const KinematicState &s, const KinematicInput &u,
                                   const WindFieldParams &w, const AircraftParams &p, double dt) {
    auto add = [](const KinematicState &a, const KinematicState &b, double scale) {
        return KinematicState{a.x + scale * b.x,     a.y + scale * b.y,
                              a.z + scale * b.z,     a.v + scale * b.v,
                              a.gamma + scale * b.gamma, a.psi + scale * b.psi};
    };
    const KinematicState k1 = point_mass_derivative(s, u, w, p);
    const KinematicState k2 = point_mass_derivative(add(s, k1, dt / 2), u, w, p);
    const KinematicState k3 = point_mass_derivative(add(s, k2, dt / 2), u, w, p);
    const KinematicState k4 = point_mass_derivative(add(s, k3, dt), u, w, p);
    KinematicState out = s;
    out.x += dt / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
    out.y += dt / 6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y);
    out.z += dt / 6 * (k1.z + 2 * k2.z + 2 * k3.z + k4.z);
    out.v += dt / 6 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v);
    out.gamma += dt / 6 * (k1.gamma + 2 * k2.gamma + 2 * k3.gamma + k4.gamma);
    out.psi += dt / 6 * (k1.psi + 2 * k2.psi + 2 * k3.psi + k4.psi);
    return out;
}

}  // namespace dsoar
