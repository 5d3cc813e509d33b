#pragma once

#include <Eigen/Core>

#include "dsoar/aircraft.hpp"
#include "dsoar/dual.hpp"
#include "dsoar/wind_field.hpp"

namespace dsoar {

/// 3-DOF point-mass state for trajectory optimization. V, gamma, psi
/// describe the air-relative velocity: magnitude, climb angle, heading.
struct KinematicState {
    double x = 0.0;      ///< east [m]
    double y = 0.0;      ///< north [m]
    double z = 0.0;      ///< up [m]
    double v = 15.0;     ///< airspeed [m/s]
    double gamma = 0.0;  ///< glide path angle [rad]
    double psi = 0.0;    ///< air-relative heading [rad]

    Eigen::Matrix<double, 6, 1> to_vector() const {
        Eigen::Matrix<double, 6, 1> out;
        out << x, y, z, v, gamma, psi;
        return out;
    }
    static KinematicState from_vector(const Eigen::Matrix<double, 6, 1> &in) {
        return {in[0], in[1], in[2], in[3], in[4], in[5]};
    }
};

/// Point-mass control: lift coefficient and bank angle.
struct KinematicInput {
    double cl = 0.5;  ///< lift coefficient
    double mu = 0.0;  ///< bank angle [rad]
};

/// Glider-in-shear point-mass dynamics, scalar-generic so the optimizer can
/// differentiate through one shared implementation.
///
/// state  = [x, y, z, V, gamma, psi]
/// input  = [C_L, mu]
/// The wind-gradient coupling enters through w_dot = (dw/dz) V sin(gamma).
template <typename T>
void point_mass_derivative_t(const T state[6], const T input[2], const WindFieldParams &w,
                             const AircraftParams &p, T deriv[6]) {
    const T &z = state[2];
    const T &v = state[3];
    const T &gamma = state[4];
    const T &psi = state[5];
    const T &cl = input[0];
    const T &mu = input[1];

    const T sg = sin(gamma);
    const T cg = cos(gamma);
    const T sp = sin(psi);
    const T cp = cos(psi);

    T wx, wy;
    wind_components_t(w, z, wx, wy);

    // Vertical rate and the induced wind rate seen by the climbing aircraft.
    const T z_dot = v * sg;
    const T f = sigmoid_shear_t(z, w.s, w.h);
    const T df = T(w.s) * f * (T(1.0) - f);
    const T wx_dot = T(w.w0x) * df * z_dot;
    const T wy_dot = T(w.w0y) * df * z_dot;

    const T alpha = (cl - T(p.cl0)) / T(p.cl1);
    const T cd = T(p.cd0) + T(p.cd1) * alpha + T(p.cd2) * alpha * alpha;
    const T q_bar_area = T(0.5 * p.rho * p.wing_area) * v * v;
    const T lift = q_bar_area * cl;
    const T drag = q_bar_area * cd;
    const T inv_m = T(1.0 / p.mass);

    deriv[0] = v * cg * cp + wx;
    deriv[1] = v * cg * sp + wy;
    deriv[2] = z_dot;
    deriv[3] = -drag * inv_m - T(kGravity) * sg - (wx_dot * cg * cp + wy_dot * cg * sp);
    deriv[4] = (lift * cos(mu) * inv_m - T(kGravity) * cg + (wx_dot * sg * cp + wy_dot * sg * sp)) / v;
    deriv[5] = (lift * sin(mu) * inv_m + (wx_dot * sp - wy_dot * cp)) / (v * cg);
}

/// Validating double-precision wrapper. Rejects V <= 0 and |gamma| within
/// 1 mrad of +-pi/2 (heading becomes undefined there).
KinematicState point_mass_derivative(const KinematicState &s, const KinematicInput &u,
                                     const WindFieldParams &w, const AircraftParams &p);

/// Fixed-step RK4 integration of the point-mass model with an input held
/// constant over the step. Used by tests and solution replay.
KinematicState point_mass_rk4_step(const KinematicState &s, const KinematicInput &u,
                                   const WindFieldParams &w, const AircraftParams &p, double dt);

}  // namespace dsoar
