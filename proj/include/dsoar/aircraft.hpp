#pragma once

#include <Eigen/Core>
#include <stdexcept>

#include "dsoar/config.hpp"

namespace dsoar {

constexpr double kGravity = 9.81;  // [m/s^2]

/// Thrown when the air-relative velocity is too small to define the airflow
/// angles (or the dynamic pressure for allocation).
class SingularAirflowError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Lumped restoring/damping terms the bare control-surface moment model
/// lacks. Restoring moments scale with dynamic pressure, damping with
/// 0.5*rho*|v_air|*rate. All configurable; zero disables a term.
struct StabilityDerivs {
    double pitch_stiffness = 0.05;  ///< -q_bar * k * alpha on body y [m^3]
    double yaw_stiffness = 0.04;    ///< +q_bar * k * beta on body z [m^3]
    double roll_damping = 0.04;     ///< [m^4]
    double pitch_damping = 0.05;    ///< [m^4]
    double yaw_damping = 0.08;      ///< [m^4]
    double side_force = 0.12;       ///< -q_bar * k * beta on body y [m^2]
};

/// Airframe and aerodynamic constants. The default profile is a 1.35 kg
/// model glider; C_L1 is a conventional finite-wing lift slope because a
/// zero lift slope would make angle-of-attack inversion singular.
struct AircraftParams {
    double mass = 1.35;       ///< [kg]
    double wing_area = 0.4;   ///< [m^2]
    double rho = 1.225;       ///< [kg/m^3]
    double cl0 = 0.0;         ///< lift coefficient at zero alpha
    double cl1 = 5.7;         ///< lift slope [1/rad]
    double cd0 = 0.0169;      ///< drag polynomial constant
    double cd1 = -0.0940;     ///< drag polynomial linear term [1/rad]
    double cd2 = 0.3580;      ///< drag polynomial quadratic term [1/rad^2]
    double k_ail = 0.04;      ///< aileron moment effectiveness [m^3/rad]
    double k_ele = 0.03;      ///< elevator moment effectiveness [m^3/rad]
    double k_rud = 0.02;      ///< rudder moment effectiveness [m^3/rad]
    Eigen::Vector3d inertia_diag{0.08, 0.05, 0.11};  ///< body FRD [kg m^2]
    double ail_limit = 0.44;  ///< symmetric deflection limit [rad]
    double ele_limit = 0.44;  ///< [rad]
    double rud_limit = 0.44;  ///< [rad]
    double stall_alpha = 0.2618;  ///< |alpha| beyond this is flagged [rad]
    StabilityDerivs stab;

    Eigen::Matrix3d inertia() const { return inertia_diag.asDiagonal(); }
    double weight() const { return mass * kGravity; }
    void validate() const;

    static AircraftParams from_config(Config &cfg, const std::string &section = "aircraft");
};

/// Aileron/elevator/rudder deflections [rad].
struct SurfaceDeflections {
    double ail = 0.0;
    double ele = 0.0;
    double rud = 0.0;

    SurfaceDeflections clamped(const AircraftParams &p) const;
};

struct LiftDrag {
    double cl = 0.0;
    double cd = 0.0;
    bool beyond_stall = false;  ///< alpha outside the configured linear range
};

/// Linear lift / quadratic drag polynomial. Flags (does not clamp) alpha
/// outside the stall range; callers decide whether to clamp or reject.
LiftDrag lift_drag_coeffs(double alpha, const AircraftParams &p);

/// Angle of attack from body-frame air velocity: atan2(w, u).
double angle_of_attack(const Eigen::Vector3d &v_air_body);
/// Sideslip angle: asin(v / |v_air|).
double sideslip(const Eigen::Vector3d &v_air_body);

/// Aerodynamic force in the body FRD frame,
///   f = -0.5 rho |v|^2 A R_ba [C_D, 0, C_L]^T,
/// where R_ba pitches the aero frame onto the body by alpha. Throws
/// SingularAirflowError below 0.1 m/s.
Eigen::Vector3d aero_force_body(const Eigen::Vector3d &v_air_body, const AircraftParams &p);

/// Control-surface moment, 0.5 rho |v|^2 [k_ail d_ail, k_ele d_ele, k_rud d_rud].
Eigen::Vector3d control_moment(double v_air_norm, const SurfaceDeflections &d,
                               const AircraftParams &p);

/// Restoring + damping moments of the bare airframe (unmodelled by the
/// controller; the plant applies them).
Eigen::Vector3d stability_moment(const Eigen::Vector3d &v_air_body, const Eigen::Vector3d &omega,
                                 const AircraftParams &p);

/// Sideslip-proportional side force (the plant-side term that makes turn
/// coordination observable).
Eigen::Vector3d stability_side_force(const Eigen::Vector3d &v_air_body, const AircraftParams &p);

/// Mass-specific mechanical energy, g z + V^2 / 2 [J/kg].
double specific_energy(double v_air, double z);

}  // namespace dsoar
