#include "dsoar/aircraft.hpp"

#include <algorithm>
#include <cmath>

namespace dsoar {

void AircraftParams::validate() const {
    if (!(mass > 0.0)) throw std::invalid_argument("aircraft mass must be > 0");
    if (!(wing_area > 0.0)) throw std::invalid_argument("wing area must be > 0");
    if (!(rho > 0.0)) throw std::invalid_argument("air density must be > 0");
    if (!(cd2 >= 0.0)) throw std::invalid_argument("cd2 must be >= 0");
    if (!(cl1 > 0.0)) throw std::invalid_argument("cl1 must be > 0");
    if (!(inertia_diag.minCoeff() > 0.0)) throw std::invalid_argument("inertia must be positive definite");
}

AircraftParams AircraftParams::from_config(Config &cfg, const std::string &section) {
    AircraftParams p;
    p.mass = cfg.get_or(section + ".mass_kg", p.mass);
    p.wing_area = cfg.get_or(section + ".wing_area_m2", p.wing_area);
    p.rho = cfg.get_or(section + ".air_density_kgm3", p.rho);
    p.cl0 = cfg.get_or(section + ".cl0", p.cl0);
    p.cl1 = cfg.get_or(section + ".cl1_per_rad", p.cl1);
    p.cd0 = cfg.get_or(section + ".cd0", p.cd0);
    p.cd1 = cfg.get_or(section + ".cd1_per_rad", p.cd1);
    p.cd2 = cfg.get_or(section + ".cd2_per_rad2", p.cd2);
    p.k_ail = cfg.get_or(section + ".k_ail_m3", p.k_ail);
    p.k_ele = cfg.get_or(section + ".k_ele_m3", p.k_ele);
    p.k_rud = cfg.get_or(section + ".k_rud_m3", p.k_rud);
    p.inertia_diag.x() = cfg.get_or(section + ".inertia_xx_kgm2", p.inertia_diag.x());
    p.inertia_diag.y() = cfg.get_or(section + ".inertia_yy_kgm2", p.inertia_diag.y());
    p.inertia_diag.z() = cfg.get_or(section + ".inertia_zz_kgm2", p.inertia_diag.z());
    p.ail_limit = cfg.get_or(section + ".ail_limit_rad", p.ail_limit);
    p.ele_limit = cfg.get_or(section + ".ele_limit_rad", p.ele_limit);
    p.rud_limit = cfg.get_or(section + ".rud_limit_rad", p.rud_limit);
    p.stall_alpha = cfg.get_or(section + ".stall_alpha_rad", p.stall_alpha);
    p.stab.pitch_stiffness = cfg.get_or(section + ".stab_pitch_stiffness_m3", p.stab.pitch_stiffness);
    p.stab.yaw_stiffness = cfg.get_or(section + ".stab_yaw_stiffness_m3", p.stab.yaw_stiffness);
    p.stab.roll_damping = cfg.get_or(section + ".stab_roll_damping_m4", p.stab.roll_damping);
    p.stab.pitch_damping = cfg.get_or(section + ".stab_pitch_damping_m4", p.stab.pitch_damping);
    p.stab.yaw_damping = cfg.get_or(section + ".stab_yaw_damping_m4", p.stab.yaw_damping);
    p.stab.side_force = cfg.get_or(section + ".stab_side_force_m2", p.stab.side_force);
    p.validate();
    return p;
}

SurfaceDeflections SurfaceDeflections::clamped(const AircraftParams &p) const {
    return {std::clamp(ail, -p.ail_limit, p.ail_limit), std::clamp(ele, -p.ele_limit, p.ele_limit),
            std::clamp(rud, -p.rud_limit, p.rud_limit)};
}

LiftDrag lift_drag_coeffs(double alpha, const AircraftParams &p) {
    if (!std::isfinite(alpha)) throw std::invalid_argument("lift_drag_coeffs: non-finite alpha");
    LiftDrag out;
    out.cl = p.cl0 + p.cl1 * alpha;
    out.cd = p.cd0 + p.cd1 * alpha + p.cd2 * alpha * alpha;
    out.beyond_stall = std::abs(alpha) > p.stall_alpha;
    return out;
}

double angle_of_attack(const Eigen::Vector3d &v_air_body) {
    return std::atan2(v_air_body.z(), v_air_body.x());
}

double sideslip(const Eigen::Vector3d &v_air_body) {
    const double n = v_air_body.norm();
    if (n < 1e-9) return 0.0;
    return std::asin(std::clamp(v_air_body.y() / n, -1.0, 1.0));
}

Eigen::Vector3d aero_force_body(const Eigen::Vector3d &v_air_body, const AircraftParams &p) {
    if (!v_air_body.allFinite()) throw std::invalid_argument("aero_force_body: non-finite air velocity");
    const double v = v_air_body.norm();
    if (v <= 0.1) throw SingularAirflowError("aero_force_body: air speed below 0.1 m/s");

    const double alpha = angle_of_attack(v_air_body);
    const LiftDrag cc = lift_drag_coeffs(alpha, p);
    const double q_bar_area = 0.5 * p.rho * v * v * p.wing_area;

    const double ca = std::cos(alpha);
    const double sa = std::sin(alpha);
    // R_ba * [C_D, 0, C_L]: aero x along the in-plane airflow direction.
    const Eigen::Vector3d coeffs_body{ca * cc.cd - sa * cc.cl, 0.0, sa * cc.cd + ca * cc.cl};
    return -q_bar_area * coeffs_body;
}

Eigen::Vector3d control_moment(double v_air_norm, const SurfaceDeflections &d,
                               const AircraftParams &p) {
    if (!std::isfinite(v_air_norm) || v_air_norm < 0.0)
        throw std::invalid_argument("control_moment: bad air speed");
    const double q_bar = 0.5 * p.rho * v_air_norm * v_air_norm;
    return {q_bar * p.k_ail * d.ail, q_bar * p.k_ele * d.ele, q_bar * p.k_rud * d.rud};
}

Eigen::Vector3d stability_moment(const Eigen::Vector3d &v_air_body, const Eigen::Vector3d &omega,
                                 const AircraftParams &p) {
    const double v = v_air_body.norm();
    if (v < 0.1) return Eigen::Vector3d::Zero();
    const double q_bar = 0.5 * p.rho * v * v;
    const double damp = 0.5 * p.rho * v;
    const double alpha = angle_of_attack(v_air_body);
    const double beta = sideslip(v_air_body);
    return {-damp * p.stab.roll_damping * omega.x(),
            -q_bar * p.stab.pitch_stiffness * alpha - damp * p.stab.pitch_damping * omega.y(),
            q_bar * p.stab.yaw_stiffness * beta - damp * p.stab.yaw_damping * omega.z()};
}

Eigen::Vector3d stability_side_force(const Eigen::Vector3d &v_air_body, const AircraftParams &p) {
    const double v = v_air_body.norm();
    if (v < 0.1) return Eigen::Vector3d::Zero();
    const double q_bar = 0.5 * p.rho * v * v;
    return {0.0, -q_bar * p.stab.side_force * sideslip(v_air_body), 0.0};
}

double specific_energy(double v_air, double z) { return kGravity * z + 0.5 * v_air * v_air; }

}  // namespace dsoar
