#include "dsoar/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dsoar {

ControllerGains ControllerGains::from_config(Config &cfg, const std::string &sec) {
    ControllerGains g;
    g.kp_pos = cfg.get_or(sec + ".kp_pos_per_s2", g.kp_pos);
    g.kp_att.x() = cfg.get_or(sec + ".kp_att_roll", g.kp_att.x());
    g.kp_att.y() = cfg.get_or(sec + ".kp_att_pitch", g.kp_att.y());
    g.kp_att.z() = cfg.get_or(sec + ".kp_att_yaw", g.kp_att.z());
    g.kd_att.x() = cfg.get_or(sec + ".kd_att_roll", g.kd_att.x());
    g.kd_att.y() = cfg.get_or(sec + ".kd_att_pitch", g.kd_att.y());
    g.kd_att.z() = cfg.get_or(sec + ".kd_att_yaw", g.kd_att.z());
    g.k_ff_rud = cfg.get_or(sec + ".k_ff_rud", g.k_ff_rud);
    g.k_p_rud = cfg.get_or(sec + ".k_p_rud", g.k_p_rud);
    g.rud_ref_airspeed = cfg.get_or(sec + ".rud_ref_airspeed_mps", g.rud_ref_airspeed);
    g.rud_beta_gain = cfg.get_or(sec + ".rud_beta_gain", g.rud_beta_gain);
    g.rud_blend_tau = cfg.get_or(sec + ".rud_blend_tau_s", g.rud_blend_tau);
    g.lpf_pos_hz = cfg.get_or(sec + ".lpf_pos_hz", g.lpf_pos_hz);
    g.lpf_rate_hz = cfg.get_or(sec + ".lpf_rate_hz", g.lpf_rate_hz);
    g.servo_tau = cfg.get_or(sec + ".servo_tau_s", g.servo_tau);
    return g;
}

PathReference closest_point_on_path(const PathSpline &spline, const Eigen::Vector3d &r,
                                    double tau_prev, double inertial_speed) {
    auto wrap = [](double tau) {
        double t = std::fmod(tau, 1.0);
        return t < 0.0 ? t + 1.0 : t;
    };
    auto dist2 = [&](double tau) { return (eval_path(spline, wrap(tau)) - r).squaredNorm(); };

    // Coarse scan of 64 points around the previous parameter; a strictly
    // better candidate is required to move off tau_prev (continuity on ties).
    const int samples = 64;
    double best_tau = wrap(tau_prev);
    double best_d2 = dist2(best_tau);
    for (int k = 0; k < samples; ++k) {
        const double tau = wrap(tau_prev - 0.5 + static_cast<double>(k) / samples);
        const double d2 = dist2(tau);
        if (d2 < best_d2 - 1e-12) {
            best_d2 = d2;
            best_tau = tau;
        }
    }

    // Newton refinement on g(tau) = |p(tau) - r|^2.
    double tau = best_tau;
    for (int it = 0; it < 12; ++it) {
        const double tw = wrap(tau);
        const Eigen::Vector3d p = eval_path(spline, tw);
        const Eigen::Vector3d d1 = eval_path(spline, tw, 1);
        const Eigen::Vector3d d2v = eval_path(spline, tw, 2);
        const Eigen::Vector3d e = p - r;
        const double g1 = 2.0 * e.dot(d1);
        const double g2 = 2.0 * (d1.squaredNorm() + e.dot(d2v));
        if (std::abs(g2) < 1e-12) break;
        double step = -g1 / g2;
        if (g2 < 0.0) step = std::clamp(-g1 * 1e-3, -0.25 / samples, 0.25 / samples);
        step = std::clamp(step, -2.0 / samples, 2.0 / samples);
        const double cand = tau + step;
        if (dist2(cand) <= dist2(tau) + 1e-15) {
            tau = cand;
        } else {
            break;
        }
        if (std::abs(step) < 1e-12) break;
    }
    if (dist2(tau) > best_d2) tau = best_tau;  // Newton must not lose to the scan

    PathReference ref;
    // Keep tau continuous with tau_prev (no wrap into [0,1)) so callers can
    // detect cycle completion from the raw value.
    ref.tau = tau;
    const double tw = wrap(tau);
    ref.r = eval_path(spline, tw);
    const Eigen::Vector3d d1 = eval_path(spline, tw, 1);
    const Eigen::Vector3d d2v = eval_path(spline, tw, 2);
    ref.distance = (ref.r - r).norm();

    const double d1n = std::max(d1.norm(), 1e-6);
    const double tau_rate = inertial_speed / d1n;
    // Constant-speed chain rule: cancel the tangential acceleration.
    const double tau_acc = -d1.dot(d2v) * tau_rate * tau_rate / (d1n * d1n);
    ref.dr = d1 * tau_rate;
    ref.ddr = d2v * tau_rate * tau_rate + d1 * tau_acc;
    return ref;
}

Eigen::Vector3d position_outer_loop(const PathReference &ref, const Eigen::Vector3d &r,
                                    const Eigen::Vector3d &dr, const Eigen::Vector3d &ddr_lpf,
                                    const Eigen::Vector3d &f_model_lpf, const ControllerGains &g,
                                    double mass, bool increments_enabled) {
    const Eigen::Vector3d accel_cmd =
        g.kp_pos * (ref.r - r) + g.kd_pos() * (ref.dr - dr) + ref.ddr;
    if (!increments_enabled)
        return mass * (accel_cmd - Eigen::Vector3d(0.0, 0.0, -kGravity));
    return mass * (accel_cmd - ddr_lpf) + f_model_lpf;
}

ForceSplit decompose_reference_force(const Eigen::Vector3d &f_ref,
                                     const Eigen::Vector3d &v_air_ref) {
    const double v2 = v_air_ref.squaredNorm();
    if (v2 <= 0.01) throw SingularAirflowError("decompose_reference_force: degenerate air velocity");
    ForceSplit out;
    out.drag = f_ref.dot(v_air_ref) / v2 * v_air_ref;
    out.lift = f_ref - out.drag;
    return out;
}

AttitudeCommand attitude_from_lift(const Eigen::Vector3d &f_lift, const Eigen::Vector3d &v_air_ref,
                                   const AircraftParams &p, const Eigen::Vector3d *last_lift_dir) {
    const double v = v_air_ref.norm();
    if (v <= 0.1) throw SingularAirflowError("attitude_from_lift: degenerate air velocity");
    if (p.cl1 == 0.0) throw std::invalid_argument("attitude_from_lift: zero lift slope");

    AttitudeCommand out;
    const double lift_floor = 0.05 * p.weight();
    double lift_norm = f_lift.norm();
    Eigen::Vector3d lift_dir;
    if (lift_norm < lift_floor) {
        out.lift_degenerate = true;
        lift_dir = (last_lift_dir != nullptr && last_lift_dir->norm() > 1e-9)
                       ? last_lift_dir->normalized()
                       : Eigen::Vector3d(0.0, 0.0, 1.0);
        lift_norm = p.weight();  // command 1-g trim lift
    } else {
        lift_dir = f_lift / lift_norm;
    }

    // Orthogonalize the lift direction against the airflow.
    const Eigen::Vector3d x0 = v_air_ref / v;
    Eigen::Vector3d lift_perp = lift_dir - lift_dir.dot(x0) * x0;
    if (lift_perp.norm() < 1e-9) {
        // Lift demand parallel to the flow: pick any perpendicular up-ish axis.
        lift_perp = Eigen::Vector3d(0.0, 0.0, 1.0) - x0.z() * x0;
        if (lift_perp.norm() < 1e-9) lift_perp = Eigen::Vector3d(1.0, 0.0, 0.0) - x0.x() * x0;
    }
    lift_perp.normalize();

    // Zero-alpha frame: x along the airflow, z opposing the lift.
    Eigen::Matrix3d r_ib0;
    r_ib0.col(0) = x0;
    r_ib0.col(2) = -lift_perp;
    r_ib0.col(1) = r_ib0.col(2).cross(r_ib0.col(0));

    const double q_bar_area = 0.5 * p.rho * v * v * p.wing_area;
    const double cl_req = lift_norm / q_bar_area;
    double alpha = (cl_req - p.cl0) / p.cl1;
    if (std::abs(alpha) > p.stall_alpha) {
        alpha = std::clamp(alpha, -p.stall_alpha, p.stall_alpha);
        out.alpha_saturated = true;
    }
    out.alpha = alpha;

    // Pitch the zero-AoA frame up by alpha: body x tilts away from the
    // airflow toward -z_B0, so the flow arrives from below at +alpha.
    Eigen::Matrix3d r_alpha;
    const double ca = std::cos(alpha);
    const double sa = std::sin(alpha);
    r_alpha << ca, 0.0, sa, 0.0, 1.0, 0.0, -sa, 0.0, ca;
    out.r_ib = r_ib0 * r_alpha;
    return out;
}

Eigen::Vector3d attitude_error_vector(const Eigen::Quaterniond &q, const Eigen::Quaterniond &q_c) {
    Eigen::Quaterniond q_e = q.conjugate() * q_c;
    if (q_e.w() < 0.0) q_e.coeffs() *= -1.0;  // shortest rotation
    const double w = std::clamp(q_e.w(), -1.0, 1.0);
    const Eigen::Vector3d vec(q_e.x(), q_e.y(), q_e.z());
    const double vn = vec.norm();
    if (vn < 1e-9) return 2.0 * vec;  // series limit near identity
    const double angle = 2.0 * std::acos(w);
    return angle / vn * vec;
}

Eigen::Vector3d attitude_inner_loop(const Eigen::Vector3d &zeta, const Eigen::Vector3d &omega_ref,
                                    const Eigen::Vector3d &omega_dot_ref,
                                    const Eigen::Vector3d &omega,
                                    const Eigen::Vector3d &omega_dot_lpf,
                                    const Eigen::Vector3d &m_model_lpf, const ControllerGains &g,
                                    const Eigen::Vector3d &inertia_diag) {
    const Eigen::Vector3d omega_dot_cmd = g.kp_att.cwiseProduct(zeta) +
                                          g.kd_att.cwiseProduct(omega_ref - omega) + omega_dot_ref;
    return inertia_diag.cwiseProduct(omega_dot_cmd - omega_dot_lpf) + m_model_lpf;
}

AllocationResult allocate_control_surfaces(const Eigen::Vector3d &m_c, double v_air_norm,
                                           const AircraftParams &p) {
    if (v_air_norm < 1.0)
        throw SingularAirflowError("allocate_control_surfaces: dynamic pressure too low");
    const double q_bar = 0.5 * p.rho * v_air_norm * v_air_norm;
    AllocationResult out;
    const double ail = m_c.x() / (q_bar * p.k_ail);
    const double ele = m_c.y() / (q_bar * p.k_ele);
    out.deflections.ail = std::clamp(ail, -p.ail_limit, p.ail_limit);
    out.deflections.ele = std::clamp(ele, -p.ele_limit, p.ele_limit);
    out.ail_saturated = ail != out.deflections.ail;
    out.ele_saturated = ele != out.deflections.ele;
    return out;
}

double turn_coordination(double v_air, double a_lat, double r, double z_cas,
                         const ControllerGains &g, TurnCoordinationState &state, double dt) {
    if (v_air < 1.0) return 0.0;
    const double r_target = r - g.rud_beta_gain * a_lat / std::max(v_air, 5.0);
    if (!state.initialized) {
        state.r_star = r_target;
        state.initialized = true;
    } else {
        const double blend = std::clamp(dt / std::max(g.rud_blend_tau, 1e-3), 0.0, 1.0);
        state.r_star += blend * (r_target - state.r_star);
    }
    const double scale_speed = std::max(z_cas, 5.0);
    const double scale = (g.rud_ref_airspeed * g.rud_ref_airspeed) / (scale_speed * scale_speed);
    return scale * (g.k_ff_rud * state.r_star + g.k_p_rud * (state.r_star - r));
}

AttitudeCommand attitude_on_path(const PathSpline &spline, double tau, double inertial_speed,
                                 const Eigen::Vector3d &wind, const AircraftParams &p) {
    double tw = std::fmod(tau, 1.0);
    if (tw < 0.0) tw += 1.0;
    const Eigen::Vector3d d1 = eval_path(spline, tw, 1);
    const Eigen::Vector3d d2 = eval_path(spline, tw, 2);
    const double d1n = std::max(d1.norm(), 1e-6);
    const double tau_rate = inertial_speed / d1n;
    const double tau_acc = -d1.dot(d2) * tau_rate * tau_rate / (d1n * d1n);
    const Eigen::Vector3d dr = d1 * tau_rate;
    const Eigen::Vector3d ddr = d2 * tau_rate * tau_rate + d1 * tau_acc;

    const Eigen::Vector3d f_ref = p.mass * (ddr - Eigen::Vector3d(0.0, 0.0, -kGravity));
    const Eigen::Vector3d v_air_ref = dr - wind;
    const ForceSplit split = decompose_reference_force(f_ref, v_air_ref);
    return attitude_from_lift(split.lift, v_air_ref, p);
}

// ---------------------------------------------------------------------------

template <typename T>
void PathFollowingController::Lpf2<T>::configure(double cutoff_hz, double sample_hz) {
    const double k = std::tan(M_PI * cutoff_hz / sample_hz);
    const double q = std::sqrt(2.0);
    const double norm = 1.0 / (1.0 + k * q + k * k);
    b0 = k * k * norm;
    b1 = 2.0 * b0;
    b2 = b0;
    a1 = 2.0 * (k * k - 1.0) * norm;
    a2 = (1.0 - k * q + k * k) * norm;
    const double tau_samples = sample_hz / (2.0 * M_PI * cutoff_hz);
    warm_after = static_cast<int>(std::ceil(3.0 * tau_samples));
    samples = 0;
    primed = false;
}

template <typename T>
T PathFollowingController::Lpf2<T>::step(const T &in) {
    if (!primed) {
        x1 = x2 = y1 = y2 = in;
        primed = true;
    }
    const T out = b0 * in + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = in;
    y2 = y1;
    y1 = out;
    ++samples;
    return out;
}

PathFollowingController::PathFollowingController(const AircraftParams &params,
                                                 const ControllerGains &gains,
                                                 double inner_rate_hz, int outer_decimation)
    : params_(params), gains_(gains), dt_(1.0 / inner_rate_hz),
      outer_decimation_(outer_decimation) {
    accel_lpf_.configure(gains_.lpf_pos_hz, inner_rate_hz / outer_decimation);
    f_model_lpf_.configure(gains_.lpf_pos_hz, inner_rate_hz / outer_decimation);
    omega_dot_lpf_.configure(gains_.lpf_rate_hz, inner_rate_hz);
    m_model_lpf_.configure(gains_.lpf_rate_hz, inner_rate_hz);
}

void PathFollowingController::set_path(const PathSpline &path, bool reset_progress) {
    path_ = path;
    has_path_ = true;
    if (reset_progress) tau_prev_ = 0.0;
}

void PathFollowingController::outer_loop(const SensorData &sensors, ControlDiagnostics *diag) {
    const Eigen::Matrix3d r_ib = sensors.q.toRotationMatrix();
    const double speed = std::max(sensors.v.norm(), 1.0);

    PathReference ref = closest_point_on_path(path_, sensors.r, tau_prev_, speed);
    const bool wrapped = ref.tau >= 1.0 || ref.tau < tau_prev_ - 0.5;
    double tau_next = std::fmod(ref.tau, 1.0);
    if (tau_next < 0.0) tau_next += 1.0;
    tau_prev_ = tau_next;

    // Measured kinematic acceleration and the modeled aero force, low-passed.
    const Eigen::Vector3d accel_meas =
        r_ib * sensors.accel_body + Eigen::Vector3d(0.0, 0.0, -kGravity);
    const Eigen::Vector3d accel_lpf = accel_lpf_.step(accel_meas);

    const Eigen::Vector3d v_air_inertial = sensors.v - sensors.wind_local;
    const Eigen::Vector3d v_air_body = r_ib.transpose() * v_air_inertial;
    Eigen::Vector3d f_model = Eigen::Vector3d::Zero();
    if (v_air_body.norm() > 1.0) f_model = r_ib * aero_force_body(v_air_body, params_);
    const Eigen::Vector3d f_model_lpf = f_model_lpf_.step(f_model);

    const bool warm = accel_lpf_.warm() && f_model_lpf_.warm();
    const Eigen::Vector3d f_cmd = position_outer_loop(ref, sensors.r, sensors.v, accel_lpf,
                                                      f_model_lpf, gains_, params_.mass, warm);

    // Attitude command from the lift part of the force demand.
    Eigen::Vector3d v_air_ref = ref.dr - sensors.wind_local;
    if (v_air_ref.norm() < 1.0) v_air_ref = v_air_body.norm() > 1.0 ? v_air_inertial : ref.dr;
    const ForceSplit split = decompose_reference_force(f_cmd, v_air_ref);
    const AttitudeCommand att = attitude_from_lift(split.lift, v_air_ref, params_, &last_lift_dir_);
    if (!att.lift_degenerate) last_lift_dir_ = split.lift.normalized();
    q_cmd_ = Eigen::Quaterniond(att.r_ib);

    // Rate feedforward by finite differences of the on-path target attitude.
    const double dtau = 2e-3;
    const double d1n = std::max(eval_path(path_, tau_prev_, 1).norm(), 1e-6);
    const double tau_rate = speed / d1n;
    const double dt_fd = dtau / std::max(tau_rate, 1e-6);
    const Eigen::Matrix3d r_minus =
        attitude_on_path(path_, tau_prev_ - dtau, speed, sensors.wind_local, params_).r_ib;
    const Eigen::Matrix3d r_center =
        attitude_on_path(path_, tau_prev_, speed, sensors.wind_local, params_).r_ib;
    const Eigen::Matrix3d r_plus =
        attitude_on_path(path_, tau_prev_ + dtau, speed, sensors.wind_local, params_).r_ib;
    const Eigen::AngleAxisd fwd(r_center.transpose() * r_plus);
    const Eigen::AngleAxisd bwd(r_minus.transpose() * r_center);
    const Eigen::Vector3d omega_fwd = fwd.angle() * fwd.axis() / dt_fd;
    const Eigen::Vector3d omega_bwd = bwd.angle() * bwd.axis() / dt_fd;
    omega_ref_ = 0.5 * (omega_fwd + omega_bwd);
    omega_dot_ref_ = (omega_fwd - omega_bwd) / dt_fd;

    outer_valid_ = true;
    if (diag != nullptr) {
        diag->ref = ref;
        diag->force_cmd = f_cmd;
        diag->force_increment = warm ? Eigen::Vector3d(f_cmd - f_model_lpf) : Eigen::Vector3d::Zero();
        diag->alpha_cmd = att.alpha;
        diag->alpha_saturated = att.alpha_saturated;
        diag->lift_degenerate = att.lift_degenerate;
        diag->wrapped = wrapped;
    }
}

SurfaceDeflections PathFollowingController::step(const SensorData &sensors,
                                                 ControlDiagnostics *diag) {
    if (!has_path_) throw std::logic_error("PathFollowingController: no path set");

    ControlDiagnostics local;
    if (tick_ % outer_decimation_ == 0) {
        outer_loop(sensors, &local);
        last_outer_diag_ = local;
    } else {
        local = last_outer_diag_;
        local.wrapped = false;
    }
    ++tick_;

    const Eigen::Matrix3d r_ib = sensors.q.toRotationMatrix();
    const Eigen::Vector3d v_air_body = r_ib.transpose() * (sensors.v - sensors.wind_local);
    const double v_air = std::max(v_air_body.norm(), 1.0);

    // Rate-loop filtered signals.
    Eigen::Vector3d omega_dot_raw = Eigen::Vector3d::Zero();
    if (omega_prev_valid_) omega_dot_raw = (sensors.omega - omega_prev_) / dt_;
    omega_prev_ = sensors.omega;
    omega_prev_valid_ = true;
    const Eigen::Vector3d omega_dot_lpf = omega_dot_lpf_.step(omega_dot_raw);
    const Eigen::Vector3d m_model =
        control_moment(v_air, servo_estimate_, params_);
    const Eigen::Vector3d m_model_lpf = m_model_lpf_.step(m_model);

    const Eigen::Vector3d zeta = attitude_error_vector(sensors.q, q_cmd_);
    Eigen::Vector3d m_cmd;
    if (omega_dot_lpf_.warm() && m_model_lpf_.warm()) {
        m_cmd = attitude_inner_loop(zeta, omega_ref_, omega_dot_ref_, sensors.omega, omega_dot_lpf,
                                    m_model_lpf, gains_, params_.inertia_diag);
    } else {
        const Eigen::Vector3d omega_dot_cmd = gains_.kp_att.cwiseProduct(zeta) +
                                              gains_.kd_att.cwiseProduct(omega_ref_ - sensors.omega) +
                                              omega_dot_ref_;
        m_cmd = params_.inertia_diag.cwiseProduct(omega_dot_cmd) +
                sensors.omega.cross(params_.inertia_diag.cwiseProduct(sensors.omega));
    }

    AllocationResult alloc;
    try {
        alloc = allocate_control_surfaces(m_cmd, v_air, params_);
    } catch (const SingularAirflowError &) {
        alloc = {};
    }

    SurfaceDeflections cmd = alloc.deflections;
    cmd.rud = turn_coordination(v_air, sensors.accel_body.y(), sensors.omega.z(), sensors.cas,
                                gains_, turn_state_, dt_);
    cmd = cmd.clamped(params_);

    // First-order servo estimate consumed by the moment model next tick.
    const double k_servo = std::clamp(dt_ / std::max(gains_.servo_tau, 1e-4), 0.0, 1.0);
    servo_estimate_.ail += k_servo * (cmd.ail - servo_estimate_.ail);
    servo_estimate_.ele += k_servo * (cmd.ele - servo_estimate_.ele);
    servo_estimate_.rud += k_servo * (cmd.rud - servo_estimate_.rud);

    if (diag != nullptr) {
        *diag = local;
        diag->zeta = zeta;
        diag->moment_cmd = m_cmd;
        diag->moment_increment =
            omega_dot_lpf_.warm() ? Eigen::Vector3d(m_cmd - m_model_lpf) : Eigen::Vector3d::Zero();
        diag->ail_saturated = alloc.ail_saturated;
        diag->ele_saturated = alloc.ele_saturated;
    }
    return cmd;
}

}  // namespace dsoar
