#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <optional>

#include "dsoar/aircraft.hpp"
#include "dsoar/config.hpp"
#include "dsoar/spline.hpp"

namespace dsoar {

/// Reference kinematics at the closest point of the path: position, velocity
/// rescaled to the current inertial speed, and the chain-rule acceleration
/// under a constant-parameter-rate assumption.
struct PathReference {
    Eigen::Vector3d r = Eigen::Vector3d::Zero();
    Eigen::Vector3d dr = Eigen::Vector3d::Zero();
    Eigen::Vector3d ddr = Eigen::Vector3d::Zero();
    double tau = 0.0;
    double distance = 0.0;  ///< |r_query - r| [m]
};

struct ControllerGains {
    double kp_pos = 4.0;  ///< [1/s^2]; kd_pos is tied to critical damping
    Eigen::Vector3d kp_att{400.0, 400.0, 50.0};
    Eigen::Vector3d kd_att{40.0, 40.0, 14.0};
    double k_ff_rud = 0.12;
    double k_p_rud = 0.35;
    double rud_ref_airspeed = 15.0;  ///< rudder gains scale by (ref/cas)^2
    double rud_beta_gain = 2.0;      ///< lateral-accel weight in the rate target
    double rud_blend_tau = 0.3;      ///< [s] complementary blend
    double lpf_pos_hz = 5.0;
    double lpf_rate_hz = 12.0;
    double servo_tau = 0.02;  ///< [s] first-order servo estimate

    double kd_pos() const { return 2.0 * std::sqrt(kp_pos); }

    static ControllerGains from_config(Config &cfg, const std::string &section = "controller");
};

/// Locate the path point nearest to r: coarse sampling around tau_prev, then
/// Newton refinement on the squared distance; reference velocity rescaled to
/// inertial_speed. Ties resolve toward tau_prev.
PathReference closest_point_on_path(const PathSpline &spline, const Eigen::Vector3d &r,
                                    double tau_prev, double inertial_speed);

/// PD + feedforward acceleration command and the incremental force command
///   F_c = m (r_dd_c - r_dd_lpf) + F_model_lpf.
/// With increments disabled (filters still warming) falls back to the pure
/// model inversion m (r_dd_c - g).
Eigen::Vector3d position_outer_loop(const PathReference &ref, const Eigen::Vector3d &r,
                                    const Eigen::Vector3d &dr, const Eigen::Vector3d &ddr_lpf,
                                    const Eigen::Vector3d &f_model_lpf, const ControllerGains &g,
                                    double mass, bool increments_enabled = true);

struct ForceSplit {
    Eigen::Vector3d lift;
    Eigen::Vector3d drag;
};

/// Project the force demand onto the air-relative velocity (drag direction);
/// the remainder is the lift demand, perpendicular to v_air_ref.
ForceSplit decompose_reference_force(const Eigen::Vector3d &f_ref,
                                     const Eigen::Vector3d &v_air_ref);

struct AttitudeCommand {
    Eigen::Matrix3d r_ib = Eigen::Matrix3d::Identity();
    double alpha = 0.0;
    bool alpha_saturated = false;
    bool lift_degenerate = false;  ///< lift demand below the inversion floor
};

/// Attitude that realizes the lift demand at zero sideslip: body x along
/// v_air_ref, body z opposing the lift force, then pitched by the alpha that
/// produces |F_lift| through the lift polynomial. Below a 5%-of-weight lift
/// demand the previous lift direction is held and trim alpha commanded.
AttitudeCommand attitude_from_lift(const Eigen::Vector3d &f_lift, const Eigen::Vector3d &v_air_ref,
                                   const AircraftParams &p,
                                   const Eigen::Vector3d *last_lift_dir = nullptr);

/// Axis-angle attitude error 2 arccos(q_e^w) * axis in the body frame, with
/// the shortest-rotation sign convention.
Eigen::Vector3d attitude_error_vector(const Eigen::Quaterniond &q, const Eigen::Quaterniond &q_c);

/// PD + feedforward angular acceleration and the incremental moment command
///   M_c = I (omega_dot_c - omega_dot_lpf) + M_model_lpf.
Eigen::Vector3d attitude_inner_loop(const Eigen::Vector3d &zeta, const Eigen::Vector3d &omega_ref,
                                    const Eigen::Vector3d &omega_dot_ref,
                                    const Eigen::Vector3d &omega,
                                    const Eigen::Vector3d &omega_dot_lpf,
                                    const Eigen::Vector3d &m_model_lpf, const ControllerGains &g,
                                    const Eigen::Vector3d &inertia_diag);

struct AllocationResult {
    SurfaceDeflections deflections;  ///< rudder untouched (zero)
    bool ail_saturated = false;
    bool ele_saturated = false;
};

/// Invert the roll/pitch rows of the control-moment model; the body-z row is
/// discarded (the rudder is allocated by turn coordination). Throws
/// SingularAirflowError below the dynamic-pressure floor.
AllocationResult allocate_control_surfaces(const Eigen::Vector3d &m_c, double v_air_norm,
                                           const AircraftParams &p);

/// Complementary-blend state for the coordinated-turn rate target.
struct TurnCoordinationState {
    double r_star = 0.0;
    bool initialized = false;
};

/// Rudder law: blend the measured yaw rate corrected by the lateral specific
/// force into a rate target r*, then apply airspeed-scaled feedforward and
/// proportional terms.
double turn_coordination(double v_air, double a_lat, double r, double z_cas,
                         const ControllerGains &g, TurnCoordinationState &state, double dt);

/// Pure-feedforward attitude on the path at parameter tau, used for rate
/// references and rollout initialization.
AttitudeCommand attitude_on_path(const PathSpline &spline, double tau, double inertial_speed,
                                 const Eigen::Vector3d &wind, const AircraftParams &p);

/// Everything the controller consumes each tick (simulated sensor outputs).
struct SensorData {
    double t = 0.0;
    Eigen::Vector3d r = Eigen::Vector3d::Zero();
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
    Eigen::Vector3d omega = Eigen::Vector3d::Zero();
    Eigen::Vector3d accel_body = Eigen::Vector3d::Zero();  ///< specific force
    double tas = 0.0;
    double cas = 0.0;
    Eigen::Vector3d wind_local = Eigen::Vector3d::Zero();  ///< local estimate
};

struct ControlDiagnostics {
    PathReference ref;
    Eigen::Vector3d zeta = Eigen::Vector3d::Zero();
    Eigen::Vector3d force_cmd = Eigen::Vector3d::Zero();
    Eigen::Vector3d force_increment = Eigen::Vector3d::Zero();
    Eigen::Vector3d moment_cmd = Eigen::Vector3d::Zero();
    Eigen::Vector3d moment_increment = Eigen::Vector3d::Zero();
    double alpha_cmd = 0.0;
    bool alpha_saturated = false;
    bool ail_saturated = false;
    bool ele_saturated = false;
    bool lift_degenerate = false;
    bool wrapped = false;  ///< the closest point crossed tau = 1 this step
};

/// Cascaded incremental path-following controller. step() runs at the inner
/// rate; the position loop executes every outer_decimation-th call. One
/// instance is a single sequential state machine.
class PathFollowingController {
  public:
    PathFollowingController(const AircraftParams &params, const ControllerGains &gains,
                            double inner_rate_hz = 500.0, int outer_decimation = 5);

    void set_path(const PathSpline &path, bool reset_progress = true);
    const PathSpline &path() const { return path_; }
    double path_parameter() const { return tau_prev_; }

    SurfaceDeflections step(const SensorData &sensors, ControlDiagnostics *diag = nullptr);

  private:
    template <typename T>
    struct Lpf2 {
        // Bilinear-transform Butterworth biquad.
        double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
        T x1{}, x2{}, y1{}, y2{};
        int samples = 0;
        int warm_after = 0;
        bool primed = false;

        void configure(double cutoff_hz, double sample_hz);
        T step(const T &in);
        bool warm() const { return samples >= warm_after; }
    };

    void outer_loop(const SensorData &sensors, ControlDiagnostics *diag);

    AircraftParams params_;
    ControllerGains gains_;
    double dt_;
    int outer_decimation_;
    int tick_ = 0;

    PathSpline path_;
    bool has_path_ = false;
    double tau_prev_ = 0.0;

    Lpf2<Eigen::Vector3d> accel_lpf_;
    Lpf2<Eigen::Vector3d> f_model_lpf_;
    Lpf2<Eigen::Vector3d> omega_dot_lpf_;
    Lpf2<Eigen::Vector3d> m_model_lpf_;
    Eigen::Vector3d omega_prev_ = Eigen::Vector3d::Zero();
    bool omega_prev_valid_ = false;

    SurfaceDeflections servo_estimate_;
    TurnCoordinationState turn_state_;
    Eigen::Vector3d last_lift_dir_{0.0, 0.0, 1.0};

    // Latched outer-loop products consumed by the inner loop.
    Eigen::Quaterniond q_cmd_ = Eigen::Quaterniond::Identity();
    Eigen::Vector3d omega_ref_ = Eigen::Vector3d::Zero();
    Eigen::Vector3d omega_dot_ref_ = Eigen::Vector3d::Zero();
    bool outer_valid_ = false;
    ControlDiagnostics last_outer_diag_;
};

}  // namespace dsoar
