#include "dsoar/rigid_body.hpp"

#include <cmath>
#include <stdexcept>

namespace dsoar {

namespace {

struct Derivative {
    Eigen::Vector3d r_dot;
    Eigen::Vector3d v_dot;
    Eigen::Vector4d q_dot;  // (w, x, y, z) order
    Eigen::Vector3d omega_dot;
};

Eigen::Vector3d total_force_body(const Eigen::Vector3d &v_air_body, const Eigen::Vector3d &omega,
                                 const AircraftParams &p, const RigidBodyOptions &opt) {
    Eigen::Vector3d f = Eigen::Vector3d::Zero();
    if (v_air_body.norm() > 0.1) {
        f += aero_force_body(v_air_body, p);
        f += stability_side_force(v_air_body, p);
    }
    (void)omega;
    f.x() += opt.thrust;
    return f;
}

Derivative derivative(const RigidBodyState &s, const SurfaceDeflections &d,
                      const Eigen::Vector3d &wind_local, const AircraftParams &p,
                      const RigidBodyOptions &opt) {
    const Eigen::Matrix3d r_ib = s.q.toRotationMatrix();
    const Eigen::Vector3d v_air_body = r_ib.transpose() * (s.v - wind_local);

    const Eigen::Vector3d f_body = total_force_body(v_air_body, s.omega, p, opt);
    Eigen::Vector3d m_body = stability_moment(v_air_body, s.omega, p);
    if (v_air_body.norm() > 0.1) m_body += control_moment(v_air_body.norm(), d, p);

    Derivative out;
    out.r_dot = s.v;
    out.v_dot = r_ib * f_body / p.mass + Eigen::Vector3d(0.0, 0.0, -opt.gravity);

    const Eigen::Quaterniond omega_quat(0.0, s.omega.x(), s.omega.y(), s.omega.z());
    const Eigen::Quaterniond q_dot = s.q * omega_quat;
    out.q_dot = 0.5 * Eigen::Vector4d(q_dot.w(), q_dot.x(), q_dot.y(), q_dot.z());

    const Eigen::Vector3d i_diag = p.inertia_diag;
    const Eigen::Vector3d i_omega = i_diag.cwiseProduct(s.omega);
    out.omega_dot = (m_body - s.omega.cross(i_omega)).cwiseQuotient(i_diag);
    return out;
}

RigidBodyState advance(const RigidBodyState &s, const Derivative &d, double dt) {
    RigidBodyState out;
    out.r = s.r + dt * d.r_dot;
    out.v = s.v + dt * d.v_dot;
    const Eigen::Vector4d q = Eigen::Vector4d(s.q.w(), s.q.x(), s.q.y(), s.q.z()) + dt * d.q_dot;
    out.q = Eigen::Quaterniond(q[0], q[1], q[2], q[3]);
    out.omega = s.omega + dt * d.omega_dot;
    return out;
}

}  // namespace

RigidBodyState rigid_body_step(const RigidBodyState &s, const SurfaceDeflections &d,
                               const Eigen::Vector3d &wind_local, const AircraftParams &p,
                               double dt, const RigidBodyOptions &opt) {
    if (!(dt > 0.0) || dt > 0.02)
        throw std::invalid_argument("rigid_body_step: dt must lie in (0, 0.02] s");
    if (!s.finite() || !wind_local.allFinite())
        throw std::runtime_error("rigid_body_step: non-finite state");

    const Derivative k1 = derivative(s, d, wind_local, p, opt);
    const Derivative k2 = derivative(advance(s, k1, dt / 2), d, wind_local, p, opt);
    const Derivative k3 = derivative(advance(s, k2, dt / 2), d, wind_local, p, opt);
    const Derivative k4 = derivative(advance(s, k3, dt), d, wind_local, p, opt);

    RigidBodyState out;
    out.r = s.r + dt / 6.0 * (k1.r_dot + 2 * k2.r_dot + 2 * k3.r_dot + k4.r_dot);
    out.v = s.v + dt / 6.0 * (k1.v_dot + 2 * k2.v_dot + 2 * k3.v_dot + k4.v_dot);
    const Eigen::Vector4d q0(s.q.w(), s.q.x(), s.q.y(), s.q.z());
    const Eigen::Vector4d q =
        q0 + dt / 6.0 * (k1.q_dot + 2 * k2.q_dot + 2 * k3.q_dot + k4.q_dot);
    out.q = Eigen::Quaterniond(q[0], q[1], q[2], q[3]).normalized();
    out.omega = s.omega + dt / 6.0 * (k1.omega_dot + 2 * k2.omega_dot + 2 * k3.omega_dot + k4.omega_dot);

    if (!out.finite()) throw std::runtime_error("rigid_body_step: integration fault");
    return out;
}

Eigen::Vector3d specific_force_body(const RigidBodyState &s, const SurfaceDeflections &d,
                                    const Eigen::Vector3d &wind_local, const AircraftParams &p,
                                    const RigidBodyOptions &opt) {
    (void)d;
    const Eigen::Vector3d v_air_body = s.q.toRotationMatrix().transpose() * (s.v - wind_local);
    return total_force_body(v_air_body, s.omega, p, opt) / p.mass;
}

Eigen::Quaterniond attitude_from_axes(const Eigen::Vector3d &forward,
                                      const Eigen::Vector3d &down_hint) {
    const Eigen::Vector3d x = forward.normalized();
    Eigen::Vector3d z = down_hint - down_hint.dot(x) * x;
    if (z.norm() < 1e-9) {
        const Eigen::Vector3d alt =
            std::abs(x.z()) < 0.9 ? Eigen::Vector3d(0, 0, -1) : Eigen::Vector3d(1, 0, 0);
        z = alt - alt.dot(x) * x;
    }
    z.normalize();
    const Eigen::Vector3d y = z.cross(x);
    Eigen::Matrix3d r;
    r.col(0) = x;
    r.col(1) = y;
    r.col(2) = z;
    return Eigen::Quaterniond(r).normalized();
}

}  // namespace dsoar
