#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "dsoar/aircraft.hpp"

namespace dsoar {

/// 6-DOF rigid-body state. Position/velocity in inertial ENU, attitude as a
/// unit quaternion rotating body FRD into ENU, rates in the body frame.
struct RigidBodyState {
    Eigen::Vector3d r = Eigen::Vector3d::Zero();      ///< position [m]
    Eigen::Vector3d v = Eigen::Vector3d::Zero();      ///< inertial velocity [m/s]
    Eigen::Quaterniond q = Eigen::Quaterniond::Identity();  ///< body FRD -> ENU
    Eigen::Vector3d omega = Eigen::Vector3d::Zero();  ///< body rates [rad/s]

    bool finite() const {
        return r.allFinite() && v.allFinite() && q.coeffs().allFinite() && omega.allFinite();
    }
};

/// Plant options the bare airframe model does not cover: gravity scaling
/// (zero for vacuum tests) and a constant body-x thrust for powered trim.
struct RigidBodyOptions {
    double gravity = kGravity;  ///< [m/s^2]
    double thrust = 0.0;        ///< constant body-x force [N]
};

/// One fixed-step RK4 integration of the Newton-Euler equations with the
/// deflections and local wind held constant over the step. The quaternion is
/// renormalized at the end of the step; dt must lie in (0, 0.02] s.
RigidBodyState rigid_body_step(const RigidBodyState &s, const SurfaceDeflections &d,
                               const Eigen::Vector3d &wind_local, const AircraftParams &p,
                               double dt, const RigidBodyOptions &opt = {});

/// Body-frame specific force (IMU model: everything but gravity, per mass).
Eigen::Vector3d specific_force_body(const RigidBodyState &s, const SurfaceDeflections &d,
                                    const Eigen::Vector3d &wind_local, const AircraftParams &p,
                                    const RigidBodyOptions &opt = {});

/// Attitude with body x along `forward`, rolled so body z matches `down_hint`
/// as closely as orthonormality allows. Used to seed rollouts on a path.
Eigen::Quaterniond attitude_from_axes(const Eigen::Vector3d &forward,
                                      const Eigen::Vector3d &down_hint);

}  // namespace dsoar
