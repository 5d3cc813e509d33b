#include <doctest.h>

#include <Eigen/Geometry>
#include <cmath>

#include "dsoar/aircraft.hpp"
#include "dsoar/rng.hpp"

using namespace dsoar;

TEST_CASE("lift and drag polynomial at reference points") {
    AircraftParams p;
    const auto at_zero = lift_drag_coeffs(0.0, p);
    CHECK(at_zero.cl == doctest::Approx(0.0));
    CHECK(at_zero.cd == doctest::Approx(0.0169));
    CHECK_FALSE(at_zero.beyond_stall);

    // Vertex of the drag polynomial: alpha* = -cd1 / (2 cd2).
    const double alpha_star = -p.cd1 / (2.0 * p.cd2);
    CHECK(alpha_star == doctest::Approx(0.13128491620111732).epsilon(1e-12));
    const double cd_min = lift_drag_coeffs(alpha_star, p).cd;
    for (double da : {-0.05, -0.01, 0.01, 0.05}) {
        CHECK(lift_drag_coeffs(alpha_star + da, p).cd > cd_min);
    }

    AircraftParams zero = p;
    zero.cl0 = zero.cd0 = zero.cd1 = zero.cd2 = 0.0;
    const auto trivial = lift_drag_coeffs(0.0, zero);
    CHECK(trivial.cl == 0.0);
    CHECK(trivial.cd == 0.0);

    CHECK(lift_drag_coeffs(0.4, p).beyond_stall);
}

TEST_CASE("aero force for pure axial flow") {
    AircraftParams p;
    const Eigen::Vector3d f = aero_force_body({10.0, 0.0, 0.0}, p);
    // alpha = 0, C_L0 = 0: pure drag opposing the flow.
    const double expected_drag = 0.5 * p.rho * 100.0 * p.wing_area * p.cd0;
    CHECK(f.x() == doctest::Approx(-expected_drag).epsilon(1e-12));
    CHECK(f.y() == 0.0);
    CHECK(std::abs(f.z()) < 1e-12);
}

TEST_CASE("aero force rejects near-zero airspeed") {
    AircraftParams p;
    CHECK_THROWS_AS(aero_force_body(Eigen::Vector3d::Zero(), p), SingularAirflowError);
    CHECK_THROWS_AS(aero_force_body({0.05, 0.0, 0.0}, p), SingularAirflowError);
}

TEST_CASE("aero force decomposes into the expected lift and drag magnitudes") {
    AircraftParams p;
    Rng rng(42);
    for (int k = 0; k < 200; ++k) {
        // In-plane flow (zero sideslip) with alpha inside the linear range.
        const double v = 8.0 + 25.0 * rng.uniform();
        const double alpha = 0.24 * (rng.uniform() - 0.5);
        const Eigen::Vector3d v_air{v * std::cos(alpha), 0.0, v * std::sin(alpha)};
        const Eigen::Vector3d f = aero_force_body(v_air, p);

        const auto cc = lift_drag_coeffs(alpha, p);
        const double q_bar_area = 0.5 * p.rho * v * v * p.wing_area;
        const Eigen::Vector3d drag_dir = -v_air.normalized();
        // Lift direction: perpendicular to the flow in the x-z plane, upward.
        const Eigen::Vector3d lift_dir = drag_dir.cross(Eigen::Vector3d::UnitY()).normalized();

        CHECK(f.dot(drag_dir) == doctest::Approx(q_bar_area * cc.cd).epsilon(1e-9));
        CHECK(f.dot(lift_dir) == doctest::Approx(q_bar_area * cc.cl).epsilon(1e-9));
    }
}

TEST_CASE("drag component always opposes the airflow") {
    AircraftParams p;
    Rng rng(7);
    for (int k = 0; k < 500; ++k) {
        Eigen::Vector3d v_air{30.0 * (rng.uniform() - 0.2), 6.0 * (rng.uniform() - 0.5),
                              8.0 * (rng.uniform() - 0.5)};
        if (v_air.norm() < 0.5) continue;
        const Eigen::Vector3d f = aero_force_body(v_air, p);
        CHECK(f.dot(v_air) <= 1e-9);
    }
}

TEST_CASE("control moment scaling") {
    AircraftParams p;
    const SurfaceDeflections zero;
    CHECK(control_moment(20.0, zero, p).norm() == 0.0);

    SurfaceDeflections d{0.1, -0.2, 0.05};
    const Eigen::Vector3d m1 = control_moment(10.0, d, p);
    const Eigen::Vector3d m2 = control_moment(20.0, d, p);
    CHECK(m2.x() == doctest::Approx(4.0 * m1.x()));
    CHECK(m2.y() == doctest::Approx(4.0 * m1.y()));
    CHECK(m2.z() == doctest::Approx(4.0 * m1.z()));

    AircraftParams k = p;
    k.k_ail = 0.5;
    SurfaceDeflections ail{0.1, 0.0, 0.0};
    CHECK(control_moment(10.0, ail, k).x() == doctest::Approx(3.0625).epsilon(1e-12));
}

TEST_CASE("specific energy identities") {
    CHECK(specific_energy(0.0, 0.0) == 0.0);
    CHECK(specific_energy(10.0, 0.0) == doctest::Approx(50.0));
    // Level set: g (z1 - z2) = (V2^2 - V1^2) / 2.
    const double z1 = 12.0, v1 = 14.0;
    const double v2 = 20.0;
    const double z2 = z1 - (v2 * v2 - v1 * v1) / (2.0 * kGravity);
    CHECK(specific_energy(v1, z1) == doctest::Approx(specific_energy(v2, z2)).epsilon(1e-12));
}

TEST_CASE("surface deflection clamping") {
    AircraftParams p;
    SurfaceDeflections d{1.0, -1.0, 0.1};
    const auto c = d.clamped(p);
    CHECK(c.ail == doctest::Approx(p.ail_limit));
    CHECK(c.ele == doctest::Approx(-p.ele_limit));
    CHECK(c.rud == doctest::Approx(0.1));
}

TEST_CASE("default airframe loads from config and validates") {
    Config cfg = Config::from_string("[aircraft]\nmass_kg = 2.0\n");
    const auto p = AircraftParams::from_config(cfg);
    CHECK(p.mass == 2.0);
    CHECK(p.cd0 == doctest::Approx(0.0169));
    // Snapshot now carries every resolved default.
    CHECK(cfg.has("aircraft.cl1_per_rad"));

    Config bad = Config::from_string("[aircraft]\nmass_kg = -1.0\n");
    CHECK_THROWS(AircraftParams::from_config(bad));
}
