#include <doctest.h>

#include <cmath>

#include "dsoar/point_mass.hpp"
#include "dsoar/rng.hpp"

using namespace dsoar;

namespace {
WindFieldParams calm() {
    WindFieldParams w;
    w.s = 0.4;
    return w;
}
}  // namespace

TEST_CASE("trimmed glide equilibrium identities") {
    AircraftParams p;
    const WindFieldParams w = calm();

    KinematicState s;
    s.v = 15.0;
    s.gamma = -0.08;
    s.psi = 0.4;
    // Choose C_L so lift exactly balances the gravity component: gamma_dot = 0.
    const double q_bar_area = 0.5 * p.rho * s.v * s.v * p.wing_area;
    KinematicInput u;
    u.mu = 0.0;
    u.cl = p.mass * kGravity * std::cos(s.gamma) / q_bar_area;

    const KinematicState d = point_mass_derivative(s, u, w, p);
    CHECK(d.gamma == doctest::Approx(0.0).epsilon(1e-12));

    const double alpha = (u.cl - p.cl0) / p.cl1;
    const double drag = q_bar_area * (p.cd0 + p.cd1 * alpha + p.cd2 * alpha * alpha);
    CHECK(d.v == doctest::Approx(-drag / p.mass - kGravity * std::sin(s.gamma)).epsilon(1e-12));
}

TEST_CASE("constant wind removes the gradient coupling terms") {
    AircraftParams p;
    WindFieldParams bias;
    bias.bx = 5.0;
    bias.by = -2.0;
    bias.s = 0.4;

    KinematicState s;
    s.v = 18.0;
    s.gamma = 0.1;
    s.psi = -1.1;
    KinematicInput u{0.7, 0.3};

    const KinematicState with_bias = point_mass_derivative(s, u, bias, p);
    const KinematicState still_air = point_mass_derivative(s, u, calm(), p);
    // Airspeed/angle dynamics identical; only the position rates shift by the wind.
    CHECK(with_bias.v == doctest::Approx(still_air.v).epsilon(1e-12));
    CHECK(with_bias.gamma == doctest::Approx(still_air.gamma).epsilon(1e-12));
    CHECK(with_bias.psi == doctest::Approx(still_air.psi).epsilon(1e-12));
    CHECK(with_bias.x - still_air.x == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(with_bias.y - still_air.y == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("energy rate equals drag dissipation in constant wind") {
    AircraftParams p;
    WindFieldParams wind;
    wind.bx = 4.0;
    wind.by = 1.0;
    wind.s = 0.4;  // amplitude zero: constant wind at all altitudes

    KinematicState s;
    s.x = 0;
    s.y = 0;
    s.z = 10.0;
    s.v = 17.0;
    s.gamma = 0.05;
    s.psi = 0.7;
    KinematicInput u{0.8, 0.35};

    const double dt = 1e-3;
    double drag_work = 0.0;  // integral of D V / m dt
    double t = 0.0;
    const double e0 = 0.5 * s.v * s.v + kGravity * s.z;
    for (int i = 0; i < 4000; ++i) {
        const double alpha = (u.cl - p.cl0) / p.cl1;
        const double cd = p.cd0 + p.cd1 * alpha + p.cd2 * alpha * alpha;
        const double drag = 0.5 * p.rho * s.v * s.v * p.wing_area * cd;
        drag_work += drag * s.v / p.mass * dt;
        s = point_mass_rk4_step(s, u, wind, p, dt);
        t += dt;
    }
    const double e1 = 0.5 * s.v * s.v + kGravity * s.z;
    CHECK(e0 - e1 == doctest::Approx(drag_work).epsilon(1e-4));
}

TEST_CASE("state validation rejects gimbal and degenerate speed") {
    AircraftParams p;
    KinematicState s;
    s.v = -1.0;
    CHECK_THROWS(point_mass_derivative(s, {}, calm(), p));
    s.v = 10.0;
    s.gamma = M_PI_2;
    CHECK_THROWS(point_mass_derivative(s, {}, calm(), p));
}

TEST_CASE("forward-mode jacobian matches finite differences") {
    AircraftParams p;
    WindFieldParams w;
    w.w0x = 9.0;
    w.w0y = -3.0;
    w.bx = 1.0;
    w.s = 0.35;
    w.h = 4.0;

    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        double st[6] = {10 * rng.uniform(), 10 * rng.uniform(), 20 * (rng.uniform() - 0.5),
                        10.0 + 20 * rng.uniform(), 1.0 * (rng.uniform() - 0.5),
                        6.0 * (rng.uniform() - 0.5)};
        double in[2] = {1.2 * rng.uniform() - 0.2, 1.6 * (rng.uniform() - 0.5)};

        using D = Dual<8>;
        D st_d[6], in_d[2], out_d[6];
        for (int i = 0; i < 6; ++i) st_d[i] = D::seeded(st[i], i);
        for (int i = 0; i < 2; ++i) in_d[i] = D::seeded(in[i], 6 + i);
        point_mass_derivative_t(st_d, in_d, w, p, out_d);

        const double eps = 1e-6;
        for (int col = 0; col < 8; ++col) {
            double plus[6], minus[6], ip[2], im[2];
            double sp[6], sm[6];
            for (int i = 0; i < 6; ++i) sp[i] = sm[i] = st[i];
            for (int i = 0; i < 2; ++i) ip[i] = im[i] = in[i];
            if (col < 6) {
                sp[col] += eps;
                sm[col] -= eps;
            } else {
                ip[col - 6] += eps;
                im[col - 6] -= eps;
            }
            point_mass_derivative_t(sp, ip, w, p, plus);
            point_mass_derivative_t(sm, im, w, p, minus);
            for (int row = 0; row < 6; ++row) {
                const double fd = (plus[row] - minus[row]) / (2 * eps);
                const double scale = std::max(1.0, std::abs(fd));
                CHECK(std::abs(out_d[row].d[col] - fd) / scale < 1e-5);
            }
        }
    }
}
