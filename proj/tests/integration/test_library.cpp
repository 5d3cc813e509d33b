#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "dsoar/path_library.hpp"
#include "dsoar/rng.hpp"

using namespace dsoar;

namespace {

WindFieldParams base_field() {
    WindFieldParams w;
    w.w0x = 10.0;
    w.s = 0.4;
    w.h = 0.0;
    return w;
}

OcpConfig fast_config() {
    OcpConfig cfg;
    cfg.nodes = 24;
    cfg.bounds.z_min = -35.0;
    cfg.solver.max_iterations = 30000;
    cfg.solver.max_outer = 60;
    return cfg;
}

std::string slurp(const std::string &path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("single-node grid equals a single robust solve") {
    LibraryAxes axes;
    axes.w_max = {12.0};
    axes.s = {0.4};
    axes.h = {0.0};
    axes.v0 = {18.0};
    WindSigmas zero;
    zero.w0x = zero.w0y = zero.bx = zero.by = zero.s = zero.h = 0.0;

    const auto lib = build_path_library(axes, AircraftParams{}, fast_config(), base_field(), zero,
                                        0, 42);
    REQUIRE(lib.entries.size() == 1);
    INFO("failure: ", lib.entries[0].failure);
    REQUIRE(lib.entries[0].feasible);

    const auto set = sample_perturbed_fields(node_wind_field(lib, 0, 0, 0), zero, 0,
                                             derive_seed(42, 0));
    const auto sol =
        solve_robust_ocp(set, V0Range::fixed(18.0), AircraftParams{}, fast_config());
    REQUIRE(sol.feasible);
    CHECK(std::abs(lib.entries[0].objective - sol.objective) < 1e-9);
    CHECK((lib.entries[0].spline.coeffs - sol.path.coeffs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("library build is deterministic and round-trips through its file") {
    LibraryAxes axes;
    axes.w_max = {10.0, 12.0};
    axes.s = {0.4};
    axes.h = {0.0};
    axes.v0 = {18.0};
    WindSigmas sigmas;
    sigmas.w0x = 0.5;
    sigmas.s = 0.02;
    sigmas.h = 0.5;

    const auto cfg = fast_config();
    const auto lib_a = build_path_library(axes, AircraftParams{}, cfg, base_field(), sigmas, 1, 9);
    const auto lib_b = build_path_library(axes, AircraftParams{}, cfg, base_field(), sigmas, 1, 9);

    const char *file_a = "lib_a.json";
    const char *file_b = "lib_b.json";
    save_path_library(lib_a, file_a);
    save_path_library(lib_b, file_b);
    CHECK(slurp(file_a) == slurp(file_b));

    const auto reloaded = load_path_library(file_a);
    REQUIRE(reloaded.entries.size() == lib_a.entries.size());
    for (std::size_t i = 0; i < reloaded.entries.size(); ++i) {
        CHECK(reloaded.entries[i].feasible == lib_a.entries[i].feasible);
        if (reloaded.entries[i].feasible) {
            CHECK((reloaded.entries[i].spline.coeffs - lib_a.entries[i].spline.coeffs)
                      .cwiseAbs()
                      .maxCoeff() == 0.0);
        }
    }
    std::remove(file_a);
    std::remove(file_b);
}

TEST_CASE("default grid completes with at least 7 of 9 feasible nodes") {
    LibraryAxes axes;
    axes.w_max = {8.0, 10.0, 12.0};
    axes.s = {0.4};
    axes.h = {0.0};
    axes.v0 = {15.0, 20.0, 25.0};
    WindSigmas zero;
    zero.w0x = zero.w0y = zero.bx = zero.by = zero.s = zero.h = 0.0;

    const auto lib = build_path_library(axes, AircraftParams{}, fast_config(), base_field(), zero,
                                        0, 7);
    REQUIRE(lib.entries.size() == 9);
    for (const auto &e : lib.entries) {
        INFO("node ", e.idx[0], ",", e.idx[3], ": ",
             e.feasible ? "ok" : e.failure);
        CHECK(true);
    }
    CHECK(lib.feasible_count() >= 7);
}

TEST_CASE("selection: exact node, hull clamping, conservative tie-break") {
    // Hand-built library: selection logic is independent of the solver.
    PathLibrary lib;
    lib.axes.w_max = {8.0, 12.0};
    lib.axes.s = {0.4};
    lib.axes.h = {0.0};
    lib.axes.v0 = {15.0, 20.0};
    lib.base_field = base_field();
    lib.entries.resize(4);
    int k = 0;
    for (int iw = 0; iw < 2; ++iw)
        for (int iv = 0; iv < 2; ++iv) {
            auto &e = lib.entries[k++];
            e.idx = {iw, 0, 0, iv};
            e.feasible = true;
            e.spline.design_airspeed = lib.axes.v0[iv];
            e.spline.coeffs(0, 0) = 100.0 * iw + iv;  // marker
        }

    WindFieldParams q = base_field();
    q.w0x = 12.0;
    const auto &exact = select_path(lib, q, 20.0);
    CHECK(exact.idx == std::array<int, 4>{1, 0, 0, 1});

    // Outside the hull: clamps to the nearest corner.
    q.w0x = 25.0;
    const auto &clamped = select_path(lib, q, 99.0);
    CHECK(clamped.idx == std::array<int, 4>{1, 0, 0, 1});

    // Exactly between wind nodes with matching v0: lower amplitude wins.
    q.w0x = 10.0;
    const auto &tie = select_path(lib, q, 15.0);
    CHECK(tie.idx == std::array<int, 4>{0, 0, 0, 0});

    // Infeasible nodes are skipped.
    lib.entries[0].feasible = false;
    q.w0x = 8.0;
    const auto &skip = select_path(lib, q, 15.0);
    CHECK(skip.feasible);

    // All-infeasible library reports an error.
    for (auto &e : lib.entries) e.feasible = false;
    CHECK_THROWS(select_path(lib, q, 15.0));
}

TEST_CASE("spline files round-trip") {
    PathSpline sp;
    sp.coeffs.setRandom();
    sp.design_airspeed = 17.5;
    sp.design_wind = base_field();
    save_path_spline(sp, "sp.json");
    const auto back = load_path_spline("sp.json");
    CHECK((back.coeffs - sp.coeffs).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.design_airspeed == sp.design_airspeed);
    CHECK(back.design_wind.w0x == sp.design_wind.w0x);
    std::remove("sp.json");
}
