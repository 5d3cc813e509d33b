#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dsoar/ocp.hpp"
#include "dsoar/spline.hpp"
#include "dsoar/wind_field.hpp"

namespace dsoar {

/// Strictly increasing grid axes: shear amplitude, steepness, layer center,
/// entry airspeed.
struct LibraryAxes {
    std::vector<double> w_max;  ///< [m/s]
    std::vector<double> s;      ///< [1/m]
    std::vector<double> h;      ///< [m]
    std::vector<double> v0;     ///< [m/s]

    void validate() const;
    std::size_t node_count() const { return w_max.size() * s.size() * h.size() * v0.size(); }

    static LibraryAxes from_config(Config &cfg, const std::string &section = "library");
};

struct LibraryEntry {
    std::array<int, 4> idx{0, 0, 0, 0};  ///< (w_max, s, h, v0) grid indices
    bool feasible = false;
    PathSpline spline;
    double objective = 0.0;  ///< worst-case terminal airspeed [m/s]
    std::string failure;     ///< non-empty when infeasible
};

struct PathLibrary {
    int format_version = 1;
    std::string airframe_hash;
    LibraryAxes axes;
    WindFieldParams base_field;  ///< carries bias and wind direction
    WindSigmas sigmas;           ///< local scenario deviations per node
    int scenarios_per_node = 0;
    std::uint64_t seed = 0;
    std::vector<LibraryEntry> entries;  ///< row-major over (w_max, s, h, v0)

    const LibraryEntry &at(int iw, int is, int ih, int iv) const;
    int feasible_count() const;
};

std::string airframe_hash(const AircraftParams &p);

/// Wind field of a grid node: the base field with amplitude rescaled along
/// its own direction and (s, h) replaced.
WindFieldParams node_wind_field(const PathLibrary &lib, int iw, int is, int ih);

/// Solve every grid node (local scenario set of `scenario_count` samples
/// around the node, deterministic per seed), warm-starting from the nearest
/// already-solved neighbor. Failed nodes are recorded, not fatal.
PathLibrary build_path_library(const LibraryAxes &axes, const AircraftParams &aircraft,
                               const OcpConfig &cfg, const WindFieldParams &base_field,
                               const WindSigmas &sigmas, int scenario_count, std::uint64_t seed);

/// Nearest feasible node under per-axis span-normalized distance; queries
/// outside the grid clamp to the hull. Distance ties resolve toward lower
/// shear amplitude. Throws when no feasible entry exists.
const LibraryEntry &select_path(const PathLibrary &lib, const WindFieldParams &wind, double v);

void save_path_library(const PathLibrary &lib, const std::string &path);
PathLibrary load_path_library(const std::string &path);

void save_path_spline(const PathSpline &spline, const std::string &path);
PathSpline load_path_spline(const std::string &path);

}  // namespace dsoar
