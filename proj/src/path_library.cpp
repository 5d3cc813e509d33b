#include "dsoar/path_library.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

#include "dsoar/rng.hpp"

namespace dsoar {

using nlohmann::json;

namespace {

void check_axis(const std::vector<double> &axis, const char *name) {
    if (axis.empty()) throw std::invalid_argument(std::string("library axis empty: ") + name);
    for (std::size_t i = 1; i < axis.size(); ++i)
        if (!(axis[i] > axis[i - 1]))
            throw std::invalid_argument(std::string("library axis not strictly increasing: ") + name);
}

std::vector<double> parse_axis(const std::string &text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string tok = text.substr(start, comma == std::string::npos ? std::string::npos
                                                                              : comma - start);
        if (!tok.empty()) out.push_back(std::stod(tok));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

json wind_to_json(const WindFieldParams &w) {
    return json{{"w0x", w.w0x}, {"w0y", w.w0y}, {"bx", w.bx},
                {"by", w.by},   {"s", w.s},     {"h", w.h}};
}

WindFieldParams wind_from_json(const json &j) {
    WindFieldParams w;
    w.w0x = j.at("w0x");
    w.w0y = j.at("w0y");
    w.bx = j.at("bx");
    w.by = j.at("by");
    w.s = j.at("s");
    w.h = j.at("h");
    return w;
}

json spline_to_json(const PathSpline &sp) {
    json coeffs = json::array();
    for (int d = 0; d < 3; ++d) {
        json row = json::array();
        for (int i = 0; i < kSplineBasisCount; ++i) row.push_back(sp.coeffs(d, i));
        coeffs.push_back(row);
    }
    return json{{"coeffs", coeffs},
                {"design_wind", wind_to_json(sp.design_wind)},
                {"design_airspeed", sp.design_airspeed}};
}

PathSpline spline_from_json(const json &j) {
    PathSpline sp;
    const auto &coeffs = j.at("coeffs");
    if (coeffs.size() != 3) throw std::runtime_error("path spline: expected 3 coefficient rows");
    for (int d = 0; d < 3; ++d) {
        const auto &row = coeffs.at(d);
        if (row.size() != kSplineBasisCount)
            throw std::runtime_error("path spline: expected 16 coefficients per row");
        for (int i = 0; i < kSplineBasisCount; ++i) sp.coeffs(d, i) = row.at(i);
    }
    sp.design_wind = wind_from_json(j.at("design_wind"));
    sp.design_airspeed = j.at("design_airspeed");
    return sp;
}

}  // namespace

void LibraryAxes::validate() const {
    check_axis(w_max, "w_max");
    check_axis(s, "s");
    check_axis(h, "h");
    check_axis(v0, "v0");
}

LibraryAxes LibraryAxes::from_config(Config &cfg, const std::string &section) {
    LibraryAxes axes;
    axes.w_max = parse_axis(cfg.get_or(section + ".w_max_axis_mps", std::string("8,10,12")));
    axes.s = parse_axis(cfg.get_or(section + ".s_axis_per_m", std::string("0.4")));
    axes.h = parse_axis(cfg.get_or(section + ".h_axis_m", std::string("0")));
    axes.v0 = parse_axis(cfg.get_or(section + ".v0_axis_mps", std::string("15,20,25")));
    axes.validate();
    return axes;
}

const LibraryEntry &PathLibrary::at(int iw, int is, int ih, int iv) const {
    const std::size_t ns = axes.s.size();
    const std::size_t nh = axes.h.size();
    const std::size_t nv = axes.v0.size();
    const std::size_t flat = ((static_cast<std::size_t>(iw) * ns + is) * nh + ih) * nv + iv;
    return entries.at(flat);
}

int PathLibrary::feasible_count() const {
    int n = 0;
    for (const auto &e : entries) n += e.feasible ? 1 : 0;
    return n;
}

std::string airframe_hash(const AircraftParams &p) {
    Config cfg;
    AircraftParams copy = p;
    cfg.set_double("a.mass", copy.mass);
    cfg.set_double("a.wing_area", copy.wing_area);
    cfg.set_double("a.rho", copy.rho);
    cfg.set_double("a.cl0", copy.cl0);
    cfg.set_double("a.cl1", copy.cl1);
    cfg.set_double("a.cd0", copy.cd0);
    cfg.set_double("a.cd1", copy.cd1);
    cfg.set_double("a.cd2", copy.cd2);
    const std::string text = cfg.serialize();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

WindFieldParams node_wind_field(const PathLibrary &lib, int iw, int is, int ih) {
    WindFieldParams w = lib.base_field;
    const double base_amp = std::hypot(w.w0x, w.w0y);
    double dir_x = 1.0;
    double dir_y = 0.0;
    if (base_amp > 1e-9) {
        dir_x = w.w0x / base_amp;
        dir_y = w.w0y / base_amp;
    }
    w.w0x = lib.axes.w_max[iw] * dir_x;
    w.w0y = lib.axes.w_max[iw] * dir_y;
    w.s = lib.axes.s[is];
    w.h = lib.axes.h[ih];
    return w;
}

PathLibrary build_path_library(const LibraryAxes &axes, const AircraftParams &aircraft,
                               const OcpConfig &cfg, const WindFieldParams &base_field,
                               const WindSigmas &sigmas, int scenario_count, std::uint64_t seed) {
    axes.validate();
    if (scenario_count < 0) throw std::invalid_argument("scenario_count must be >= 0");

    PathLibrary lib;
    lib.axes = axes;
    lib.base_field = base_field;
    lib.sigmas = sigmas;
    lib.scenarios_per_node = scenario_count;
    lib.seed = seed;
    lib.airframe_hash = airframe_hash(aircraft);

    const int nw = static_cast<int>(axes.w_max.size());
    const int ns = static_cast<int>(axes.s.size());
    const int nh = static_cast<int>(axes.h.size());
    const int nv = static_cast<int>(axes.v0.size());
    lib.entries.resize(axes.node_count());

    struct Solved {
        std::array<int, 4> idx;
        OcpWarmStart warm;
    };
    std::vector<Solved> solved;

    std::size_t flat = 0;
    std::uint64_t node_counter = 0;
    for (int iw = 0; iw < nw; ++iw) {
        for (int is = 0; is < ns; ++is) {
            for (int ih = 0; ih < nh; ++ih) {
                for (int iv = 0; iv < nv; ++iv, ++flat, ++node_counter) {
                    LibraryEntry &entry = lib.entries[flat];
                    entry.idx = {iw, is, ih, iv};

                    const WindFieldParams nominal = node_wind_field(lib, iw, is, ih);
                    const ScenarioSet set = sample_perturbed_fields(
                        nominal, sigmas, scenario_count, derive_seed(seed, node_counter));
                    const V0Range v0 = V0Range::fixed(axes.v0[iv]);

                    // Warm start from the closest already-solved node.
                    const OcpWarmStart *warm = nullptr;
                    double best = 1e18;
                    for (const auto &s : solved) {
                        double d = 0;
                        for (int k = 0; k < 4; ++k) {
                            const double dd = s.idx[k] - entry.idx[k];
                            d += dd * dd;
                        }
                        if (d < best) {
                            best = d;
                            warm = &s.warm;
                        }
                    }

                    RobustSolution sol;
                    try {
                        sol = solve_robust_ocp(set, v0, aircraft, cfg, warm);
                    } catch (const std::exception &ex) {
                        entry.failure = ex.what();
                        continue;
                    }
                    if (!sol.feasible) {
                        entry.failure = sol.diag.message;
                        continue;
                    }
                    entry.feasible = true;
                    entry.spline = sol.path;
                    entry.objective = sol.objective;
                    solved.push_back({entry.idx,
                                      OcpWarmStart{sol.scenarios.front().states.leftCols(3),
                                                   sol.scenarios}});
                }
            }
        }
    }
    return lib;
}

const LibraryEntry &select_path(const PathLibrary &lib, const WindFieldParams &wind, double v) {
    if (lib.entries.empty()) throw std::runtime_error("select_path: empty library");
    const double q_wmax = std::hypot(wind.w0x, wind.w0y);

    auto span = [](const std::vector<double> &axis) {
        return axis.size() > 1 ? axis.back() - axis.front() : 1.0;
    };
    const double sw = span(lib.axes.w_max);
    const double ss = span(lib.axes.s);
    const double sh = span(lib.axes.h);
    const double sv = span(lib.axes.v0);

    const LibraryEntry *best = nullptr;
    double best_d = 1e300;
    double best_wmax = 1e300;
    for (const auto &e : lib.entries) {
        if (!e.feasible) continue;
        const double ew = lib.axes.w_max[e.idx[0]];
        const double dw = (ew - q_wmax) / sw;
        const double ds = (lib.axes.s[e.idx[1]] - wind.s) / ss;
        const double dh = (lib.axes.h[e.idx[2]] - wind.h) / sh;
        const double dv = (lib.axes.v0[e.idx[3]] - v) / sv;
        const double d = dw * dw + ds * ds + dh * dh + dv * dv;
        if (d < best_d - 1e-12 || (std::abs(d - best_d) <= 1e-12 && ew < best_wmax)) {
            best = &e;
            best_d = d;
            best_wmax = ew;
        }
    }
    if (best == nullptr) throw std::runtime_error("select_path: no feasible entries");
    return *best;
}

void save_path_library(const PathLibrary &lib, const std::string &path) {
    json j;
    j["format_version"] = lib.format_version;
    j["airframe_hash"] = lib.airframe_hash;
    j["axes"] = json{{"w_max", lib.axes.w_max}, {"s", lib.axes.s}, {"h", lib.axes.h},
                     {"v0", lib.axes.v0}};
    j["base_field"] = wind_to_json(lib.base_field);
    j["sigmas"] = json{{"w0x", lib.sigmas.w0x}, {"w0y", lib.sigmas.w0y}, {"bx", lib.sigmas.bx},
                       {"by", lib.sigmas.by},   {"s", lib.sigmas.s},     {"h", lib.sigmas.h}};
    j["scenarios_per_node"] = lib.scenarios_per_node;
    j["seed"] = lib.seed;
    json entries = json::array();
    for (const auto &e : lib.entries) {
        json je;
        je["idx"] = e.idx;
        je["feasible"] = e.feasible;
        if (e.feasible) {
            je["spline"] = spline_to_json(e.spline);
            je["objective"] = e.objective;
        } else {
            je["failure"] = e.failure;
        }
        entries.push_back(je);
    }
    j["entries"] = entries;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write library file: " + path);
    out << j.dump(1) << "\n";
}

PathLibrary load_path_library(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open library file: " + path);
    json j;
    in >> j;

    PathLibrary lib;
    lib.format_version = j.at("format_version");
    if (lib.format_version != 1) throw std::runtime_error("unsupported library format version");
    lib.airframe_hash = j.at("airframe_hash");
    lib.axes.w_max = j.at("axes").at("w_max").get<std::vector<double>>();
    lib.axes.s = j.at("axes").at("s").get<std::vector<double>>();
    lib.axes.h = j.at("axes").at("h").get<std::vector<double>>();
    lib.axes.v0 = j.at("axes").at("v0").get<std::vector<double>>();
    lib.axes.validate();
    lib.base_field = wind_from_json(j.at("base_field"));
    lib.sigmas.w0x = j.at("sigmas").at("w0x");
    lib.sigmas.w0y = j.at("sigmas").at("w0y");
    lib.sigmas.bx = j.at("sigmas").at("bx");
    lib.sigmas.by = j.at("sigmas").at("by");
    lib.sigmas.s = j.at("sigmas").at("s");
    lib.sigmas.h = j.at("sigmas").at("h");
    lib.scenarios_per_node = j.at("scenarios_per_node");
    lib.seed = j.at("seed");
    for (const auto &je : j.at("entries")) {
        LibraryEntry e;
        const auto idx = je.at("idx").get<std::vector<int>>();
        if (idx.size() != 4) throw std::runtime_error("library entry index must have 4 components");
        std::copy(idx.begin(), idx.end(), e.idx.begin());
        e.feasible = je.at("feasible");
        if (e.feasible) {
            e.spline = spline_from_json(je.at("spline"));
            e.objective = je.at("objective");
        } else {
            e.failure = je.value("failure", "");
        }
        lib.entries.push_back(e);
    }
    if (lib.entries.size() != lib.axes.node_count())
        throw std::runtime_error("library entry count does not match axes");
    return lib;
}

void save_path_spline(const PathSpline &spline, const std::string &path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write path file: " + path);
    out << spline_to_json(spline).dump(1) << "\n";
}

PathSpline load_path_spline(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open path file: " + path);
    json j;
    in >> j;
    return spline_from_json(j);
}

}  // namespace dsoar
