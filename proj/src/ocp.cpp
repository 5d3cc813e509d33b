#include "dsoar/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dsoar {

namespace {

using Eigen::VectorXd;

constexpr int kLocals = 15;  // variables touched by one interval's defects

/// Trapezoidal defect of one interval, scalar-generic. Locals:
/// [p_i(3), p_{i+1}(3), vgp_i(3), vgp_{i+1}(3), u_i(2), t_i].
template <typename T>
void interval_defects(const WindFieldParams &wind, const AircraftParams &p, const T loc[kLocals],
                      T out[6]) {
    const T x_a[6] = {loc[0], loc[1], loc[2], loc[6], loc[7], loc[8]};
    const T x_b[6] = {loc[3], loc[4], loc[5], loc[9], loc[10], loc[11]};
    const T u[2] = {loc[12], loc[13]};
    const T &t = loc[14];
    T f_a[6], f_b[6];
    point_mass_derivative_t(x_a, u, wind, p, f_a);
    point_mass_derivative_t(x_b, u, wind, p, f_b);
    for (int r = 0; r < 6; ++r) out[r] = x_b[r] - x_a[r] - t * T(0.5) * (f_a[r] + f_b[r]);
}

class RobustOcpProblem : public nlp::Problem {
  public:
    RobustOcpProblem(const ScenarioSet &scenarios, const V0Range &v0, const AircraftParams &p,
                     const OcpConfig &cfg, int winding)
        : scen_(scenarios), v0_(v0), p_(p), cfg_(cfg), winding_(winding),
          n_(cfg.nodes), m_(scenarios.count() - 1) {
        per_scen_ = 3 * (n_ + 1) + 3 * n_;
        sigma_idx_ = 3 * (n_ + 1);
        num_vars_ = 3 * (n_ + 1) + 1 + (m_ + 1) * per_scen_;

        num_eq_ = (m_ + 1) * 6 * n_ + 2;
        if (cfg_.periodic) num_eq_ += 3 + 2 * (m_ + 1);
        num_ineq_ = (m_ + 1);
        if (cfg_.anchor_lowest_start) num_ineq_ += n_;
        num_ineq_ += (m_ + 1) * 2 * n_;

        scale_.resize(num_vars_);
        for (int i = 0; i <= n_; ++i)
            for (int d = 0; d < 3; ++d) scale_[pos_idx(i, d)] = 10.0;
        scale_[sigma_idx_] = 10.0;
        for (int j = 0; j <= m_; ++j) {
            for (int i = 0; i <= n_; ++i) {
                scale_[vgp_idx(j, i, 0)] = 10.0;
                scale_[vgp_idx(j, i, 1)] = 0.5;
                scale_[vgp_idx(j, i, 2)] = 1.0;
            }
            for (int i = 0; i < n_; ++i) {
                scale_[input_idx(j, i, 0)] = 0.5;
                scale_[input_idx(j, i, 1)] = 0.5;
                scale_[dur_idx(j, i)] = 0.1;
            }
        }
    }

    // Variable indexing (scaled vector).
    int pos_idx(int i, int d) const { return 3 * i + d; }
    int vgp_idx(int j, int i, int k) const { return sigma_idx_ + 1 + j * per_scen_ + 3 * i + k; }
    int input_idx(int j, int i, int k) const {
        return sigma_idx_ + 1 + j * per_scen_ + 3 * (n_ + 1) + 2 * i + k;
    }
    int dur_idx(int j, int i) const {
        return sigma_idx_ + 1 + j * per_scen_ + 3 * (n_ + 1) + 2 * n_ + i;
    }
    int sigma_index() const { return sigma_idx_; }
    const VectorXd &scales() const { return scale_; }

    int num_vars() const override { return num_vars_; }
    int num_eq() const override { return num_eq_; }
    int num_ineq() const override { return num_ineq_; }

    double objective(const VectorXd &x, VectorXd *grad) const override {
        if (grad) {
            grad->setZero(num_vars_);
            (*grad)[sigma_idx_] = -scale_[sigma_idx_];
        }
        return -scale_[sigma_idx_] * x[sigma_idx_];
    }

    void constraints(const VectorXd &x, VectorXd &ce, VectorXd &ci) const override {
        evaluate(x, ce, ci, nullptr, nullptr);
    }

    void jacobians(const VectorXd &x, std::vector<Eigen::Triplet<double>> &je,
                   std::vector<Eigen::Triplet<double>> &ji) const override {
        VectorXd ce, ci;
        evaluate(x, ce, ci, &je, &ji);
    }

    void bounds(VectorXd &lo, VectorXd &hi) const override {
        const auto &b = cfg_.bounds;
        lo.resize(num_vars_);
        hi.resize(num_vars_);
        for (int i = 0; i <= n_; ++i) {
            lo[pos_idx(i, 0)] = -b.xy_max / scale_[pos_idx(i, 0)];
            hi[pos_idx(i, 0)] = b.xy_max / scale_[pos_idx(i, 0)];
            lo[pos_idx(i, 1)] = -b.xy_max / scale_[pos_idx(i, 1)];
            hi[pos_idx(i, 1)] = b.xy_max / scale_[pos_idx(i, 1)];
            lo[pos_idx(i, 2)] = b.z_min / scale_[pos_idx(i, 2)];
            hi[pos_idx(i, 2)] = b.z_max / scale_[pos_idx(i, 2)];
        }
        lo[sigma_idx_] = 0.0;
        hi[sigma_idx_] = b.v_max / scale_[sigma_idx_];
        for (int j = 0; j <= m_; ++j) {
            for (int i = 0; i <= n_; ++i) {
                lo[vgp_idx(j, i, 0)] = b.v_min / scale_[vgp_idx(j, i, 0)];
                hi[vgp_idx(j, i, 0)] = b.v_max / scale_[vgp_idx(j, i, 0)];
                lo[vgp_idx(j, i, 1)] = -b.gamma_max / scale_[vgp_idx(j, i, 1)];
                hi[vgp_idx(j, i, 1)] = b.gamma_max / scale_[vgp_idx(j, i, 1)];
                lo[vgp_idx(j, i, 2)] = -6.0 * M_PI / scale_[vgp_idx(j, i, 2)];
                hi[vgp_idx(j, i, 2)] = 6.0 * M_PI / scale_[vgp_idx(j, i, 2)];
            }
            // Fixed initial airspeed enters through its bounds.
            lo[vgp_idx(j, 0, 0)] = v0_.lo / scale_[vgp_idx(j, 0, 0)];
            hi[vgp_idx(j, 0, 0)] = v0_.hi / scale_[vgp_idx(j, 0, 0)];
            for (int i = 0; i < n_; ++i) {
                lo[input_idx(j, i, 0)] = b.cl_min / scale_[input_idx(j, i, 0)];
                hi[input_idx(j, i, 0)] = b.cl_max / scale_[input_idx(j, i, 0)];
                lo[input_idx(j, i, 1)] = -b.mu_max / scale_[input_idx(j, i, 1)];
                hi[input_idx(j, i, 1)] = b.mu_max / scale_[input_idx(j, i, 1)];
                lo[dur_idx(j, i)] = b.t_min / scale_[dur_idx(j, i)];
                hi[dur_idx(j, i)] = b.t_max / scale_[dur_idx(j, i)];
            }
        }
    }

  private:
    void evaluate(const VectorXd &x, VectorXd &ce, VectorXd &ci,
                  std::vector<Eigen::Triplet<double>> *je,
                  std::vector<Eigen::Triplet<double>> *ji) const {
        ce.resize(num_eq_);
        ci.resize(num_ineq_);

        auto phys = [&](int idx) { return x[idx] * scale_[idx]; };

        // Collocation defects.
        for (int j = 0; j <= m_; ++j) {
            const WindFieldParams &wind = scen_.fields[j];
            for (int i = 0; i < n_; ++i) {
                int locals[kLocals];
                for (int d = 0; d < 3; ++d) {
                    locals[d] = pos_idx(i, d);
                    locals[3 + d] = pos_idx(i + 1, d);
                    locals[6 + d] = vgp_idx(j, i, d);
                    locals[9 + d] = vgp_idx(j, i + 1, d);
                }
                locals[12] = input_idx(j, i, 0);
                locals[13] = input_idx(j, i, 1);
                locals[14] = dur_idx(j, i);

                const int row0 = (j * n_ + i) * 6;
                if (je == nullptr) {
                    double loc[kLocals], out[6];
                    for (int k = 0; k < kLocals; ++k) loc[k] = phys(locals[k]);
                    interval_defects(wind, p_, loc, out);
                    for (int r = 0; r < 6; ++r) ce[row0 + r] = out[r];
                } else {
                    using D = Dual<kLocals>;
                    D loc[kLocals], out[6];
                    for (int k = 0; k < kLocals; ++k) loc[k] = D::seeded(phys(locals[k]), k);
                    interval_defects(wind, p_, loc, out);
                    for (int r = 0; r < 6; ++r) {
                        ce[row0 + r] = out[r].v;
                        for (int k = 0; k < kLocals; ++k) {
                            const double val = out[r].d[k] * scale_[locals[k]];
                            if (val != 0.0) je->emplace_back(row0 + r, locals[k], val);
                        }
                    }
                }
            }
        }

        // Anchors and periodicity.
        int row = (m_ + 1) * 6 * n_;
        ce[row] = phys(pos_idx(0, 0));
        ce[row + 1] = phys(pos_idx(0, 1));
        if (je) {
            je->emplace_back(row, pos_idx(0, 0), scale_[pos_idx(0, 0)]);
            je->emplace_back(row + 1, pos_idx(0, 1), scale_[pos_idx(0, 1)]);
        }
        row += 2;
        if (cfg_.periodic) {
            for (int d = 0; d < 3; ++d) {
                ce[row + d] = phys(pos_idx(n_, d)) - phys(pos_idx(0, d));
                if (je) {
                    je->emplace_back(row + d, pos_idx(n_, d), scale_[pos_idx(n_, d)]);
                    je->emplace_back(row + d, pos_idx(0, d), -scale_[pos_idx(0, d)]);
                }
            }
            row += 3;
            for (int j = 0; j <= m_; ++j) {
                ce[row] = phys(vgp_idx(j, n_, 1)) - phys(vgp_idx(j, 0, 1));
                ce[row + 1] =
                    phys(vgp_idx(j, n_, 2)) - phys(vgp_idx(j, 0, 2)) - 2.0 * M_PI * winding_;
                if (je) {
                    je->emplace_back(row, vgp_idx(j, n_, 1), scale_[vgp_idx(j, n_, 1)]);
                    je->emplace_back(row, vgp_idx(j, 0, 1), -scale_[vgp_idx(j, 0, 1)]);
                    je->emplace_back(row + 1, vgp_idx(j, n_, 2), scale_[vgp_idx(j, n_, 2)]);
                    je->emplace_back(row + 1, vgp_idx(j, 0, 2), -scale_[vgp_idx(j, 0, 2)]);
                }
                row += 2;
            }
        }

        // Inequalities: epigraph slack under every scenario's terminal speed.
        int irow = 0;
        for (int j = 0; j <= m_; ++j) {
            ci[irow] = phys(vgp_idx(j, n_, 0)) - phys(sigma_idx_);
            if (ji) {
                ji->emplace_back(irow, vgp_idx(j, n_, 0), scale_[vgp_idx(j, n_, 0)]);
                ji->emplace_back(irow, sigma_idx_, -scale_[sigma_idx_]);
            }
            ++irow;
        }
        if (cfg_.anchor_lowest_start) {
            for (int i = 1; i <= n_; ++i) {
                ci[irow] = phys(pos_idx(i, 2)) - phys(pos_idx(0, 2));
                if (ji) {
                    ji->emplace_back(irow, pos_idx(i, 2), scale_[pos_idx(i, 2)]);
                    ji->emplace_back(irow, pos_idx(0, 2), -scale_[pos_idx(0, 2)]);
                }
                ++irow;
            }
        }
        // Load factor |0.5 rho A V^2 C_L| <= n_max m g at each interval start.
        const double load_k = 0.5 * p_.rho * p_.wing_area / (p_.mass * kGravity);
        for (int j = 0; j <= m_; ++j) {
            for (int i = 0; i < n_; ++i) {
                const double v = phys(vgp_idx(j, i, 0));
                const double cl = phys(input_idx(j, i, 0));
                const double load = load_k * v * v * cl;
                ci[irow] = cfg_.bounds.load_max_g - load;
                ci[irow + 1] = cfg_.bounds.load_max_g + load;
                if (ji) {
                    const double dv = load_k * 2.0 * v * cl * scale_[vgp_idx(j, i, 0)];
                    const double dcl = load_k * v * v * scale_[input_idx(j, i, 0)];
                    ji->emplace_back(irow, vgp_idx(j, i, 0), -dv);
                    ji->emplace_back(irow, input_idx(j, i, 0), -dcl);
                    ji->emplace_back(irow + 1, vgp_idx(j, i, 0), dv);
                    ji->emplace_back(irow + 1, input_idx(j, i, 0), dcl);
                }
                irow += 2;
            }
        }
    }

    ScenarioSet scen_;
    V0Range v0_;
    AircraftParams p_;
    OcpConfig cfg_;
    int winding_;
    int n_;
    int m_;
    int per_scen_ = 0;
    int sigma_idx_ = 0;
    int num_vars_ = 0;
    int num_eq_ = 0;
    int num_ineq_ = 0;
    VectorXd scale_;
};

double wrap_to_pi(double a) {
    while (a > M_PI) a -= 2.0 * M_PI;
    while (a < -M_PI) a += 2.0 * M_PI;
    return a;
}

int guess_winding(const OcpWarmStart &warm) {
    const auto &states = warm.scenarios.front().states;
    const double dpsi = states(states.rows() - 1, 5) - states(0, 5);
    return static_cast<int>(std::lround(dpsi / (2.0 * M_PI)));
}

VectorXd pack_warm_start(const RobustOcpProblem &prob, const OcpWarmStart &warm, int n, int m) {
    if (warm.positions.rows() != n + 1)
        throw std::invalid_argument("warm start node count mismatch");
    const bool replicate = warm.scenarios.size() == 1;
    if (!replicate && static_cast<int>(warm.scenarios.size()) != m + 1)
        throw std::invalid_argument("warm start scenario count mismatch");

    VectorXd x = VectorXd::Zero(prob.num_vars());
    const VectorXd &sc = prob.scales();
    for (int i = 0; i <= n; ++i)
        for (int d = 0; d < 3; ++d)
            x[prob.pos_idx(i, d)] = warm.positions(i, d) / sc[prob.pos_idx(i, d)];

    double min_terminal = 1e9;
    for (int j = 0; j <= m; ++j) {
        const ScenarioTrajectory &traj = warm.scenarios[replicate ? 0 : j];
        for (int i = 0; i <= n; ++i)
            for (int k = 0; k < 3; ++k)
                x[prob.vgp_idx(j, i, k)] = traj.states(i, 3 + k) / sc[prob.vgp_idx(j, i, k)];
        for (int i = 0; i < n; ++i) {
            x[prob.input_idx(j, i, 0)] = traj.inputs(i, 0) / sc[prob.input_idx(j, i, 0)];
            x[prob.input_idx(j, i, 1)] = traj.inputs(i, 1) / sc[prob.input_idx(j, i, 1)];
            x[prob.dur_idx(j, i)] = traj.durations[i] / sc[prob.dur_idx(j, i)];
        }
        min_terminal = std::min(min_terminal, traj.terminal_airspeed());
    }
    x[prob.sigma_index()] = std::max(0.0, min_terminal - 0.5) / sc[prob.sigma_index()];
    return x;
}

}  // namespace

OcpConfig::OcpConfig() {
    solver.tol_feasibility = 1e-7;
    solver.tol_stationarity = 1e-6;
    solver.max_iterations = 3000;
}

OcpConfig OcpConfig::from_config(Config &cfg, const std::string &sec) {
    OcpConfig c;
    c.nodes = static_cast<int>(cfg.get_or(sec + ".nodes", static_cast<std::int64_t>(c.nodes)));
    if (c.nodes < 20) throw ConfigError("ocp.nodes must be >= 20");
    c.bounds.v_min = cfg.get_or(sec + ".v_min_mps", c.bounds.v_min);
    c.bounds.v_max = cfg.get_or(sec + ".v_max_mps", c.bounds.v_max);
    c.bounds.gamma_max = cfg.get_or(sec + ".gamma_max_rad", c.bounds.gamma_max);
    c.bounds.cl_min = cfg.get_or(sec + ".cl_min", c.bounds.cl_min);
    c.bounds.cl_max = cfg.get_or(sec + ".cl_max", c.bounds.cl_max);
    c.bounds.mu_max = cfg.get_or(sec + ".mu_max_rad", c.bounds.mu_max);
    c.bounds.z_min = cfg.get_or(sec + ".z_min_m", c.bounds.z_min);
    c.bounds.z_max = cfg.get_or(sec + ".z_max_m", c.bounds.z_max);
    c.bounds.xy_max = cfg.get_or(sec + ".xy_max_m", c.bounds.xy_max);
    c.bounds.load_max_g = cfg.get_or(sec + ".load_max_g", c.bounds.load_max_g);
    c.bounds.t_min = cfg.get_or(sec + ".t_min_s", c.bounds.t_min);
    c.bounds.t_max = cfg.get_or(sec + ".t_max_s", c.bounds.t_max);
    c.periodic = cfg.get_or(sec + ".periodic", c.periodic);
    c.anchor_lowest_start = cfg.get_or(sec + ".anchor_lowest_start", c.anchor_lowest_start);
    c.guess_incline_deg = cfg.get_or(sec + ".guess_incline_deg", c.guess_incline_deg);
    c.guess_radius = cfg.get_or(sec + ".guess_radius_m", c.guess_radius);
    c.solver.tol_feasibility = cfg.get_or(sec + ".tol_feasibility", c.solver.tol_feasibility);
    c.solver.tol_stationarity = cfg.get_or(sec + ".tol_stationarity", c.solver.tol_stationarity);
    c.solver.max_iterations = static_cast<int>(
        cfg.get_or(sec + ".max_iterations", static_cast<std::int64_t>(c.solver.max_iterations)));
    c.solver.max_outer =
        static_cast<int>(cfg.get_or(sec + ".max_outer", static_cast<std::int64_t>(c.solver.max_outer)));
    return c;
}

OcpWarmStart initial_guess_circle(const WindFieldParams &wind, const V0Range &v0,
                                  const AircraftParams &aircraft, const OcpConfig &cfg) {
    const int n = cfg.nodes;
    const double speed = 0.5 * (v0.lo + v0.hi);
    const double incline = cfg.guess_incline_deg * M_PI / 180.0;

    double radius = cfg.guess_radius;
    if (radius <= 0.0) {
        // Bank-limited turn radius with margin.
        radius = std::max(speed * speed / (kGravity * std::tan(0.9 * cfg.bounds.mu_max)), 12.0);
    }

    // Downwind/crosswind frame; default east when the field is calm.
    const double wind_norm = std::hypot(wind.w0x, wind.w0y);
    const double phi = wind_norm > 1e-6 ? std::atan2(wind.w0y, wind.w0x) : 0.0;
    const Eigen::Vector3d e_dw(std::cos(phi), std::sin(phi), 0.0);
    const Eigen::Vector3d e_cw(-std::sin(phi), std::cos(phi), 0.0);
    const Eigen::Vector3d e_tilt = std::cos(incline) * Eigen::Vector3d::UnitZ() -
                                   std::sin(incline) * e_dw;

    // Lowest point a bit below the layer midpoint, clipped to the floor.
    const double half_depth = 2.5 / std::max(wind.s, 0.05);
    double z_center = wind.h - half_depth + radius * std::cos(incline);
    z_center = std::max(z_center, cfg.bounds.z_min + 1.0 + radius * std::cos(incline));
    z_center = std::min(z_center, cfg.bounds.z_max - 1.0 - radius * std::cos(incline));

    const double period = 2.0 * M_PI * radius / speed;
    const double dt = std::clamp(period / n, cfg.bounds.t_min + 1e-3, cfg.bounds.t_max - 1e-3);

    OcpWarmStart warm;
    warm.positions.resize(n + 1, 3);
    ScenarioTrajectory traj;
    traj.states.resize(n + 1, 6);
    traj.inputs.resize(n, 2);
    traj.durations = Eigen::VectorXd::Constant(n, dt);

    const double theta0 = -M_PI_2;  // start at the lowest point
    Eigen::Vector3d origin_shift = Eigen::Vector3d::Zero();
    double psi_prev = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double theta = theta0 + 2.0 * M_PI * i / n;
        Eigen::Vector3d pos = Eigen::Vector3d(0, 0, z_center) +
                              radius * (std::cos(theta) * e_cw + std::sin(theta) * e_tilt);
        if (i == 0) origin_shift = Eigen::Vector3d(pos.x(), pos.y(), 0.0);
        pos -= origin_shift;
        warm.positions.row(i) = pos.transpose();

        const Eigen::Vector3d d_theta =
            radius * (-std::sin(theta) * e_cw + std::cos(theta) * e_tilt);
        const Eigen::Vector3d v_inertial = d_theta * (2.0 * M_PI / period);
        const Eigen::Vector3d v_air = v_inertial - wind_at(wind, pos.z());

        const double v = std::clamp(v_air.norm(), cfg.bounds.v_min + 0.5, cfg.bounds.v_max - 0.5);
        const double gamma = std::clamp(std::asin(std::clamp(v_air.z() / v_air.norm(), -1.0, 1.0)),
                                        -cfg.bounds.gamma_max + 0.05, cfg.bounds.gamma_max - 0.05);
        double psi = std::atan2(v_air.y(), v_air.x());
        if (i > 0) psi = psi_prev + wrap_to_pi(psi - psi_prev);
        psi_prev = psi;

        traj.states.row(i) << pos.x(), pos.y(), pos.z(), v, gamma, psi;
        if (i < n) {
            const double q_bar_area = 0.5 * aircraft.rho * v * v * aircraft.wing_area;
            const double cl_trim = aircraft.mass * kGravity / std::max(q_bar_area, 1.0);
            const double mu = std::atan2(speed * speed, radius * kGravity);
            traj.inputs.row(i) << std::clamp(cl_trim, 0.2, 0.9 * cfg.bounds.cl_max),
                std::clamp(mu, 0.2, 0.95 * cfg.bounds.mu_max);
        }
    }
    warm.scenarios.push_back(std::move(traj));
    return warm;
}

RobustSolution solve_robust_ocp(const ScenarioSet &scenarios, const V0Range &v0,
                                const AircraftParams &aircraft, const OcpConfig &cfg,
                                const OcpWarmStart *warm) {
    if (scenarios.count() < 1) throw std::invalid_argument("solve_robust_ocp: empty scenario set");
    if (cfg.nodes < 20) throw std::invalid_argument("solve_robust_ocp: need at least 20 nodes");
    for (const auto &f : scenarios.fields) f.validate();

    const int n = cfg.nodes;
    const int m = scenarios.count() - 1;

    OcpWarmStart guess;
    if (warm == nullptr) guess = initial_guess_circle(scenarios.nominal(), v0, aircraft, cfg);
    const OcpWarmStart &start = warm != nullptr ? *warm : guess;
    const int winding = cfg.periodic ? guess_winding(start) : 0;

    RobustOcpProblem problem(scenarios, v0, aircraft, cfg, winding);
    const VectorXd x0 = pack_warm_start(problem, start, n, m);

    const nlp::SolveResult res = nlp::solve_augmented_lagrangian(problem, x0, cfg.solver);

    RobustSolution sol;
    sol.diag.status = res.status;
    sol.diag.message = res.message;
    sol.diag.outer_iterations = res.outer_iterations;
    sol.diag.inner_iterations = res.inner_iterations;
    sol.diag.feasibility = res.feasibility;
    sol.diag.stationarity = res.stationarity;
    sol.diag.common_path_residual = 0.0;  // positions are shared structurally
    sol.feasible = res.converged();

    const VectorXd &x = res.x;
    const VectorXd &sc = problem.scales();
    auto phys = [&](int idx) { return x[idx] * sc[idx]; };

    sol.scenarios.resize(m + 1);
    double objective = 1e9;
    for (int j = 0; j <= m; ++j) {
        ScenarioTrajectory traj;
        traj.states.resize(n + 1, 6);
        traj.inputs.resize(n, 2);
        traj.durations.resize(n);
        for (int i = 0; i <= n; ++i) {
            traj.states(i, 0) = phys(problem.pos_idx(i, 0));
            traj.states(i, 1) = phys(problem.pos_idx(i, 1));
            traj.states(i, 2) = phys(problem.pos_idx(i, 2));
            traj.states(i, 3) = phys(problem.vgp_idx(j, i, 0));
            traj.states(i, 4) = phys(problem.vgp_idx(j, i, 1));
            traj.states(i, 5) = phys(problem.vgp_idx(j, i, 2));
        }
        for (int i = 0; i < n; ++i) {
            traj.inputs(i, 0) = phys(problem.input_idx(j, i, 0));
            traj.inputs(i, 1) = phys(problem.input_idx(j, i, 1));
            traj.durations[i] = phys(problem.dur_idx(j, i));
        }
        objective = std::min(objective, traj.terminal_airspeed());
        sol.scenarios[j] = std::move(traj);
    }
    sol.objective = objective;

    // Spline parameter: normalized cumulative time of the nominal scenario.
    const ScenarioTrajectory &nom = sol.scenarios.front();
    sol.node_tau.resize(n + 1);
    sol.node_tau[0] = 0.0;
    for (int i = 0; i < n; ++i) sol.node_tau[i + 1] = sol.node_tau[i] + nom.durations[i];
    const double total = sol.node_tau[n];
    if (total > 0.0) sol.node_tau /= total;

    std::vector<std::pair<double, Eigen::Vector3d>> pts;
    pts.reserve(n + 1);
    for (int i = 0; i <= n; ++i)
        pts.emplace_back(sol.node_tau[i], Eigen::Vector3d(nom.states(i, 0), nom.states(i, 1),
                                                          nom.states(i, 2)));
    try {
        SplineFit fit = fit_path_spline(pts);
        sol.path = fit.spline;
        sol.diag.spline_fit_rms = fit.residual_rms;
    } catch (const std::exception &) {
        sol.diag.spline_fit_rms = -1.0;
    }
    sol.path.design_wind = scenarios.nominal();
    sol.path.design_airspeed = nom.initial_airspeed();
    return sol;
}

Eigen::MatrixXd replay_trajectory(const ScenarioTrajectory &traj, const WindFieldParams &wind,
                                  const AircraftParams &aircraft, int substeps) {
    const int n = static_cast<int>(traj.durations.size());
    Eigen::MatrixXd out(n + 1, 6);
    out.row(0) = traj.states.row(0);
    KinematicState s = KinematicState::from_vector(traj.states.row(0).transpose());
    for (int i = 0; i < n; ++i) {
        const KinematicInput u{traj.inputs(i, 0), traj.inputs(i, 1)};
        const double dt = traj.durations[i] / substeps;
        for (int k = 0; k < substeps; ++k) s = point_mass_rk4_step(s, u, wind, aircraft, dt);
        out.row(i + 1) = s.to_vector().transpose();
    }
    return out;
}

}  // namespace dsoar
