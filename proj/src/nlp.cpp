#include "dsoar/nlp.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>

namespace dsoar::nlp {

namespace {

using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

VectorXd clip(const VectorXd &x, const VectorXd &lo, const VectorXd &hi) {
    return x.cwiseMax(lo).cwiseMin(hi);
}

/// Value and gradient of the augmented Lagrangian
///   L = f - lam_eq.c_eq + mu/2 |c_eq|^2 + sum_i psi(c_in_i)
/// with the shifted inequality penalty
///   psi(c) = 1/(2 mu) (max(0, lam - mu c)^2 - lam^2).
struct AugLag {
    const Problem &problem;
    VectorXd lam_eq;
    VectorXd lam_in;
    double mu = 10.0;

    // Scratch reused across evaluations.
    mutable VectorXd c_eq, c_in, grad_f;
    mutable std::vector<Eigen::Triplet<double>> t_eq, t_in;

    double value(const VectorXd &x) const {
        const double f = problem.objective(x, nullptr);
        problem.constraints(x, c_eq, c_in);
        return f + penalty_terms();
    }

    double value_and_gradient(const VectorXd &x, VectorXd &grad) const {
        const double f = problem.objective(x, &grad_f);
        problem.constraints(x, c_eq, c_in);
        t_eq.clear();
        t_in.clear();
        problem.jacobians(x, t_eq, t_in);

        grad = grad_f;
        // d/dx of the equality terms: J_eq^T (mu c - lam).
        const VectorXd w_eq = mu * c_eq - lam_eq;
        for (const auto &t : t_eq) grad[t.col()] += t.value() * w_eq[t.row()];
        // d/dx of the inequality terms: -J_in^T max(0, lam - mu c).
        const VectorXd w_in = (lam_in - mu * c_in).cwiseMax(0.0);
        for (const auto &t : t_in) grad[t.col()] -= t.value() * w_in[t.row()];

        return f + penalty_terms();
    }

    double penalty_terms() const {
        double total = -lam_eq.dot(c_eq) + 0.5 * mu * c_eq.squaredNorm();
        for (int i = 0; i < c_in.size(); ++i) {
            const double a = std::max(0.0, lam_in[i] - mu * c_in[i]);
            total += (a * a - lam_in[i] * lam_in[i]) / (2.0 * mu);
        }
        return total;
    }

    double violation() const {
        double v = c_eq.size() > 0 ? c_eq.cwiseAbs().maxCoeff() : 0.0;
        for (int i = 0; i < c_in.size(); ++i) v = std::max(v, -std::min(c_in[i], 0.0));
        return v;
    }
};

/// Projected L-BFGS for min L(x) s.t. lo <= x <= hi. Armijo backtracking on
/// the projected path; Powell-skipped curvature pairs.
struct InnerResult {
    double value = 0.0;
    double pgrad = 0.0;
    int iterations = 0;
    bool hit_limit = false;
};

InnerResult minimize_projected_lbfgs(const AugLag &al, VectorXd &x, const VectorXd &lo,
                                     const VectorXd &hi, double tol, int max_iter, int memory) {
    const int n = static_cast<int>(x.size());
    std::deque<VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;

    VectorXd grad(n), grad_new(n);
    x = clip(x, lo, hi);
    double fx = al.value_and_gradient(x, grad);

    auto projected_gradient_norm = [&](const VectorXd &xx, const VectorXd &g) {
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            const double step = std::clamp(xx[i] - g[i], lo[i], hi[i]) - xx[i];
            worst = std::max(worst, std::abs(step));
        }
        return worst;
    };

    InnerResult out;
    double gamma = 1.0;  // initial Hessian scaling
    for (int it = 0; it < max_iter; ++it) {
        out.iterations = it + 1;
        const double pg = projected_gradient_norm(x, grad);
        if (pg <= tol) {
            out.value = fx;
            out.pgrad = pg;
            out.iterations = it;
            return out;
        }

        // Two-loop recursion on the gradient, with components at active
        // bounds masked out so the direction stays in the free subspace.
        VectorXd q = grad;
        for (int i = 0; i < n; ++i) {
            const bool at_lo = x[i] <= lo[i] + 1e-14 && grad[i] > 0.0;
            const bool at_hi = x[i] >= hi[i] - 1e-14 && grad[i] < 0.0;
            if (at_lo || at_hi) q[i] = 0.0;
        }
        std::vector<double> alpha(s_hist.size());
        for (int k = static_cast<int>(s_hist.size()) - 1; k >= 0; --k) {
            alpha[k] = rho_hist[k] * s_hist[k].dot(q);
            q -= alpha[k] * y_hist[k];
        }
        q *= gamma;
        for (std::size_t k = 0; k < s_hist.size(); ++k) {
            const double beta = rho_hist[k] * y_hist[k].dot(q);
            q += (alpha[k] - beta) * s_hist[k];
        }
        VectorXd dir = -q;
        if (dir.dot(grad) > -1e-14 * dir.norm() * grad.norm()) {
            dir = -grad;  // fall back to steepest descent
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            gamma = 1.0;
        }

        // Backtracking Armijo along the projected path.
        double step = 1.0;
        const double c1 = 1e-4;
        VectorXd x_new;
        double f_new = fx;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            x_new = clip(x + step * dir, lo, hi);
            const VectorXd dx = x_new - x;
            if (dx.cwiseAbs().maxCoeff() < 1e-16) break;
            f_new = al.value(x_new);
            if (std::isfinite(f_new) && f_new <= fx + c1 * grad.dot(dx)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            out.value = fx;
            out.pgrad = pg;
            return out;  // line search exhausted: stationary for our purposes
        }

        f_new = al.value_and_gradient(x_new, grad_new);
        const VectorXd s = x_new - x;
        const VectorXd yv = grad_new - grad;
        const double sy = s.dot(yv);
        if (sy > 1e-12 * s.norm() * yv.norm()) {
            s_hist.push_back(s);
            y_hist.push_back(yv);
            rho_hist.push_back(1.0 / sy);
            gamma = sy / yv.squaredNorm();
            if (static_cast<int>(s_hist.size()) > memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        x = x_new;
        fx = f_new;
        grad = grad_new;
    }
    out.value = fx;
    out.pgrad = projected_gradient_norm(x, grad);
    out.hit_limit = true;
    return out;
}

/// Gauss-Newton polish of constraint residuals (equalities plus violated
/// inequalities) around a converged point. Keeps the point inside bounds.
void polish_feasibility(const Problem &problem, VectorXd &x, const VectorXd &lo, const VectorXd &hi,
                        double tol) {
    const int n = problem.num_vars();
    VectorXd c_eq, c_in;
    std::vector<Eigen::Triplet<double>> t_eq, t_in;

    for (int pass = 0; pass < 20; ++pass) {
        problem.constraints(x, c_eq, c_in);
        std::vector<int> active;
        for (int i = 0; i < c_in.size(); ++i)
            if (c_in[i] < 0.0) active.push_back(i);

        double viol = c_eq.size() > 0 ? c_eq.cwiseAbs().maxCoeff() : 0.0;
        for (int i : active) viol = std::max(viol, -c_in[i]);
        if (viol <= tol) return;

        t_eq.clear();
        t_in.clear();
        problem.jacobians(x, t_eq, t_in);

        const int m = static_cast<int>(c_eq.size()) + static_cast<int>(active.size());
        std::vector<int> in_row(c_in.size(), -1);
        for (std::size_t k = 0; k < active.size(); ++k)
            in_row[active[k]] = static_cast<int>(c_eq.size() + k);

        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(t_eq.size() + t_in.size());
        for (const auto &t : t_eq) trip.push_back(t);
        for (const auto &t : t_in)
            if (in_row[t.row()] >= 0) trip.emplace_back(in_row[t.row()], t.col(), t.value());

        SpMat jac(m, n);
        jac.setFromTriplets(trip.begin(), trip.end());
        VectorXd resid(m);
        resid.head(c_eq.size()) = c_eq;
        for (std::size_t k = 0; k < active.size(); ++k)
            resid[c_eq.size() + k] = c_in[active[k]];

        const SpMat jt = jac.transpose();
        SpMat normal = (jt * jac).pruned();
        for (int i = 0; i < n; ++i) normal.coeffRef(i, i) += 1e-10;
        Eigen::SimplicialLDLT<SpMat> ldlt(normal);
        if (ldlt.info() != Eigen::Success) return;
        const VectorXd delta = ldlt.solve(-jt * resid);
        if (!delta.allFinite()) return;

        const VectorXd x_try = clip(x + delta, lo, hi);
        problem.constraints(x_try, c_eq, c_in);
        double viol_try = c_eq.size() > 0 ? c_eq.cwiseAbs().maxCoeff() : 0.0;
        for (int i = 0; i < c_in.size(); ++i) viol_try = std::max(viol_try, -std::min(c_in[i], 0.0));
        if (viol_try >= viol) return;  // no progress; keep the ALM point
        x = x_try;
    }
}

}  // namespace

SolveResult solve_augmented_lagrangian(const Problem &problem, const Eigen::VectorXd &x0,
                                       const SolverOptions &options) {
    const int n = problem.num_vars();
    SolveResult result;
    if (x0.size() != n) {
        result.message = "initial point has wrong dimension";
        return result;
    }

    VectorXd lo(n), hi(n);
    problem.bounds(lo, hi);

    AugLag al{problem, VectorXd::Zero(problem.num_eq()), VectorXd::Zero(problem.num_ineq()),
              options.penalty_initial};

    VectorXd x = clip(x0, lo, hi);
    double inner_tol = std::max(1e-2, options.tol_stationarity);
    double prev_viol = std::numeric_limits<double>::infinity();
    int stalled = 0;
    int total_inner = 0;
    InnerResult inner;

    for (int outer = 0; outer < options.max_outer; ++outer) {
        result.outer_iterations = outer + 1;
        const int budget = options.max_iterations - total_inner;
        if (budget <= 0) {
            result.status = SolveStatus::IterationLimit;
            break;
        }
        inner = minimize_projected_lbfgs(al, x, lo, hi, inner_tol, budget, options.lbfgs_memory);
        total_inner += inner.iterations;

        al.value(x);  // refresh c_eq/c_in at the solution point
        const double viol = al.violation();

        if (options.verbose) {
            std::printf("[auglag] outer=%d inner=%d mu=%.1e viol=%.3e pgrad=%.3e f=%.6f\n", outer,
                        inner.iterations, al.mu, viol, inner.pgrad,
                        problem.objective(x, nullptr));
        }

        const bool feasible = viol <= options.tol_feasibility;
        const bool stationary = inner.pgrad <= options.tol_stationarity;
        if (feasible && stationary) {
            result.status = SolveStatus::Converged;
            break;
        }

        // Multiplier update when the subproblem made feasibility progress,
        // penalty growth otherwise.
        if (viol <= std::max(0.25 * prev_viol, options.tol_feasibility)) {
            al.lam_eq -= al.mu * al.c_eq;
            for (int i = 0; i < al.lam_in.size(); ++i)
                al.lam_in[i] = std::max(0.0, al.lam_in[i] - al.mu * al.c_in[i]);
            inner_tol = std::max(0.2 * inner_tol, options.tol_stationarity);
            stalled = 0;
        } else {
            al.lam_eq -= al.mu * al.c_eq;
            for (int i = 0; i < al.lam_in.size(); ++i)
                al.lam_in[i] = std::max(0.0, al.lam_in[i] - al.mu * al.c_in[i]);
            if (al.mu < options.penalty_max) {
                al.mu = std::min(al.mu * options.penalty_growth, options.penalty_max);
            } else if (viol > 0.9 * prev_viol) {
                if (++stalled >= 2) {
                    result.status = SolveStatus::LocallyInfeasible;
                    result.message = "feasibility stalled at penalty cap";
                    break;
                }
            }
            inner_tol = std::max(0.5 * inner_tol, options.tol_stationarity);
        }
        prev_viol = std::min(prev_viol, viol);

        if (outer + 1 == options.max_outer) result.status = SolveStatus::IterationLimit;
    }

    if (result.status == SolveStatus::Converged && options.polish_feasibility)
        polish_feasibility(problem, x, lo, hi, options.polish_tol);

    al.value(x);
    result.x = x;
    result.objective = problem.objective(x, nullptr);
    result.feasibility = al.violation();
    result.stationarity = inner.pgrad;
    result.inner_iterations = total_inner;
    if (result.status == SolveStatus::NumericalFailure && result.feasibility <= options.tol_feasibility)
        result.status = SolveStatus::IterationLimit;
    if (result.message.empty()) {
        switch (result.status) {
            case SolveStatus::Converged: result.message = "converged"; break;
            case SolveStatus::IterationLimit: result.message = "iteration limit"; break;
            case SolveStatus::LocallyInfeasible: result.message = "locally infeasible"; break;
            case SolveStatus::NumericalFailure: result.message = "numerical failure"; break;
        }
    }
    return result;
}

}  // namespace dsoar::nlp
