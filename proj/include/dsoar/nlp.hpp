#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <string>
#include <vector>

namespace dsoar::nlp {

/// Smooth NLP in the form
///   min f(x)  s.t.  c_eq(x) = 0,  c_ineq(x) >= 0,  lo <= x <= hi.
/// Implementations supply dense gradients and sparse constraint Jacobians
/// (triplet form), which keeps the solver interchangeable.
class Problem {
  public:
    virtual ~Problem() = default;

    virtual int num_vars() const = 0;
    virtual int num_eq() const = 0;
    virtual int num_ineq() const = 0;

    virtual double objective(const Eigen::VectorXd &x, Eigen::VectorXd *grad) const = 0;
    virtual void constraints(const Eigen::VectorXd &x, Eigen::VectorXd &c_eq,
                             Eigen::VectorXd &c_ineq) const = 0;
    virtual void jacobians(const Eigen::VectorXd &x, std::vector<Eigen::Triplet<double>> &j_eq,
                           std::vector<Eigen::Triplet<double>> &j_ineq) const = 0;
    /// Variable bounds; fill with +-infinity where unbounded.
    virtual void bounds(Eigen::VectorXd &lo, Eigen::VectorXd &hi) const = 0;
};

enum class SolveStatus {
    Converged,
    IterationLimit,
    LocallyInfeasible,  ///< feasibility stalled at the penalty cap
    NumericalFailure,
};

struct SolverOptions {
    double tol_feasibility = 1e-7;
    double tol_stationarity = 1e-6;
    int max_iterations = 3000;  ///< cumulative inner iterations
    int max_outer = 50;
    double penalty_initial = 10.0;
    double penalty_growth = 10.0;
    double penalty_max = 1e9;
    int lbfgs_memory = 15;
    bool polish_feasibility = true;
    double polish_tol = 1e-10;
    bool verbose = false;
};

struct SolveResult {
    SolveStatus status = SolveStatus::NumericalFailure;
    Eigen::VectorXd x;
    double objective = 0.0;
    double feasibility = 0.0;    ///< max constraint violation
    double stationarity = 0.0;   ///< projected-gradient inf norm at exit
    int outer_iterations = 0;
    int inner_iterations = 0;
    std::string message;

    bool converged() const { return status == SolveStatus::Converged; }
};

/// Safeguarded augmented-Lagrangian solve (shifted quadratic penalties for
/// inequalities, bound handling by projection in the L-BFGS subproblem,
/// optional Gauss-Newton feasibility polish on the converged point).
SolveResult solve_augmented_lagrangian(const Problem &problem, const Eigen::VectorXd &x0,
                                       const SolverOptions &options = {});

}  // namespace dsoar::nlp
