#include <doctest.h>

#include <cmath>

#include "dsoar/nlp.hpp"

using namespace dsoar;
using Eigen::VectorXd;

namespace {

constexpr double kInf = 1e20;

/// min (x-2)^2 + (y-1)^2  s.t.  x + y = 1. Solution (1, 0), f = 2.
class EqualityQuadratic : public nlp::Problem {
  public:
    int num_vars() const override { return 2; }
    int num_eq() const override { return 1; }
    int num_ineq() const override { return 0; }
    double objective(const VectorXd &x, VectorXd *grad) const override {
        if (grad) {
            grad->resize(2);
            (*grad)[0] = 2 * (x[0] - 2);
            (*grad)[1] = 2 * (x[1] - 1);
        }
        return (x[0] - 2) * (x[0] - 2) + (x[1] - 1) * (x[1] - 1);
    }
    void constraints(const VectorXd &x, VectorXd &ce, VectorXd &ci) const override {
        ce.resize(1);
        ce[0] = x[0] + x[1] - 1;
        ci.resize(0);
    }
    void jacobians(const VectorXd &, std::vector<Eigen::Triplet<double>> &je,
                   std::vector<Eigen::Triplet<double>> &) const override {
        je.emplace_back(0, 0, 1.0);
        je.emplace_back(0, 1, 1.0);
    }
    void bounds(VectorXd &lo, VectorXd &hi) const override {
        lo = VectorXd::Constant(2, -kInf);
        hi = VectorXd::Constant(2, kInf);
    }
};

/// Hock-Schittkowski 71:
/// min x1 x4 (x1+x2+x3) + x3
/// s.t. x1 x2 x3 x4 >= 25, x1^2+x2^2+x3^2+x4^2 = 40, 1 <= x <= 5.
/// Optimum ~17.0140173 at (1, 4.742994, 3.821151, 1.379408).
class Hs71 : public nlp::Problem {
  public:
    int num_vars() const override { return 4; }
    int num_eq() const override { return 1; }
    int num_ineq() const override { return 1; }
    double objective(const VectorXd &x, VectorXd *grad) const override {
        if (grad) {
            grad->resize(4);
            (*grad)[0] = x[3] * (2 * x[0] + x[1] + x[2]);
            (*grad)[1] = x[0] * x[3];
            (*grad)[2] = x[0] * x[3] + 1.0;
            (*grad)[3] = x[0] * (x[0] + x[1] + x[2]);
        }
        return x[0] * x[3] * (x[0] + x[1] + x[2]) + x[2];
    }
    void constraints(const VectorXd &x, VectorXd &ce, VectorXd &ci) const override {
        ce.resize(1);
        ce[0] = x.squaredNorm() - 40.0;
        ci.resize(1);
        ci[0] = x[0] * x[1] * x[2] * x[3] - 25.0;
    }
    void jacobians(const VectorXd &x, std::vector<Eigen::Triplet<double>> &je,
                   std::vector<Eigen::Triplet<double>> &ji) const override {
        for (int i = 0; i < 4; ++i) je.emplace_back(0, i, 2 * x[i]);
        ji.emplace_back(0, 0, x[1] * x[2] * x[3]);
        ji.emplace_back(0, 1, x[0] * x[2] * x[3]);
        ji.emplace_back(0, 2, x[0] * x[1] * x[3]);
        ji.emplace_back(0, 3, x[0] * x[1] * x[2]);
    }
    void bounds(VectorXd &lo, VectorXd &hi) const override {
        lo = VectorXd::Constant(4, 1.0);
        hi = VectorXd::Constant(4, 5.0);
    }
};

/// Epigraph form of max_x min(1 - x^2, 1 - (x-1)^2):
/// min -sigma  s.t.  1 - x^2 - sigma >= 0,  1 - (x-1)^2 - sigma >= 0.
/// Optimum x = 0.5, sigma = 0.75.
class MaxMinToy : public nlp::Problem {
  public:
    int num_vars() const override { return 2; }  // [x, sigma]
    int num_eq() const override { return 0; }
    int num_ineq() const override { return 2; }
    double objective(const VectorXd &x, VectorXd *grad) const override {
        if (grad) {
            grad->resize(2);
            (*grad)[0] = 0.0;
            (*grad)[1] = -1.0;
        }
        return -x[1];
    }
    void constraints(const VectorXd &x, VectorXd &ce, VectorXd &ci) const override {
        ce.resize(0);
        ci.resize(2);
        ci[0] = 1.0 - x[0] * x[0] - x[1];
        ci[1] = 1.0 - (x[0] - 1.0) * (x[0] - 1.0) - x[1];
    }
    void jacobians(const VectorXd &x, std::vector<Eigen::Triplet<double>> &,
                   std::vector<Eigen::Triplet<double>> &ji) const override {
        ji.emplace_back(0, 0, -2 * x[0]);
        ji.emplace_back(0, 1, -1.0);
        ji.emplace_back(1, 0, -2 * (x[0] - 1.0));
        ji.emplace_back(1, 1, -1.0);
    }
    void bounds(VectorXd &lo, VectorXd &hi) const override {
        lo = VectorXd::Constant(2, -kInf);
        hi = VectorXd::Constant(2, kInf);
    }
};

}  // namespace

TEST_CASE("equality-constrained quadratic") {
    EqualityQuadratic prob;
    VectorXd x0(2);
    x0 << 5.0, -3.0;
    const auto res = nlp::solve_augmented_lagrangian(prob, x0);
    REQUIRE(res.converged());
    CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(res.x[1] == doctest::Approx(0.0).epsilon(1e-4));
    CHECK(res.feasibility < 1e-7);
}

TEST_CASE("hs71 benchmark with bounds and mixed constraints") {
    Hs71 prob;
    VectorXd x0(4);
    x0 << 1.0, 5.0, 5.0, 1.0;
    nlp::SolverOptions opts;
    opts.max_iterations = 5000;
    const auto res = nlp::solve_augmented_lagrangian(prob, x0, opts);
    REQUIRE(res.converged());
    CHECK(res.objective == doctest::Approx(17.0140173).epsilon(1e-4));
    CHECK(res.feasibility < 1e-6);
}

TEST_CASE("max-min epigraph toy problem") {
    MaxMinToy prob;
    VectorXd x0(2);
    x0 << -1.0, -5.0;
    const auto res = nlp::solve_augmented_lagrangian(prob, x0);
    REQUIRE(res.converged());
    CHECK(res.x[0] == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(res.x[1] == doctest::Approx(0.75).epsilon(1e-4));
}

TEST_CASE("solver reports dimension mismatch") {
    EqualityQuadratic prob;
    const auto res = nlp::solve_augmented_lagrangian(prob, VectorXd::Zero(3));
    CHECK(res.status == nlp::SolveStatus::NumericalFailure);
}

TEST_CASE("infeasible problem is flagged rather than silently accepted") {
    // x + y = 1 and x + y = 3 cannot both hold.
    class Contradiction : public nlp::Problem {
      public:
        int num_vars() const override { return 2; }
        int num_eq() const override { return 2; }
        int num_ineq() const override { return 0; }
        double objective(const VectorXd &x, VectorXd *grad) const override {
            if (grad) *grad = 2 * x;
            return x.squaredNorm();
        }
        void constraints(const VectorXd &x, VectorXd &ce, VectorXd &ci) const override {
            ce.resize(2);
            ce[0] = x[0] + x[1] - 1;
            ce[1] = x[0] + x[1] - 3;
            ci.resize(0);
        }
        void jacobians(const VectorXd &, std::vector<Eigen::Triplet<double>> &je,
                       std::vector<Eigen::Triplet<double>> &) const override {
            je.emplace_back(0, 0, 1.0);
            je.emplace_back(0, 1, 1.0);
            je.emplace_back(1, 0, 1.0);
            je.emplace_back(1, 1, 1.0);
        }
        void bounds(VectorXd &lo, VectorXd &hi) const override {
            lo = VectorXd::Constant(2, -kInf);
            hi = VectorXd::Constant(2, kInf);
        }
    } prob;
    nlp::SolverOptions opts;
    opts.max_outer = 30;
    const auto res = nlp::solve_augmented_lagrangian(prob, VectorXd::Zero(2), opts);
    CHECK_FALSE(res.converged());
    CHECK(res.feasibility > 0.5);
}
