#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fracritz/errors.hpp"
#include "fracritz/expr.hpp"
#include "fracritz/generalized_polynomial.hpp"
#include "fracritz/quadrature.hpp"

namespace fracritz {

enum class Sense { Minimize, Maximize };

/// y^(k)(a) = at_a[k], y^(k)(b) = at_b[k] for k = 0..n-1 (derivatives in x).
struct BoundaryConditions {
  std::vector<double> at_a;
  std::vector<double> at_b;
};

/// Minimize or maximize the integral of L(x, y, y', D^alpha y) over [a, b]
/// subject to the 2n boundary conditions, n = ceil(alpha).
struct VariationalProblem {
  double a = 0.0;
  double b = 1.0;
  FractionalOperator op{OperatorKind::CaputoDerivative, Side::Left, 0.5};
  Expr lagrangian;
  BoundaryConditions bc;
  std::optional<Expr> exact;
  Sense sense = Sense::Minimize;

  /// Throws InvalidArgument when the Lagrangian uses `u`, the exact solution
  /// uses anything but x, or the BC count does not match 2 ceil(alpha).
  void validate() const;

  /// Trial functions are anchored on the operator's side.
  Anchor anchor() const { return Anchor(op.side(), a, b); }
};

struct QuadratureConfig {
  int panels = 32;
  double grading = 3.0;
  int nodes = 16;
};

/// Composite rule for a problem, graded toward the operator's anchor end
/// where the fractional images carry their non-smooth terms.
CompositeRule make_discretization(const VariationalProblem& problem,
                                  const QuadratureConfig& config);

/// Affine family y = particular + sum_j q_j null_basis[j] of degree-N
/// polynomials that satisfy the boundary conditions for every q.
struct TrialSpace {
  int degree = 0;
  int bc_order = 0;
  Polynomial particular;
  std::vector<Polynomial> null_basis;

  int free_count() const noexcept { return static_cast<int>(null_basis.size()); }
  Polynomial compose(std::span<const double> q) const;
};

/// Hermite interpolant of the BC data (degree <= 2n-1) plus, for j = 2n..N,
/// s^j minus its own Hermite interpolant. Requires N >= 2n.
TrialSpace build_trial_space(const VariationalProblem& problem, int degree);

/// Tabulates the trial space on a composite rule and assembles the objective,
/// its gradient and its Hessian with respect to the free vector.
///
/// y, y' and D^alpha y are affine in q, so every node stores the particular
/// solution's values plus one row per basis function. Integrand values are
/// computed per node (OpenMP under Execution::Parallel) and reduced serially
/// in node order, so both execution modes give identical bits.
class RitzAssembler {
 public:
  RitzAssembler(const VariationalProblem& problem, const TrialSpace& space,
                CompositeRule rule, Execution exec = Execution::Parallel);

  int free_count() const noexcept { return static_cast<int>(basis_y_.cols()); }
  const CompositeRule& rule() const noexcept { return rule_; }

  double objective(std::span<const double> q) const;
  Eigen::VectorXd gradient(std::span<const double> q) const;
  /// Exact Hessian from second symbolic partials of the Lagrangian.
  Eigen::MatrixXd hessian(std::span<const double> q) const;

  /// False when the Lagrangian has no symbolic derivative (abs, gamma of a
  /// slot); gradient() and hessian() then throw UnsupportedDerivative.
  bool differentiable() const noexcept { return derivative_error_.empty(); }
  const std::string& derivative_error() const noexcept { return derivative_error_; }

  EvalContext context_at(std::size_t node, std::span<const double> q) const;

 private:
  void require_derivatives() const;

  VariationalProblem problem_;
  CompositeRule rule_;
  Execution exec_;
  Eigen::VectorXd base_y_, base_yp_, base_d_;
  Eigen::MatrixXd basis_y_, basis_yp_, basis_d_;  // nodes x free
  std::vector<Expr> first_;                       // dL/dy, dL/dyp, dL/dD
  std::vector<Expr> second_;                      // 3x3, row major
  std::string derivative_error_;
};

/// Objective along y = particular + sum q_j phi_j, evaluated through one
/// closed-form fractional image of the composed polynomial.
double assemble_objective(const VariationalProblem& problem, const TrialSpace& space,
                          std::span<const double> q, const CompositeRule& rule,
                          Execution exec = Execution::Parallel);

Eigen::VectorXd gradient(const VariationalProblem& problem, const TrialSpace& space,
                         std::span<const double> q, const CompositeRule& rule,
                         Execution exec = Execution::Parallel);

enum class HessianMode { Analytic, FiniteDifference };

struct SolverOptions {
  double grad_tol = 1e-10;
  int max_iterations = 200;
  HessianMode hessian = HessianMode::Analytic;
  QuadratureConfig quadrature;
  Execution execution = Execution::Parallel;
  /// Initial free vector; empty means q = 0 (the Hermite interpolant).
  std::vector<double> warm_start;

  int n_min = 2;
  int n_max = 12;
  double eps = 1e-9;
};

struct RitzSolution {
  int degree = 0;
  Polynomial trial;
  GeneralizedPolynomial fractional;  // D^alpha of `trial`
  std::vector<double> free;
  double objective = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::optional<double> l2_error;
  std::vector<std::string> diagnostics;

  std::span<const double> coeffs() const noexcept { return trial.coeffs(); }
};

/// Carries the best iterate reached before giving up.
class NoConvergenceError : public Error {
 public:
  NoConvergenceError(const std::string& what, RitzSolution best)
      : Error(what), best_(std::move(best)) {}
  const RitzSolution& best() const noexcept { return best_; }

 private:
  RitzSolution best_;
};

/// Non-finite objective, gradient or Hessian during the solve.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Damped Newton iteration on the stationarity system grad J(q) = 0.
///
/// Each step solves (H + lambda I) d = -g with a backtracking line search that
/// forbids increasing J (decreasing for Maximize). lambda starts at 0, grows
/// x10 on a failed step up to 1e6 and shrinks /10 after a success.
RitzSolution solve_stationary(const VariationalProblem& problem, const TrialSpace& space,
                              const SolverOptions& options = {});

/// Raises N from n_min until |J[y_N] - J[y_{N-1}]| <= eps.
/// Throws NoConvergenceError (best = last solution) when n_max is reached.
RitzSolution solve_adaptive(const VariationalProblem& problem,
                            const SolverOptions& options = {});

/// Integral of (exact(x) - y_N(x))^2 on the rule's interval.
double l2_error(const Expr& exact, const Polynomial& approx, const CompositeRule& rule,
                Execution exec = Execution::Parallel);

}  // namespace fracritz
