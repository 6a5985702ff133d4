#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "fracritz/ritz.hpp"

namespace fracritz {

/// Minimize the integral of L(t, x, u) subject to dynamics that can be solved
/// for the control as u = g(t, x, x', D^alpha x) and 2n boundary conditions
/// on the state. In expressions the state is the symbol `y`.
struct OptimalControlProblem {
  double a = 0.0;
  double b = 1.0;
  FractionalOperator op{OperatorKind::CaputoDerivative, Side::Left, 0.5};
  Expr cost;     // over t, y, u
  Expr control;  // g over t, y, yp, D
  BoundaryConditions bc;
  std::optional<Expr> exact_state;
  std::optional<Expr> exact_control;
  Sense sense = Sense::Minimize;

  void validate() const;
};

/// Eliminates u by substituting g into the cost. Throws InvalidArgument when
/// the cost has no `u` or g itself references `u`.
VariationalProblem reduce_to_fvp(const OptimalControlProblem& ocp);

/// u_N(t) = g(t, x_N(t), x_N'(t), D^alpha x_N(t)).
double control_at(const OptimalControlProblem& ocp, const RitzSolution& state, double t);

std::vector<std::pair<double, double>> recover_control(const OptimalControlProblem& ocp,
                                                       const RitzSolution& state,
                                                       std::span<const double> samples);

/// Integral of (u_exact - u_N)^2 over the rule's (interior) nodes.
double control_l2_error(const OptimalControlProblem& ocp, const RitzSolution& state,
                        const CompositeRule& rule, Execution exec = Execution::Parallel);

}  // namespace fracritz
