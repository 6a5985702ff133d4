#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "fracritz/ritz.hpp"

namespace fracritz::testing {

inline VariationalProblem make_problem(OperatorKind kind, Side side, double alpha,
                                       const std::string& lagrangian,
                                       std::vector<double> at_a, std::vector<double> at_b,
                                       Sense sense = Sense::Minimize) {
  VariationalProblem p;
  p.op = FractionalOperator(kind, side, alpha);
  p.lagrangian = Expr::parse(lagrangian);
  p.bc = {std::move(at_a), std::move(at_b)};
  p.sense = sense;
  return p;
}

/// y(0) = 0, y(1) = 1, left RL derivative, L = D - y'^2.
inline VariationalProblem example_3_1(double alpha = 0.5) {
  return make_problem(OperatorKind::RLDerivative, Side::Left, alpha, "D - yp^2", {0.0}, {1.0},
                      Sense::Maximize);
}

/// Exact solution of example_3_1 written with tgamma.
inline double example_3_1_exact(double alpha, double x) {
  const double k = 1.0 / (2.0 * std::tgamma(3.0 - alpha));
  return -k * std::pow(1.0 - x, 2.0 - alpha) + (1.0 - k) * x + k;
}

/// Random smooth problem with the given operator. The convex Lagrangians
/// have a unique minimizer on every trial space.
inline VariationalProblem random_problem(std::mt19937_64& rng, OperatorKind kind, Side side,
                                         double alpha, bool convex_only = false) {
  static const char* kLagrangians[] = {
      "(D - x)^2 + 0.5*y^2",
      "(D + y - sin(3*x))^2 + 0.1*yp^2",
      "exp(0.3*D) + (y - x^2)^2",
      "0.5*(D - 1)^4 + y^2*x + (yp - 1)^2",
      "(D*y - 1)^2 + cos(yp)",
  };
  std::uniform_int_distribution<int> pick(0, convex_only ? 3 : 4);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  const int n = static_cast<int>(std::ceil(alpha));
  std::vector<double> at_a(n), at_b(n);
  for (auto& v : at_a) v = val(rng);
  for (auto& v : at_b) v = val(rng);
  // Low-order terms at the anchor give D negative powers of s; keep L integrable.
  if (kind == OperatorKind::RLDerivative) {
    for (auto& v : side == Side::Left ? at_a : at_b) v = 0.0;
  }
  return make_problem(kind, side, alpha, kLagrangians[pick(rng)], at_a, at_b);
}

inline CompositeRule default_rule(const VariationalProblem& p) {
  return make_discretization(p, QuadratureConfig{});
}

}  // namespace fracritz::testing
