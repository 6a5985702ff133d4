#include <doctest.h>

#include <cmath>
#include <random>

#include "fracritz/ritz.hpp"
#include "support.hpp"

using namespace fracritz;
using namespace fracritz::testing;

namespace {

std::vector<double> as_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

double derivative_at(const Polynomial& p, int k, double x) { return p.derivative(k).evaluate(x); }

}  // namespace

TEST_CASE("trial space examples") {
  const auto p31 = example_3_1();
  const auto s31 = build_trial_space(p31, 2);
  CHECK(s31.free_count() == 1);
  CHECK(as_vector(s31.particular.coeffs()) == std::vector<double>{0.0, 1.0, 0.0});
  CHECK(as_vector(s31.null_basis[0].coeffs()) == std::vector<double>{0.0, -1.0, 1.0});

  const auto p4 = make_problem(OperatorKind::CaputoDerivative, Side::Right, 0.39, "D^2",
                               {1.0}, {0.0});
  const auto s4 = build_trial_space(p4, 4);
  CHECK(s4.free_count() == 3);
  // particular = (1 - x) in the right basis, phi_j = (1-x)^j - (1-x)
  CHECK(s4.particular.coeffs()[0] == 0.0);
  CHECK(s4.particular.coeffs()[1] == doctest::Approx(1.0));
  for (int j = 0; j < 3; ++j) {
    const auto c = s4.null_basis[j].coeffs();
    CHECK(c[1] == doctest::Approx(-1.0));
    CHECK(c[j + 2] == 1.0);
  }

  const auto hom = make_problem(OperatorKind::CaputoDerivative, Side::Left, 0.5, "y^2",
                                {0.0}, {0.0});
  for (int N = 2; N <= 6; ++N) {
    const auto space = build_trial_space(hom, N);
    for (double c : space.particular.coeffs()) CHECK(c == 0.0);
  }
  CHECK_THROWS_AS(build_trial_space(p31, 1), InvalidArgument);
}

TEST_CASE("trial space satisfies boundary conditions") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double alpha : {0.3, 1.0, 1.5, 1.9}) {
    for (Side side : {Side::Left, Side::Right}) {
      auto p = random_problem(rng, OperatorKind::CaputoDerivative, side, alpha);
      p.a = -0.5;
      p.b = 1.25;
      const int n = p.op.integer_order();
      for (int N = 2 * n; N <= 9; ++N) {
        const auto space = build_trial_space(p, N);
        CHECK(space.free_count() == N + 1 - 2 * n);
        std::vector<double> q(space.free_count());
        for (auto& v : q) v = u(rng);
        const auto y = space.compose(q);
        for (int k = 0; k < n; ++k) {
          CHECK(std::abs(derivative_at(y, k, p.a) - p.bc.at_a[k]) < 1e-12);
          CHECK(std::abs(derivative_at(y, k, p.b) - p.bc.at_b[k]) < 1e-12);
          for (const auto& phi : space.null_basis) {
            CHECK(std::abs(derivative_at(phi, k, p.a)) < 1e-12);
            CHECK(std::abs(derivative_at(phi, k, p.b)) < 1e-12);
          }
        }
      }
    }
  }
}

TEST_CASE("assemble_objective") {
  // L = 1
  const auto one = make_problem(OperatorKind::CaputoDerivative, Side::Left, 0.5, "1", {0}, {1});
  const auto s1 = build_trial_space(one, 4);
  CHECK(assemble_objective(one, s1, std::vector<double>{0.3, -2.0, 5.0}, default_rule(one)) ==
        doctest::Approx(1.0).epsilon(1e-14));

  // y = x has Caputo derivative x^0.5 / Gamma(1.5): zero residual.
  const auto zero = make_problem(OperatorKind::CaputoDerivative, Side::Left, 0.5,
                                 "(D - x^0.5/gamma(1.5))^2", {0}, {1});
  CHECK(assemble_objective(zero, build_trial_space(zero, 3), std::vector<double>{0.0, 0.0},
                           default_rule(zero)) < 1e-28);

  // example_3_1 at the known N = 2 minimizer, against a 1e6-point midpoint sum.
  const auto p = example_3_1();
  const auto space = build_trial_space(p, 2);
  const double q = -0.225676;
  const double J = assemble_objective(p, space, std::vector<double>{q}, default_rule(p));
  const double c1 = 1.0 - q, c2 = q;
  const double g1 = 1.0 / std::tgamma(1.5), g2 = 2.0 / std::tgamma(2.5);
  const int M = 1000000;
  double riemann = 0.0;
  for (int i = 0; i < M; ++i) {
    const double x = (i + 0.5) / M;
    const double D = c1 * g1 * std::sqrt(x) + c2 * g2 * x * std::sqrt(x);
    const double yp = c1 + 2.0 * c2 * x;
    riemann += D - yp * yp;
  }
  riemann /= M;
  CHECK(std::abs(J - riemann) < 1e-5);
}

TEST_CASE("assembler agrees with the polynomial route") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_problem(rng, OperatorKind::CaputoDerivative, Side::Right, 0.6);
    const auto space = build_trial_space(p, 5);
    std::vector<double> q(space.free_count());
    for (auto& v : q) v = u(rng);
    const RitzAssembler assembler(p, space, default_rule(p));
    const double direct = assemble_objective(p, space, q, default_rule(p));
    CHECK(assembler.objective(q) == doctest::Approx(direct).epsilon(1e-12));
    const auto g1 = assembler.gradient(q);
    const auto g2 = gradient(p, space, q, default_rule(p));
    CHECK((g1 - g2).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + g2.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("gradient and Hessian against finite differences") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  const OperatorKind kinds[] = {OperatorKind::RLIntegral, OperatorKind::RLDerivative,
                                OperatorKind::CaputoDerivative};
  for (int trial = 0; trial < 24; ++trial) {
    const OperatorKind kind = kinds[trial % 3];
    const Side side = (trial / 3) % 2 ? Side::Right : Side::Left;
    const double alpha = trial % 4 == 3 ? 1.4 : 0.45;
    const auto p = random_problem(rng, kind, side, alpha);
    const auto space = build_trial_space(p, 2 * p.op.integer_order() + 3);
    std::vector<double> q(space.free_count());
    for (auto& v : q) v = u(rng);
    const auto rule = default_rule(p);
    const RitzAssembler assembler(p, space, rule, Execution::Serial);
    const auto g = assembler.gradient(q);
    const auto H = assembler.hessian(q);
    const double h = 1e-6;
    for (int j = 0; j < space.free_count(); ++j) {
      auto qp = q, qm = q;
      qp[j] += h;
      qm[j] -= h;
      const double fd = (assemble_objective(p, space, qp, rule) -
                         assemble_objective(p, space, qm, rule)) / (2 * h);
      INFO("trial " << trial << " j " << j << " L = " << p.lagrangian.to_string());
      CHECK((std::abs(g(j) - fd) <= 1e-5 || std::abs(g(j) - fd) <= 1e-5 * std::abs(fd)));
      const auto gp = assembler.gradient(qp);
      const auto gm = assembler.gradient(qm);
      for (int k = 0; k < space.free_count(); ++k) {
        const double hfd = (gp(k) - gm(k)) / (2 * h);
        CHECK((std::abs(H(k, j) - hfd) <= 1e-5 || std::abs(H(k, j) - hfd) <= 1e-5 * std::abs(hfd)));
      }
    }
  }
}

TEST_CASE("gradient vanishes at a trivial stationary point") {
  const auto p = make_problem(OperatorKind::CaputoDerivative, Side::Left, 0.5, "y^2", {0}, {0});
  const auto space = build_trial_space(p, 5);
  const auto g = gradient(p, space, std::vector<double>(space.free_count(), 0.0), default_rule(p));
  CHECK(g.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("non-differentiable Lagrangian") {
  const auto p = make_problem(OperatorKind::CaputoDerivative, Side::Left, 0.5, "abs(D - 1)",
                              {0}, {1});
  const auto space = build_trial_space(p, 3);
  const RitzAssembler assembler(p, space, default_rule(p));
  CHECK_FALSE(assembler.differentiable());
  CHECK(std::isfinite(assembler.objective(std::vector<double>{0.0, 0.0})));
  CHECK_THROWS_AS(assembler.gradient(std::vector<double>{0.0, 0.0}), UnsupportedDerivative);
}

TEST_CASE("validation") {
  auto p = make_problem(OperatorKind::CaputoDerivative, Side::Left, 0.5, "u + D", {0}, {1});
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = make_problem(OperatorKind::CaputoDerivative, Side::Left, 1.5, "D^2", {0}, {1});
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = make_problem(OperatorKind::CaputoDerivative, Side::Left, 0.5, "D^2", {0}, {1});
  p.exact = Expr::parse("x + y");
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
}

TEST_CASE("quadratic problem matches the normal equations") {
  // L = (D - f)^2 + y^2 is quadratic in q; assemble the residual basis by hand.
  const double alpha = 0.4;
  const auto p = make_problem(OperatorKind::CaputoDerivative, Side::Left, alpha,
                              "(D - cos(x))^2 + y^2", {0.2}, {0.7});
  const auto space = build_trial_space(p, 4);
  const auto rule = default_rule(p);
  const int m = space.free_count();
  auto caputo = [&](const Polynomial& poly, double x) {
    double s = 0.0;
    const auto c = poly.coeffs();
    for (std::size_t i = 1; i < c.size(); ++i) {
      s += c[i] * std::tgamma(i + 1.0) / std::tgamma(i + 1.0 - alpha) * std::pow(x, i - alpha);
    }
    return s;
  };
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const double x = rule.nodes[k], w = rule.weights[k];
    const double r0 = caputo(space.particular, x) - std::cos(x);
    const double y0 = space.particular.evaluate(x);
    for (int i = 0; i < m; ++i) {
      const double di = caputo(space.null_basis[i], x);
      const double yi = space.null_basis[i].evaluate(x);
      rhs(i) -= w * (r0 * di + y0 * yi);
      for (int j = 0; j < m; ++j) {
        A(i, j) += w * (di * caputo(space.null_basis[j], x) + yi * space.null_basis[j].evaluate(x));
      }
    }
  }
  const Eigen::VectorXd oracle = A.fullPivLu().solve(rhs);
  const auto sol = solve_stationary(p, space);
  CHECK(sol.converged);
  CHECK(sol.iterations <= 2);
  for (int j = 0; j < m; ++j) CHECK(std::abs(sol.free[j] - oracle(j)) < 1e-9);
  CHECK(sol.grad_norm <= 1e-10);

  SolverOptions fd;
  fd.hessian = HessianMode::FiniteDifference;
  const auto sol_fd = solve_stationary(p, space, fd);
  for (int j = 0; j < m; ++j) CHECK(std::abs(sol_fd.free[j] - oracle(j)) < 1e-9);
}

TEST_CASE("example_3_1 at N = 2") {
  const auto sol = solve_stationary(example_3_1(), build_trial_space(example_3_1(), 2));
  CHECK(sol.converged);
  CHECK(std::abs(sol.coeffs()[0]) < 1e-14);
  CHECK(sol.coeffs()[1] == doctest::Approx(1.22568).epsilon(5e-6));
  CHECK(sol.coeffs()[2] == doctest::Approx(-0.225676).epsilon(5e-6));
  CHECK(sol.objective == doctest::Approx(-0.230771).epsilon(1e-5));
}

TEST_CASE("quartic residual is solved by damped Newton") {
  VariationalProblem p = make_problem(
      OperatorKind::RLDerivative, Side::Left, 0.5,
      "(D - 16*gamma(6)/gamma(5.5)*x^4.5 + 20*gamma(4)/gamma(3.5)*x^2.5 - 5/gamma(1.5)*x^0.5)^4",
      {0}, {1});
  p.exact = Expr::parse("16*x^5 - 20*x^3 + 5*x");
  SolverOptions opts;
  opts.grad_tol = 1e-20;
  opts.max_iterations = 400;
  const auto sol = solve_stationary(p, build_trial_space(p, 5), opts);
  CHECK(sol.converged);
  const auto c = sol.coeffs();
  CHECK(std::abs(c[2]) < 1e-6);
  CHECK(std::abs(c[4]) < 1e-6);
  CHECK(c[5] == doctest::Approx(16.0).epsilon(1e-6));
  REQUIRE(sol.l2_error);
  CHECK(*sol.l2_error < 1e-10);

  SolverOptions few = opts;
  few.max_iterations = 3;
  try {
    solve_stationary(p, build_trial_space(p, 5), few);
    FAIL("expected NoConvergenceError");
  } catch (const NoConvergenceError& e) {
    CHECK_FALSE(e.best().converged);
    CHECK(e.best().iterations == 3);
    CHECK(e.best().free.size() == 4);
  }
}

TEST_CASE("maximize is minimize of the negated objective") {
  auto max_p = example_3_1();
  auto min_p = max_p;
  min_p.sense = Sense::Minimize;
  min_p.lagrangian = Expr::parse("-(D - yp^2)");
  const auto a = solve_stationary(max_p, build_trial_space(max_p, 4));
  const auto b = solve_stationary(min_p, build_trial_space(min_p, 4));
  for (std::size_t j = 0; j < a.free.size(); ++j) CHECK(a.free[j] == doctest::Approx(b.free[j]).epsilon(1e-12));
  CHECK(a.objective == doctest::Approx(-b.objective).epsilon(1e-12));
}

TEST_CASE("solve_adaptive") {
  VariationalProblem p = make_problem(OperatorKind::CaputoDerivative, Side::Left, 0.5,
                                      "0.5*(D - gamma(3)/gamma(2.5)*x^1.5)^2", {0}, {1});
  p.exact = Expr::parse("x^2");
  const auto exact = solve_adaptive(p);
  CHECK(exact.degree == 3);
  CHECK(exact.objective <= 1e-15);
  CHECK(*exact.l2_error <= 1e-12);

  SolverOptions loose;
  loose.eps = 1e9;
  loose.n_min = 4;
  CHECK(solve_adaptive(example_3_1(), loose).degree == 5);

  SolverOptions tight;
  tight.eps = 1e-30;
  tight.n_max = 4;
  try {
    solve_adaptive(example_3_1(), tight);
    FAIL("expected NoConvergenceError");
  } catch (const NoConvergenceError& e) {
    CHECK(e.best().degree == 4);
  }
  SolverOptions bad;
  bad.n_min = 1;
  CHECK_THROWS_AS(solve_adaptive(example_3_1(), bad), InvalidArgument);
}

TEST_CASE("Ritz value is monotone in N") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 6; ++trial) {
    const auto kind = trial % 2 ? OperatorKind::CaputoDerivative : OperatorKind::RLIntegral;
    const auto p = random_problem(rng, kind, trial % 3 ? Side::Left : Side::Right, 0.7, true);
    double previous = INFINITY;
    for (int N = 2; N <= 8; ++N) {
      const auto sol = solve_stationary(p, build_trial_space(p, N));
      CHECK(sol.objective <= previous + 1e-9);
      previous = sol.objective;
    }
  }
}

TEST_CASE("returned solutions satisfy boundary conditions") {
  std::mt19937_64 rng(43);
  for (double alpha : {0.5, 1.5}) {
    for (Side side : {Side::Left, Side::Right}) {
      const auto p = random_problem(rng, OperatorKind::CaputoDerivative, side, alpha);
      const auto sol = solve_stationary(p, build_trial_space(p, 7));
      for (int k = 0; k < p.op.integer_order(); ++k) {
        CHECK(std::abs(derivative_at(sol.trial, k, p.a) - p.bc.at_a[k]) <= 1e-10);
        CHECK(std::abs(derivative_at(sol.trial, k, p.b) - p.bc.at_b[k]) <= 1e-10);
      }
      CHECK(sol.grad_norm <= 1e-10);
      CHECK(sol.objective ==
            doctest::Approx(assemble_objective(p, build_trial_space(p, 7), sol.free,
                                               default_rule(p)))
                .epsilon(1e-12));
    }
  }
}

TEST_CASE("l2_error") {
  const auto p = example_3_1();
  const auto rule = default_rule(p);
  const Polynomial y(p.anchor(), {0.0, 1.25, -0.25});
  CHECK(l2_error(Expr::parse("1.25*x - 0.25*x^2"), y, rule) <= 1e-14);
  const auto sol = solve_stationary(p, build_trial_space(p, 4));
  double riemann = 0.0;
  const int M = 200000;
  for (int i = 0; i < M; ++i) {
    const double x = (i + 0.5) / M;
    const double d = example_3_1_exact(0.5, x) - sol.trial.evaluate(x);
    riemann += d * d / M;
  }
  VariationalProblem with_exact = p;
  const double k = 1.0 / (2.0 * std::tgamma(2.5));
  with_exact.exact = Expr::parse("-" + std::to_string(k) + "*(1-x)^1.5 + (1 - " + std::to_string(k) +
                                 ")*x + " + std::to_string(k));
  const double err = l2_error(*with_exact.exact, sol.trial, rule);
  CHECK(err == doctest::Approx(riemann).epsilon(1e-3));
}

TEST_CASE("serial and parallel execution agree bit for bit") {
  std::mt19937_64 rng(47);
  const auto p = random_problem(rng, OperatorKind::CaputoDerivative, Side::Left, 0.5);
  const auto space = build_trial_space(p, 7);
  std::vector<double> q(space.free_count(), 0.3);
  const RitzAssembler serial(p, space, default_rule(p), Execution::Serial);
  const RitzAssembler parallel(p, space, default_rule(p), Execution::Parallel);
  CHECK(serial.objective(q) == parallel.objective(q));
  CHECK(serial.gradient(q) == parallel.gradient(q));
  CHECK(serial.hessian(q) == parallel.hessian(q));

  SolverOptions so, po;
  so.execution = Execution::Serial;
  po.execution = Execution::Parallel;
  const auto a = solve_stationary(p, space, so);
  const auto b = solve_stationary(p, space, po);
  CHECK(a.free == b.free);
  CHECK(a.objective == b.objective);
  CHECK(a.iterations == b.iterations);
}
