#include "fracritz/ritz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fracritz {

namespace {

constexpr std::array<Slot, 3> kSlots = {Slot::Y, Slot::Yp, Slot::D};

void require_only(const Expr& e, std::initializer_list<Symbol> allowed,
                  const std::string& what) {
  for (Symbol s : {Symbol::X, Symbol::Y, Symbol::Yp, Symbol::D, Symbol::U}) {
    if (std::find(allowed.begin(), allowed.end(), s) != allowed.end()) continue;
    if (e.references(s)) {
      throw InvalidArgument(what + " must not reference '" + to_string(s) + "'");
    }
  }
}

// d^k/ds^k s^m evaluated at s.
double monomial_derivative(int m, int k, double s) {
  if (k > m) return 0.0;
  double factor = 1.0;
  for (int i = 0; i < k; ++i) factor *= static_cast<double>(m - i);
  if (m == k) return factor;
  return factor * std::pow(s, m - k);
}

double l_inf(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

void VariationalProblem::validate() const {
  Anchor(op.side(), a, b);
  require_only(lagrangian, {Symbol::X, Symbol::Y, Symbol::Yp, Symbol::D}, "lagrangian");
  if (exact) require_only(*exact, {Symbol::X}, "exact solution");
  const auto n = static_cast<std::size_t>(op.integer_order());
  if (bc.at_a.size() != n || bc.at_b.size() != n) {
    std::ostringstream os;
    os << "expected " << n << " boundary conditions at each endpoint for alpha = "
       << op.alpha() << ", got " << bc.at_a.size() << " at a and " << bc.at_b.size()
       << " at b";
    throw InvalidArgument(os.str());
  }
}

CompositeRule make_discretization(const VariationalProblem& problem,
                                  const QuadratureConfig& config) {
  PanelScheme scheme;
  scheme.panels = config.panels;
  scheme.grading = config.grading;
  scheme.singular_end =
      problem.op.side() == Side::Left ? SingularEnd::Lower : SingularEnd::Upper;
  return make_composite(problem.a, problem.b, scheme, gauss_legendre(config.nodes));
}

// --- trial space ---------------------------------------------------------------

Polynomial TrialSpace::compose(std::span<const double> q) const {
  if (q.size() != null_basis.size()) {
    throw InvalidArgument("free vector has " + std::to_string(q.size()) +
                          " entries, trial space has " +
                          std::to_string(null_basis.size()));
  }
  Polynomial out = particular;
  for (std::size_t j = 0; j < q.size(); ++j) out = out + null_basis[j] * q[j];
  return out;
}

TrialSpace build_trial_space(const VariationalProblem& problem, int degree) {
  problem.validate();
  const int n = problem.op.integer_order();
  if (degree < 2 * n) {
    throw InvalidArgument("trial degree " + std::to_string(degree) +
                          " leaves no free coefficient for " + std::to_string(2 * n) +
                          " boundary conditions");
  }
  const Anchor anchor = problem.anchor();
  const double len = anchor.length();
  const double orient = anchor.orientation();
  const int m = 2 * n;

  // The conditions at s = 0 fix c_k = y^(k)(0) / k! for k < n exactly; the
  // conditions at s = L then determine c_n..c_{2n-1} through an n x n system.
  Eigen::MatrixXd far(n, n);
  for (int k = 0; k < n; ++k) {
    for (int col = 0; col < n; ++col) far(k, col) = monomial_derivative(n + col, k, len);
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(far);
  if (lu.rank() < n) throw InvalidArgument("degenerate Hermite boundary system");

  // Hermite interpolant (degree < 2n) of s-derivative data at s = 0 and s = L.
  auto hermite = [&](const std::vector<double>& at0, const std::vector<double>& atL) {
    std::vector<double> c(m, 0.0);
    double fact = 1.0;
    for (int k = 0; k < n; ++k) {
      if (k > 0) fact *= k;
      c[k] = at0[k] / fact;
    }
    Eigen::VectorXd rhs(n);
    for (int k = 0; k < n; ++k) {
      double known = 0.0;
      for (int i = 0; i < n; ++i) known += c[i] * monomial_derivative(i, k, len);
      rhs(k) = atL[k] - known;
    }
    const Eigen::VectorXd high = lu.solve(rhs);
    for (int i = 0; i < n; ++i) c[n + i] = high(i);
    return c;
  };

  // Left: s = 0 is x = a. Right: s = 0 is x = b. d/ds = orient * d/dx.
  const auto& at_zero = anchor.side() == Side::Left ? problem.bc.at_a : problem.bc.at_b;
  const auto& at_len = anchor.side() == Side::Left ? problem.bc.at_b : problem.bc.at_a;
  std::vector<double> data0(n), dataL(n);
  for (int k = 0; k < n; ++k) {
    const double sign = std::pow(orient, k);
    data0[k] = sign * at_zero[k];
    dataL[k] = sign * at_len[k];
  }
  std::vector<double> particular = hermite(data0, dataL);
  particular.resize(degree + 1, 0.0);

  std::vector<Polynomial> basis;
  const std::vector<double> zeros(n, 0.0);
  for (int j = m; j <= degree; ++j) {
    std::vector<double> atL(n);
    for (int k = 0; k < n; ++k) atL[k] = monomial_derivative(j, k, len);
    std::vector<double> c = hermite(zeros, atL);
    for (double& v : c) v = -v;
    c.resize(degree + 1, 0.0);
    c[j] = 1.0;
    basis.emplace_back(anchor, std::move(c));
  }
  return TrialSpace{degree, n, Polynomial(anchor, std::move(particular)), std::move(basis)};
}

// --- assembler -------------------------------------------------------------------

RitzAssembler::RitzAssembler(const VariationalProblem& problem, const TrialSpace& space,
                             CompositeRule rule, Execution exec)
    : problem_(problem), rule_(std::move(rule)), exec_(exec) {
  const Anchor anchor = problem.anchor();
  const auto nodes = static_cast<Eigen::Index>(rule_.size());
  const auto free = static_cast<Eigen::Index>(space.free_count());

  auto tabulate = [&](const Polynomial& p, Eigen::Ref<Eigen::VectorXd> y,
                      Eigen::Ref<Eigen::VectorXd> yp, Eigen::Ref<Eigen::VectorXd> d) {
    const Polynomial dp = p.derivative(1);
    const GeneralizedPolynomial frac = apply_fractional(problem.op, p);
    for (Eigen::Index i = 0; i < nodes; ++i) {
      const double s = anchor.shift(rule_.nodes[i]);
      y(i) = p.evaluate_shifted(s);
      yp(i) = dp.evaluate_shifted(s);
      d(i) = frac.evaluate_shifted(s);
    }
  };

  base_y_.resize(nodes);
  base_yp_.resize(nodes);
  base_d_.resize(nodes);
  tabulate(space.particular, base_y_, base_yp_, base_d_);
  basis_y_.resize(nodes, free);
  basis_yp_.resize(nodes, free);
  basis_d_.resize(nodes, free);
  for (Eigen::Index j = 0; j < free; ++j) {
    tabulate(space.null_basis[j], basis_y_.col(j), basis_yp_.col(j), basis_d_.col(j));
  }

  try {
    for (Slot s : kSlots) first_.push_back(problem.lagrangian.partial(s));
    for (const Expr& f : first_) {
      for (Slot s : kSlots) second_.push_back(f.partial(s));
    }
  } catch (const UnsupportedDerivative& e) {
    first_.clear();
    second_.clear();
    derivative_error_ = e.what();
  }
}

void RitzAssembler::require_derivatives() const {
  if (!derivative_error_.empty()) throw UnsupportedDerivative(derivative_error_);
}

EvalContext RitzAssembler::context_at(std::size_t node, std::span<const double> q) const {
  const auto i = static_cast<Eigen::Index>(node);
  EvalContext ctx;
  ctx.x = rule_.nodes[node];
  ctx.y = base_y_(i);
  ctx.yp = base_yp_(i);
  ctx.D = base_d_(i);
  for (std::size_t j = 0; j < q.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    ctx.y += q[j] * basis_y_(i, jj);
    ctx.yp += q[j] * basis_yp_(i, jj);
    ctx.D += q[j] * basis_d_(i, jj);
  }
  return ctx;
}

double RitzAssembler::objective(std::span<const double> q) const {
  if (static_cast<Eigen::Index>(q.size()) != basis_y_.cols()) {
    throw InvalidArgument("free vector size does not match the trial space");
  }
  std::vector<double> values(rule_.size());
  evaluate_nodes(
      [&](std::size_t i) { return problem_.lagrangian.evaluate(context_at(i, q)); },
      values, exec_);
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) sum += rule_.weights[i] * values[i];
  return sum;
}

Eigen::VectorXd RitzAssembler::gradient(std::span<const double> q) const {
  require_derivatives();
  const std::size_t nodes = rule_.size();
  // Weighted partials, three per node: w dL/dy, w dL/dyp, w dL/dD.
  std::vector<double> values(3 * nodes);
  evaluate_nodes(
      [&](std::size_t k) {
        const std::size_t i = k / 3;
        return rule_.weights[i] * first_[k % 3].evaluate(context_at(i, q));
      },
      values, exec_);
  const Eigen::Map<const Eigen::Matrix<double, 3, Eigen::Dynamic>> w(
      values.data(), 3, static_cast<Eigen::Index>(nodes));
  Eigen::VectorXd g = basis_y_.transpose() * w.row(0).transpose();
  g.noalias() += basis_yp_.transpose() * w.row(1).transpose();
  g.noalias() += basis_d_.transpose() * w.row(2).transpose();
  return g;
}

Eigen::MatrixXd RitzAssembler::hessian(std::span<const double> q) const {
  require_derivatives();
  const std::size_t nodes = rule_.size();
  std::vector<double> values(9 * nodes);
  evaluate_nodes(
      [&](std::size_t k) {
        const std::size_t i = k / 9;
        return rule_.weights[i] * second_[k % 9].evaluate(context_at(i, q));
      },
      values, exec_);
  const Eigen::Map<const Eigen::Matrix<double, 9, Eigen::Dynamic>> w(
      values.data(), 9, static_cast<Eigen::Index>(nodes));
  const std::array<const Eigen::MatrixXd*, 3> slot = {&basis_y_, &basis_yp_, &basis_d_};
  const auto free = basis_y_.cols();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(free, free);
  for (int s = 0; s < 3; ++s) {
    for (int t = 0; t < 3; ++t) {
      const Eigen::VectorXd weights = w.row(3 * s + t).transpose();
      h.noalias() += slot[s]->transpose() * weights.asDiagonal() * (*slot[t]);
    }
  }
  return 0.5 * (h + h.transpose());
}

double assemble_objective(const VariationalProblem& problem, const TrialSpace& space,
                          std::span<const double> q, const CompositeRule& rule,
                          Execution exec) {
  const Polynomial y = space.compose(q);
  const Polynomial dy = y.derivative(1);
  const GeneralizedPolynomial frac = apply_fractional(problem.op, y);
  const Anchor& anchor = y.anchor();
  return integrate(
      [&](double x) {
        const double s = anchor.shift(x);
        EvalContext ctx;
        ctx.x = x;
        ctx.y = y.evaluate_shifted(s);
        ctx.yp = dy.evaluate_shifted(s);
        ctx.D = frac.evaluate_shifted(s);
        return problem.lagrangian.evaluate(ctx);
      },
      rule, exec);
}

Eigen::VectorXd gradient(const VariationalProblem& problem, const TrialSpace& space,
                         std::span<const double> q, const CompositeRule& rule,
                         Execution exec) {
  return RitzAssembler(problem, space, rule, exec).gradient(q);
}

// --- Newton solve ------------------------------------------------------------------

namespace {

constexpr double kLambdaCap = 1e6;
constexpr int kMaxHalvings = 40;

Eigen::MatrixXd fd_hessian(const RitzAssembler& asmb, const Eigen::VectorXd& q) {
  const auto n = q.size();
  Eigen::MatrixXd h(n, n);
  Eigen::VectorXd probe = q;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double step = 1e-6 * (1.0 + std::abs(q(k)));
    probe(k) = q(k) + step;
    const Eigen::VectorXd gp = asmb.gradient({probe.data(), static_cast<std::size_t>(n)});
    probe(k) = q(k) - step;
    const Eigen::VectorXd gm = asmb.gradient({probe.data(), static_cast<std::size_t>(n)});
    probe(k) = q(k);
    h.col(k) = (gp - gm) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

RitzSolution make_solution(const VariationalProblem& problem, const TrialSpace& space,
                           const RitzAssembler& asmb, Execution exec, const Eigen::VectorXd& q,
                           double objective, double grad_norm, int iterations, bool converged) {
  std::vector<double> free(q.data(), q.data() + q.size());
  Polynomial trial = space.compose(free);
  GeneralizedPolynomial frac = apply_fractional(problem.op, trial);
  std::optional<double> error;
  if (problem.exact) error = l2_error(*problem.exact, trial, asmb.rule(), exec);
  return RitzSolution{space.degree, std::move(trial), std::move(frac), std::move(free),
                      objective, grad_norm, iterations, converged, error, {}};
}

bool finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

}  // namespace

RitzSolution solve_stationary(const VariationalProblem& problem, const TrialSpace& space,
                              const SolverOptions& options) {
  if (space.free_count() < 1) throw InvalidArgument("trial space has no free coefficient");
  const RitzAssembler asmb(problem, space, make_discretization(problem, options.quadrature),
                           options.execution);
  if (!asmb.differentiable()) throw UnsupportedDerivative(asmb.derivative_error());

  const double sign = problem.sense == Sense::Minimize ? 1.0 : -1.0;
  const auto n = static_cast<Eigen::Index>(space.free_count());
  const auto span_of = [n](const Eigen::VectorXd& v) {
    return std::span<const double>(v.data(), static_cast<std::size_t>(n));
  };

  Eigen::VectorXd q = Eigen::VectorXd::Zero(n);
  if (!options.warm_start.empty()) {
    if (static_cast<Eigen::Index>(options.warm_start.size()) != n) {
      throw InvalidArgument("warm start has the wrong length");
    }
    q = Eigen::Map<const Eigen::VectorXd>(options.warm_start.data(), n);
  }

  double f = sign * asmb.objective(span_of(q));
  if (!std::isfinite(f)) throw NumericalError("objective is not finite at the initial guess");
  Eigen::VectorXd g = sign * asmb.gradient(span_of(q));
  if (!finite(g)) throw NumericalError("gradient is not finite at the initial guess");

  double lambda = 0.0;
  int iterations = 0;
  std::string failure;
  while (true) {
    if (l_inf(g) <= options.grad_tol) {
      return make_solution(problem, space, asmb, options.execution, q, sign * f, l_inf(g), iterations, true);
    }
    if (iterations >= options.max_iterations) {
      failure = "iteration limit reached";
      break;
    }
    Eigen::MatrixXd h = options.hessian == HessianMode::Analytic
                            ? Eigen::MatrixXd(sign * asmb.hessian(span_of(q)))
                            : Eigen::MatrixXd(sign * fd_hessian(asmb, q));
    if (!finite(h)) throw NumericalError("Hessian is not finite");
    const double diag_scale = std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());

    bool accepted = false;
    Eigen::VectorXd q_new;
    double f_new = f;
    while (!accepted) {
      const Eigen::MatrixXd shifted =
          h + lambda * Eigen::MatrixXd::Identity(n, n);
      const Eigen::VectorXd d = shifted.fullPivLu().solve(-g);
      if (d.allFinite() && g.dot(d) < 0.0) {
        double t = 1.0;
        for (int halving = 0; halving < kMaxHalvings; ++halving, t *= 0.5) {
          q_new = q + t * d;
          f_new = sign * asmb.objective(span_of(q_new));
          if (std::isfinite(f_new) &&
              f_new <= f + 4.0 * std::numeric_limits<double>::epsilon() * std::abs(f)) {
            accepted = true;
            break;
          }
        }
      }
      if (accepted) break;
      if (lambda >= kLambdaCap) break;
      lambda = lambda == 0.0 ? 1e-8 * diag_scale : std::min(10.0 * lambda, kLambdaCap);
    }
    if (!accepted) {
      failure = "no descent step found (damping at cap)";
      break;
    }
    ++iterations;
    lambda = lambda < 1e-12 * diag_scale ? 0.0 : lambda / 10.0;

    const bool stalled = (q_new - q).cwiseAbs().maxCoeff() <=
                         4.0 * std::numeric_limits<double>::epsilon() *
                             (1.0 + q.cwiseAbs().maxCoeff());
    q = q_new;
    f = f_new;
    g = sign * asmb.gradient(span_of(q));
    if (!finite(g)) throw NumericalError("gradient is not finite");
    if (stalled && l_inf(g) > options.grad_tol) {
      failure = "step size fell below roundoff";
      break;
    }
  }
  std::ostringstream os;
  os << "Newton iteration did not converge at N = " << space.degree << ": " << failure
     << " (|grad|_inf = " << l_inf(g) << ", tolerance " << options.grad_tol << ")";
  throw NoConvergenceError(os.str(),
                           make_solution(problem, space, asmb, options.execution, q, sign * f, l_inf(g), iterations, false));
}

RitzSolution solve_adaptive(const VariationalProblem& problem, const SolverOptions& options) {
  const int n = problem.op.integer_order();
  if (options.n_min < 2 * n) {
    throw InvalidArgument("N_min must be at least 2 ceil(alpha) = " + std::to_string(2 * n));
  }
  if (options.n_max < options.n_min) throw InvalidArgument("N_max must be >= N_min");
  if (!(options.eps > 0.0)) throw InvalidArgument("eps must be positive");

  std::optional<RitzSolution> previous;
  std::vector<std::string> diagnostics;
  for (int degree = options.n_min; degree <= options.n_max; ++degree) {
    SolverOptions per_degree = options;
    per_degree.warm_start.clear();
    RitzSolution current = solve_stationary(problem, build_trial_space(problem, degree),
                                            per_degree);
    if (previous) {
      const double diff = current.objective - previous->objective;
      const bool monotone = problem.sense == Sense::Minimize ? diff <= 1e-9 : diff >= -1e-9;
      if (!monotone) {
        std::ostringstream os;
        os << "J moved against the optimization sense from N = " << degree - 1
           << " to N = " << degree << " (difference " << diff << ")";
        diagnostics.push_back(os.str());
      }
      if (std::abs(diff) <= options.eps) {
        current.diagnostics = diagnostics;
        return current;
      }
    }
    previous = std::move(current);
  }
  previous->diagnostics = diagnostics;
  std::ostringstream msg;
  msg << "stopping rule |J[y_N] - J[y_{N-1}]| <= " << options.eps << " not met by N = "
      << options.n_max;
  throw NoConvergenceError(msg.str(), *previous);
}

double l2_error(const Expr& exact, const Polynomial& approx, const CompositeRule& rule,
                Execution exec) {
  return integrate(
      [&](double x) {
        EvalContext ctx;
        ctx.x = x;
        const double diff = exact.evaluate(ctx) - approx.evaluate(x);
        return diff * diff;
      },
      rule, exec);
}

}  // namespace fracritz
