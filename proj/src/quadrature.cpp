#include "fracritz/quadrature.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <sstream>

#include "fracritz/errors.hpp"

namespace fracritz {

QuadratureRule gauss_legendre(int m) {
  if (m < 1 || m > 256) {
    throw InvalidArgument("Gauss-Legendre order must be in [1, 256], got " +
                          std::to_string(m));
  }
  QuadratureRule rule;
  rule.nodes.resize(m);
  rule.weights.resize(m);
  const int half = (m + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Three-term recurrence for P_m(x) and P_{m-1}(x).
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) <= 1e-15) break;
    }
    // Recompute the derivative at the converged root for the weight.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= m; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = m * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[m - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[m - 1 - i] = w;
  }
  if (m % 2 == 1) rule.nodes[m / 2] = 0.0;
  return rule;
}

std::vector<double> PanelScheme::breakpoints(double a, double b) const {
  if (panels < 1) throw InvalidArgument("panel count must be positive");
  if (!(grading >= 1.0)) throw InvalidArgument("grading exponent must be >= 1");
  if (!(a < b)) throw InvalidArgument("integration interval must satisfy a < b");
  std::vector<double> out(panels + 1);
  const double len = b - a;
  for (int k = 0; k <= panels; ++k) {
    const double u = static_cast<double>(k) / panels;
    switch (singular_end) {
      case SingularEnd::None: out[k] = a + len * u; break;
      case SingularEnd::Lower: out[k] = a + len * std::pow(u, grading); break;
      case SingularEnd::Upper: out[k] = b - len * std::pow(1.0 - u, grading); break;
    }
  }
  out.front() = a;
  out.back() = b;
  return out;
}

CompositeRule make_composite(double a, double b, const PanelScheme& scheme,
                             const QuadratureRule& rule) {
  const std::vector<double> bp = scheme.breakpoints(a, b);
  CompositeRule out;
  out.a = a;
  out.b = b;
  out.nodes.reserve(bp.size() * rule.nodes.size());
  out.weights.reserve(bp.size() * rule.nodes.size());
  const std::size_t panels = bp.size() - 1;
  const bool graded = scheme.singular_end != SingularEnd::None && scheme.grading > 1.0;
  const double g = scheme.grading;
  for (std::size_t k = 0; k < panels; ++k) {
    const double lo = bp[k];
    const double hi = bp[k + 1];
    const double width = hi - lo;
    if (graded && scheme.singular_end == SingularEnd::Lower && k == 0) {
      // Endpoint panel: x = lo + width u^g, u in (0, 1).
      for (int i = 0; i < rule.order(); ++i) {
        const double u = 0.5 * (rule.nodes[i] + 1.0);
        out.nodes.push_back(lo + width * std::pow(u, g));
        out.weights.push_back(0.5 * rule.weights[i] * width * g * std::pow(u, g - 1.0));
      }
      continue;
    }
    if (graded && scheme.singular_end == SingularEnd::Upper && k + 1 == panels) {
      for (int i = rule.order() - 1; i >= 0; --i) {
        const double u = 0.5 * (rule.nodes[i] + 1.0);
        out.nodes.push_back(hi - width * std::pow(u, g));
        out.weights.push_back(0.5 * rule.weights[i] * width * g * std::pow(u, g - 1.0));
      }
      continue;
    }
    const double half = 0.5 * width;
    const double mid = 0.5 * (hi + lo);
    for (int i = 0; i < rule.order(); ++i) {
      out.nodes.push_back(mid + half * rule.nodes[i]);
      out.weights.push_back(half * rule.weights[i]);
    }
  }
  return out;
}

void evaluate_nodes(const std::function<double(std::size_t)>& f,
                    std::span<double> out, Execution exec) {
  const auto n = static_cast<std::ptrdiff_t>(out.size());
  if (exec == Execution::Serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = f(static_cast<std::size_t>(i));
    return;
  }
  std::ptrdiff_t failed_at = n;
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = f(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(fracritz_node_failure)
      {
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
}

double integrate(const Integrand& f, const CompositeRule& rule, Execution exec) {
  std::vector<double> values(rule.size());
  evaluate_nodes([&](std::size_t i) { return f(rule.nodes[i]); }, values, exec);
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      std::ostringstream os;
      os.precision(17);
      os << "integrand is not finite (" << values[i] << ") at node x = "
         << rule.nodes[i];
      throw IntegrationError(os.str(), rule.nodes[i]);
    }
    sum += rule.weights[i] * values[i];
  }
  return sum;
}

double integrate(const Integrand& f, double a, double b, const PanelScheme& scheme,
                 const QuadratureRule& rule, Execution exec) {
  return integrate(f, make_composite(a, b, scheme, rule), exec);
}

}  // namespace fracritz
