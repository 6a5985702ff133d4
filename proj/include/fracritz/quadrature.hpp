#pragma once

#include <functional>
#include <span>
#include <vector>

namespace fracritz {

/// m-point rule on [-1, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  int order() const noexcept { return static_cast<int>(nodes.size()); }
};

/// Gauss-Legendre rule with 1 <= m <= 256 nodes. Nodes are Legendre roots
/// found by Newton iteration from Tricomi-type initial guesses.
QuadratureRule gauss_legendre(int m);

enum class SingularEnd { None, Lower, Upper };

/// Composite panel layout on [a, b]. With grading g > 1 the breakpoints
/// follow a + (b - a) (k / P)^g (or the mirror image for Upper), so panels
/// shrink geometrically toward the singular endpoint.
struct PanelScheme {
  int panels = 32;
  double grading = 3.0;
  SingularEnd singular_end = SingularEnd::Lower;

  /// P + 1 strictly increasing breakpoints from a to b.
  std::vector<double> breakpoints(double a, double b) const;
};

/// Physical nodes and weights of a composite rule on [a, b]. Nodes are
/// always strictly inside the panels, so endpoint singularities are never
/// sampled. With grading g > 1 the panel touching the singular end is
/// additionally mapped by x = endpoint + width u^g before applying the rule,
/// which removes the bulk of an s^p (p > -1) endpoint singularity.
struct CompositeRule {
  double a = 0.0;
  double b = 1.0;
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
};

CompositeRule make_composite(double a, double b, const PanelScheme& scheme,
                             const QuadratureRule& rule);

enum class Execution { Serial, Parallel };

using Integrand = std::function<double(double)>;

/// Sum of w_i f(x_i) over the composite rule.
///
/// The integrand is evaluated at every node (on the OpenMP team when
/// `exec` is Parallel, so f must then be safe to call concurrently) and the
/// weighted sum is accumulated serially in node order. Both execution modes
/// therefore return bit-identical results. A non-finite f(x_i) raises
/// IntegrationError naming the first offending node.
double integrate(const Integrand& f, const CompositeRule& rule,
                 Execution exec = Execution::Parallel);

double integrate(const Integrand& f, double a, double b,
                 const PanelScheme& scheme, const QuadratureRule& rule,
                 Execution exec = Execution::Parallel);

/// Evaluates f at every node into `out` (size must match). Throws the
/// error of the lowest-indexed failing node, whatever thread raised it.
void evaluate_nodes(const std::function<double(std::size_t)>& f,
                    std::span<double> out, Execution exec);

}  // namespace fracritz
