#include "fracritz/optimal_control.hpp"

#include <sstream>

namespace fracritz {

void OptimalControlProblem::validate() const {
  Anchor(op.side(), a, b);
  if (!cost.references(Symbol::U)) {
    throw InvalidArgument("cost does not reference u; nothing to eliminate "
                          "(state the problem as variational instead)");
  }
  if (cost.references(Symbol::Yp) || cost.references(Symbol::D)) {
    throw InvalidArgument("cost may only reference t, y and u");
  }
  if (control.references(Symbol::U)) {
    throw InvalidArgument("control law g must not reference u");
  }
  if (exact_state && (exact_state->references(Symbol::Y) ||
                      exact_state->references(Symbol::Yp) ||
                      exact_state->references(Symbol::D) ||
                      exact_state->references(Symbol::U))) {
    throw InvalidArgument("exact state may only reference t");
  }
  if (exact_control && (exact_control->references(Symbol::Y) ||
                        exact_control->references(Symbol::Yp) ||
                        exact_control->references(Symbol::D) ||
                        exact_control->references(Symbol::U))) {
    throw InvalidArgument("exact control may only reference t");
  }
}

VariationalProblem reduce_to_fvp(const OptimalControlProblem& ocp) {
  ocp.validate();
  VariationalProblem fvp;
  fvp.a = ocp.a;
  fvp.b = ocp.b;
  fvp.op = ocp.op;
  fvp.lagrangian = ocp.cost.substitute(Symbol::U, ocp.control);
  fvp.bc = ocp.bc;
  fvp.exact = ocp.exact_state;
  fvp.sense = ocp.sense;
  fvp.validate();
  return fvp;
}

double control_at(const OptimalControlProblem& ocp, const RitzSolution& state, double t) {
  const Anchor& anchor = state.trial.anchor();
  const double s = anchor.shift(t);
  EvalContext ctx;
  ctx.x = t;
  ctx.y = state.trial.evaluate_shifted(s);
  ctx.yp = state.trial.derivative(1).evaluate_shifted(s);
  ctx.D = state.fractional.evaluate_shifted(s);
  return ocp.control.evaluate(ctx);
}

std::vector<std::pair<double, double>> recover_control(const OptimalControlProblem& ocp,
                                                       const RitzSolution& state,
                                                       std::span<const double> samples) {
  std::vector<std::pair<double, double>> out;
  out.reserve(samples.size());
  for (double t : samples) out.emplace_back(t, control_at(ocp, state, t));
  return out;
}

double control_l2_error(const OptimalControlProblem& ocp, const RitzSolution& state,
                        const CompositeRule& rule, Execution exec) {
  if (!ocp.exact_control) {
    throw InvalidArgument("control error requested but no exact control is given");
  }
  const Polynomial dy = state.trial.derivative(1);
  const Anchor& anchor = state.trial.anchor();
  return integrate(
      [&](double t) {
        const double s = anchor.shift(t);
        EvalContext ctx;
        ctx.x = t;
        ctx.y = state.trial.evaluate_shifted(s);
        ctx.yp = dy.evaluate_shifted(s);
        ctx.D = state.fractional.evaluate_shifted(s);
        const double u_n = ocp.control.evaluate(ctx);
        EvalContext exact_ctx;
        exact_ctx.x = t;
        const double diff = ocp.exact_control->evaluate(exact_ctx) - u_n;
        return diff * diff;
      },
      rule, exec);
}

}  // namespace fracritz
