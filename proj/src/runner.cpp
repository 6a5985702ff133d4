#include "fracritz/runner.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>

namespace fracritz {

namespace {

std::string fmt(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::string basis_label(const Anchor& anchor) {
  return anchor.side() == Side::Left ? "(x-a)^i" : "(b-x)^i";
}

nlohmann::ordered_json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

// Solves at a fixed degree, or adaptively; NoConvergenceError keeps the best.
RitzSolution solve(const RunSpec& spec, bool& converged, std::string& message) {
  try {
    RitzSolution s = spec.fixed_degree
                         ? solve_stationary(spec.problem,
                                            build_trial_space(spec.problem, *spec.fixed_degree),
                                            spec.options)
                         : solve_adaptive(spec.problem, spec.options);
    converged = true;
    return s;
  } catch (const NoConvergenceError& e) {
    converged = false;
    message = e.what();
    return e.best();
  }
}

std::string sample_table(const RunSpec& spec, const RitzSolution& sol,
                         const RunOptions& options) {
  const auto grid = sample_grid(spec.problem.a, spec.problem.b, spec.samples,
                                options.include_endpoints);
  const bool has_exact = spec.problem.exact.has_value();
  const bool has_control = spec.control.has_value();
  const bool has_exact_control = has_control && spec.control->exact_control.has_value();
  std::ostringstream out;
  out << "x,y_N";
  if (has_exact) out << ",y_exact,abs_err";
  if (has_control) {
    out << ",u_N";
    if (has_exact_control) out << ",u_exact,u_abs_err";
  }
  out << '\n';
  for (double x : grid) {
    const double y = sol.trial.evaluate(x);
    out << fmt(x) << ',' << fmt(y);
    EvalContext ctx;
    ctx.x = x;
    if (has_exact) {
      const double ye = spec.problem.exact->evaluate(ctx);
      out << ',' << fmt(ye) << ',' << fmt(std::abs(ye - y));
    }
    if (has_control) {
      const double u = control_at(*spec.control, sol, x);
      out << ',' << fmt(u);
      if (has_exact_control) {
        const double ue = spec.control->exact_control->evaluate(ctx);
        out << ',' << fmt(ue) << ',' << fmt(std::abs(ue - u));
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::array<char, 32> buf{};
  std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf.data();
}

}  // namespace

std::vector<double> sample_grid(double a, double b, int samples, bool include_endpoints) {
  if (samples < 1) throw InvalidArgument("sample count must be positive");
  std::vector<double> grid(samples);
  const double len = b - a;
  for (int i = 0; i < samples; ++i) {
    if (include_endpoints) {
      grid[i] = samples == 1 ? a : a + len * static_cast<double>(i) / (samples - 1);
    } else {
      grid[i] = a + len * (static_cast<double>(i) + 0.5) / samples;
    }
  }
  return grid;
}

RunOutcome run_config(const ProblemConfig& config, const std::string& problem_path,
                      const RunOptions& options) {
  RunOutcome out;
  out.spec = build_run_spec(config);
  RunSpec& spec = out.spec;
  spec.options.execution = options.execution;

  bool converged = false;
  RitzSolution sol = solve(spec, converged, out.message);
  out.exit_code = converged ? 0 : 2;

  const CompositeRule rule = make_discretization(spec.problem, spec.options.quadrature);
  out.l2_error_state = sol.l2_error;
  if (spec.control && spec.control->exact_control) {
    out.l2_error_control = control_l2_error(*spec.control, sol, rule, options.execution);
  }

  nlohmann::ordered_json& r = out.result;
  r["problem_path"] = problem_path;
  if (options.timestamp) r["timestamp"] = utc_timestamp();
  r["title"] = spec.title;
  r["kind"] = spec.kind == ProblemKind::Variational ? "variational" : "optimal_control";
  r["config"] = config.to_json();
  r["degree"] = sol.degree;
  r["basis"] = basis_label(sol.trial.anchor());
  r["coefficients"] = std::vector<double>(sol.coeffs().begin(), sol.coeffs().end());
  r["free_vector"] = sol.free;
  r["objective"] = sol.objective;
  r["grad_norm"] = sol.grad_norm;
  r["iterations"] = sol.iterations;
  r["converged"] = converged;
  r["l2_error_state"] = optional_number(out.l2_error_state);
  r["l2_error_control"] = optional_number(out.l2_error_control);
  r["diagnostics"] = sol.diagnostics;
  if (!converged) r["message"] = out.message;

  out.csv = sample_table(spec, sol, options);
  out.solution = std::move(sol);
  return out;
}

void write_outputs(const RunOutcome& outcome, const std::filesystem::path& out_dir,
                   const std::string& stem) {
  std::filesystem::create_directories(out_dir);
  const auto csv_path = out_dir / (stem + ".solution.csv");
  const auto json_path = out_dir / (stem + ".result.json");
  std::ofstream csv(csv_path);
  if (!csv) throw Error("cannot write " + csv_path.string());
  csv << outcome.csv;
  std::ofstream json(json_path);
  if (!json) throw Error("cannot write " + json_path.string());
  json << outcome.result.dump(2) << '\n';
}

std::vector<TableRow> run_table(const ProblemConfig& base, std::span<const double> alphas,
                                std::span<const int> degrees) {
  const auto cells = static_cast<std::ptrdiff_t>(alphas.size() * degrees.size());
  std::vector<TableRow> rows(static_cast<std::size_t>(cells));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(cells));
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t c = 0; c < cells; ++c) {
    try {
      const std::size_t ia = static_cast<std::size_t>(c) / degrees.size();
      const std::size_t in = static_cast<std::size_t>(c) % degrees.size();
      ProblemConfig cfg = base;
      cfg.apply_override("alpha=" + fmt(alphas[ia]));
      cfg.apply_override("solver.N=" + std::to_string(degrees[in]));
      RunOptions opts;
      opts.timestamp = false;
      opts.execution = Execution::Serial;
      const RunOutcome o = run_config(cfg, "", opts);
      TableRow& row = rows[static_cast<std::size_t>(c)];
      row.alpha = alphas[ia];
      row.degree = degrees[in];
      if (!o.l2_error_state) throw InvalidArgument("table requires an exact solution");
      row.error_state = *o.l2_error_state;
      row.error_control = o.l2_error_control;
      row.objective = o.solution->objective;
      row.converged = o.exit_code == 0;
    } catch (...) {
      errors[static_cast<std::size_t>(c)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

std::string table_csv(std::span<const TableRow> rows) {
  const bool control = !rows.empty() && rows.front().error_control.has_value();
  std::ostringstream out;
  out << "alpha,N,error_state";
  if (control) out << ",error_control";
  out << ",objective,converged\n";
  for (const TableRow& r : rows) {
    out << fmt(r.alpha) << ',' << r.degree << ',' << fmt(r.error_state);
    if (control) out << ',' << (r.error_control ? fmt(*r.error_control) : "");
    out << ',' << fmt(r.objective) << ',' << (r.converged ? "true" : "false") << '\n';
  }
  return out.str();
}

}  // namespace fracritz
