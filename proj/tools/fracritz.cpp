// fracritz: command-line front end for the fractional Ritz solver.
//
//   fracritz run <file> [--set k=v]... [--out dir] [--no-timestamp] [--include-endpoints]
//   fracritz table <example> --alphas <list> --Ns <list> [--set k=v]... [--out file]
//   fracritz examples list
//   fracritz examples show <name>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "fracritz/corpus.hpp"
#include "fracritz/runner.hpp"

namespace {

using namespace fracritz;

ProblemConfig load_problem(const std::string& source) {
  if (std::filesystem::exists(source)) return ProblemConfig::load(source);
  if (const auto* entry = find_corpus_entry(source)) return ProblemConfig::parse(entry->text);
  throw std::runtime_error("problem file '" + source + "' not found");
}

int cmd_run(const std::string& file, const std::vector<std::string>& overrides,
            const std::string& out_dir, bool no_timestamp, bool include_endpoints) {
  ProblemConfig cfg = load_problem(file);
  for (const auto& o : overrides) cfg.apply_override(o);
  RunOptions opts;
  opts.timestamp = !no_timestamp;
  opts.include_endpoints = include_endpoints;
  const RunOutcome out = run_config(cfg, file, opts);
  std::string stem = std::filesystem::path(file).stem().string();
  if (stem.ends_with(".result")) stem.resize(stem.size() - 7);
  write_outputs(out, out_dir, stem);
  const auto& sol = *out.solution;
  std::cout << "N = " << sol.degree << "  J = " << sol.objective
            << "  |grad| = " << sol.grad_norm << "  iterations = " << sol.iterations << '\n';
  if (out.l2_error_state) std::cout << "Error{y,y_N} = " << *out.l2_error_state << '\n';
  if (out.l2_error_control) std::cout << "Error{u,u_N} = " << *out.l2_error_control << '\n';
  for (const auto& d : sol.diagnostics) std::cerr << "warning: " << d << '\n';
  if (out.exit_code != 0) std::cerr << "not converged: " << out.message << '\n';
  std::cout << "wrote " << (std::filesystem::path(out_dir) / (stem + ".result.json")).string()
            << '\n';
  return out.exit_code;
}

int cmd_table(const std::string& example, const std::vector<double>& alphas,
              const std::vector<int>& degrees, const std::vector<std::string>& overrides,
              const std::string& out_file) {
  const auto* entry = find_corpus_entry(example);
  if (!entry) throw InputError("unknown example set '" + example + "'", 0);
  ProblemConfig cfg = ProblemConfig::parse(entry->text);
  for (const auto& o : overrides) cfg.apply_override(o);
  const auto rows = run_table(cfg, alphas, degrees);
  const std::string csv = table_csv(rows);
  if (out_file.empty()) {
    std::cout << csv;
  } else {
    std::ofstream(out_file) << csv;
  }
  for (const auto& r : rows) {
    if (!r.converged) return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ritz direct method for fractional variational and optimal control problems"};
  app.require_subcommand(1);

  std::string file;
  std::vector<std::string> overrides;
  std::string out_dir = ".";
  bool no_timestamp = false;
  bool include_endpoints = false;
  auto* run = app.add_subcommand("run", "solve a problem file");
  run->add_option("file", file, "problem file (or bundled example name)")->required();
  run->add_option("--set", overrides, "override a key, e.g. --set solver.N=4");
  run->add_option("--out", out_dir, "output directory");
  run->add_flag("--no-timestamp", no_timestamp, "omit the timestamp from result.json");
  run->add_flag("--include-endpoints", include_endpoints,
                "sample the interval endpoints too");

  std::string example;
  std::vector<double> alphas;
  std::vector<int> degrees;
  std::string table_out;
  auto* table = app.add_subcommand("table", "error table over (alpha, N) for a bundled example");
  table->add_option("example", example, "bundled example name")->required();
  table->add_option("--alphas", alphas, "comma-separated fractional orders")
      ->required()
      ->delimiter(',');
  table->add_option("--Ns", degrees, "comma-separated trial degrees")->required()->delimiter(',');
  table->add_option("--set", overrides, "override a key, e.g. --set param.beta=2");
  table->add_option("--out", table_out, "write the CSV here instead of stdout");

  auto* examples = app.add_subcommand("examples", "bundled problem corpus");
  examples->require_subcommand(1);
  auto* list = examples->add_subcommand("list", "list bundled examples");
  std::string show_name;
  auto* show = examples->add_subcommand("show", "print a bundled problem file");
  show->add_option("name", show_name)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(file, overrides, out_dir, no_timestamp, include_endpoints);
    if (*table) return cmd_table(example, alphas, degrees, overrides, table_out);
    if (*list) {
      for (const auto& e : fracritz::corpus()) {
        const auto cfg = fracritz::ProblemConfig::parse(e.text);
        const auto* title = cfg.find("problem", "title");
        std::cout << e.name << "\t" << (title ? title->text : "") << '\n';
      }
      return 0;
    }
    if (*show) {
      const auto* e = fracritz::find_corpus_entry(show_name);
      if (!e) throw fracritz::InputError("unknown example '" + show_name + "'", 0);
      std::cout << e->text;
      return 0;
    }
  } catch (const fracritz::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const fracritz::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
