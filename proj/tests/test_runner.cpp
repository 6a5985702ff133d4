#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fracritz/corpus.hpp"
#include "fracritz/runner.hpp"

using namespace fracritz;
namespace fs = std::filesystem;

namespace {

ProblemConfig bundled(const char* name) { return ProblemConfig::parse(find_corpus_entry(name)->text); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("fracritz_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(FRACRITZ_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("corpus covers the eight examples") {
  CHECK(corpus().size() == 8);
  for (const auto& e : corpus()) {
    const auto spec = build_run_spec(ProblemConfig::parse(e.text));
    CHECK(spec.problem.exact.has_value());
  }
  CHECK(find_corpus_entry("nope") == nullptr);
}

TEST_CASE("sample grid") {
  const auto mid = sample_grid(0.0, 1.0, 4, false);
  CHECK(mid == std::vector<double>{0.125, 0.375, 0.625, 0.875});
  const auto ends = sample_grid(0.0, 1.0, 3, true);
  CHECK(ends == std::vector<double>{0.0, 0.5, 1.0});
}

TEST_CASE("example_3_1 coefficients through the runner") {
  auto cfg = bundled("example_3_1");
  cfg.apply_override("alpha=0.5");
  cfg.apply_override("solver.N=2");
  RunOptions opts;
  opts.timestamp = false;
  const auto out = run_config(cfg, "example_3_1.prob", opts);
  CHECK(out.exit_code == 0);
  const auto& c = out.result["coefficients"];
  CHECK(std::abs(c[0].get<double>()) < 1e-12);
  CHECK(c[1].get<double>() == doctest::Approx(1.22568).epsilon(5e-6));
  CHECK(c[2].get<double>() == doctest::Approx(-0.225676).epsilon(5e-6));
  CHECK(out.result["config"]["solver"]["N"] == 2);
  CHECK_FALSE(out.result.contains("timestamp"));
  CHECK(out.csv.starts_with("x,y_N,y_exact,abs_err\n"));
  CHECK(std::count(out.csv.begin(), out.csv.end(), '\n') == 102);
}

TEST_CASE("exam11 through the runner") {
  const auto out = run_config(bundled("exam11"), "exam11.prob");
  CHECK(out.exit_code == 0);
  CHECK(out.result["objective"].get<double>() <= 1e-12);
  const auto& c = out.result["coefficients"];
  CHECK(std::abs(c[1].get<double>()) < 1e-9);
  CHECK(std::abs(c[2].get<double>() - 1.0) < 1e-9);
  CHECK(out.result.contains("timestamp"));
  CHECK(out.csv.starts_with("x,y_N,y_exact,abs_err,u_N,u_exact,u_abs_err\n"));
  CHECK(*out.l2_error_control <= 1e-12);
}

TEST_CASE("non-convergence gives exit code 2 and the best iterate") {
  auto cfg = bundled("example_3_2");
  cfg.apply_override("solver.max_iterations=2");
  const auto out = run_config(cfg, "example_3_2.prob");
  CHECK(out.exit_code == 2);
  CHECK_FALSE(out.result["converged"].get<bool>());
  CHECK(out.result["coefficients"].size() == 6);
  CHECK(out.result["message"].get<std::string>().find("iteration limit") != std::string::npos);
}

TEST_CASE("results are deterministic and round-trip") {
  RunOptions opts;
  opts.timestamp = false;
  auto cfg = bundled("example_4");
  cfg.apply_override("solver.N=5");
  const auto a = run_config(cfg, "x.prob", opts);
  const auto b = run_config(cfg, "x.prob", opts);
  CHECK(a.result.dump(2) == b.result.dump(2));
  CHECK(a.csv == b.csv);

  RunOptions serial = opts;
  serial.execution = Execution::Serial;
  CHECK(run_config(cfg, "x.prob", serial).result.dump(2) == a.result.dump(2));

  const auto echoed = ProblemConfig::from_json(a.result);
  const auto c = run_config(echoed, "x.prob", opts);
  CHECK(c.result.dump(2) == a.result.dump(2));
}

TEST_CASE("write_outputs") {
  const auto dir = scratch("write");
  const auto out = run_config(bundled("exam6"), "exam6.prob");
  write_outputs(out, dir, "exam6");
  CHECK(fs::exists(dir / "exam6.solution.csv"));
  const auto json = nlohmann::json::parse(slurp(dir / "exam6.result.json"));
  for (const char* key : {"config", "coefficients", "objective", "grad_norm", "iterations",
                          "converged", "l2_error_state", "l2_error_control"}) {
    CHECK(json.contains(key));
  }
}

TEST_CASE("table rows come back in sweep order") {
  const std::vector<double> alphas = {0.75, 0.25};
  const std::vector<int> Ns = {4, 2, 3};
  const auto rows = run_table(bundled("example_3x"), alphas, Ns);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].alpha == 0.75);
  CHECK(rows[0].degree == 4);
  CHECK(rows[2].degree == 3);
  CHECK(rows[3].alpha == 0.25);
  const auto csv = table_csv(rows);
  CHECK(csv.starts_with("alpha,N,error_state,objective,converged\n"));
  // Each cell equals an independent single run.
  auto cfg = bundled("example_3x");
  cfg.apply_override("alpha=0.25");
  cfg.apply_override("solver.N=2");
  CHECK(run_config(cfg, "").l2_error_state == rows[4].error_state);

  const auto control = run_table(bundled("exam6"), std::vector<double>{0.5}, std::vector<int>{2, 3, 4});
  CHECK(table_csv(control).starts_with("alpha,N,error_state,error_control,objective,converged\n"));
  CHECK(control[2].error_state == doctest::Approx(8.4e-9).epsilon(0.05));
}

TEST_CASE("command line") {
  const auto dir = scratch("cli");
  const auto log = dir / "log.txt";
  const std::string problems = FRACRITZ_PROBLEMS;

  CHECK(run_cli("run " + problems + "/exam11.prob --out " + dir.string(), log) == 0);
  CHECK(fs::exists(dir / "exam11.result.json"));
  CHECK(fs::exists(dir / "exam11.solution.csv"));

  CHECK(run_cli("run " + std::string(FRACRITZ_TEST_DATA) + "/bad_operator.prob --out " +
                    dir.string(),
                log) == 1);
  CHECK(slurp(log).find("unknown operator 'caputo_up' at line 8") != std::string::npos);

  CHECK(run_cli("run " + problems + "/missing.prob", log) == 1);
  CHECK(run_cli("run " + problems + "/exam11.prob --set bogus=1 --out " + dir.string(), log) == 1);

  const std::string det = "run " + problems + "/example_3x.prob --no-timestamp --set solver.N=4 --out ";
  CHECK(run_cli(det + (dir / "a").string(), log) == 0);
  CHECK(run_cli(det + (dir / "b").string(), log) == 0);
  CHECK(slurp(dir / "a" / "example_3x.result.json") == slurp(dir / "b" / "example_3x.result.json"));
  CHECK(slurp(dir / "a" / "example_3x.solution.csv") == slurp(dir / "b" / "example_3x.solution.csv"));

  // The echoed config fed back as a file reproduces the results.
  CHECK(run_cli("run " + (dir / "a" / "example_3x.result.json").string() +
                    " --no-timestamp --out " + (dir / "c").string(),
                log) == 0);
  auto first = nlohmann::json::parse(slurp(dir / "a" / "example_3x.result.json"));
  auto second = nlohmann::json::parse(slurp(dir / "c" / "example_3x.result.json"));
  first.erase("problem_path");
  second.erase("problem_path");
  CHECK(first == second);

  CHECK(run_cli("table example_3_3 --alphas 0.5 --Ns 3 --set param.beta=2", log) == 0);
  std::istringstream table(slurp(log));
  std::string header, row;
  std::getline(table, header);
  std::getline(table, row);
  CHECK(header == "alpha,N,error_state,objective,converged");
  const double err = std::stod(row.substr(row.find(',', 4) + 1));
  CHECK(err <= 1e-14);

  CHECK(run_cli("table nope --alphas 0.5 --Ns 3", log) == 1);
  CHECK(run_cli("examples list", log) == 0);
  CHECK(slurp(log).find("exam6") != std::string::npos);
}
