#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fracritz/errors.hpp"
#include "fracritz/optimal_control.hpp"
#include "fracritz/ritz.hpp"

namespace fracritz {

/// Malformed or invalid problem input. `line` is -1 for --set overrides and
/// 0 when no single line is to blame.
class InputError : public Error {
 public:
  InputError(const std::string& msg, int line);
  int line() const noexcept { return line_; }

 private:
  int line_;
};

struct ConfigValue {
  enum class Type { Number, String, Word };
  Type type = Type::Word;
  std::string text;  // unquoted source text
  int line = 0;
};

/// Sectioned `key = value` document:
///
///   # comment
///   [problem]
///   kind = variational
///   alpha = 0.5
///   lagrangian = "D - yp^2"
///   [solver]
///   quad.panels = 32
///
/// Keys keep their file order; overrides replace values in place or append.
class ProblemConfig {
 public:
  static ProblemConfig parse(std::string_view text);
  /// Reads a problem file, or a `.json` holding an echoed config (either a
  /// bare {problem, solver} object or a result.json with a `config` field).
  static ProblemConfig load(const std::filesystem::path& path);
  static ProblemConfig from_json(const nlohmann::ordered_json& doc);

  /// Applies `key=value`; keys starting with `solver.` address the [solver]
  /// section, anything else the [problem] section.
  void apply_override(std::string_view assignment);
  void set(const std::string& section, const std::string& key, ConfigValue value);

  const ConfigValue* find(const std::string& section, const std::string& key) const;

  /// Canonical file text; parsing it yields an equivalent config.
  std::string to_text() const;
  nlohmann::ordered_json to_json() const;

  using Section = std::vector<std::pair<std::string, ConfigValue>>;
  const Section& section(const std::string& name) const;

 private:
  std::map<std::string, Section> sections_;
};

enum class ProblemKind { Variational, OptimalControl };

/// A validated problem plus solver settings.
struct RunSpec {
  ProblemKind kind = ProblemKind::Variational;
  std::string title;
  VariationalProblem problem;           // reduced problem for optimal control
  std::optional<OptimalControlProblem> control;
  std::optional<int> fixed_degree;
  SolverOptions options;
  int samples = 101;
};

/// Checks the schema, substitutes `$name` parameters (`$alpha` plus every
/// `param.name` key) into expression strings, and builds the problem.
RunSpec build_run_spec(const ProblemConfig& config);

/// Operator keyword such as `caputo_left`; nullopt when unknown.
std::optional<FractionalOperator> parse_operator(std::string_view word, double alpha);

}  // namespace fracritz
