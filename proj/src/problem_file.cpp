#include "fracritz/problem_file.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

namespace fracritz {

InputError::InputError(const std::string& msg, int line)
    : Error(line > 0   ? msg + " at line " + std::to_string(line)
            : line < 0 ? msg + " (in --set override)"
                       : msg),
      line_(line) {}

namespace {

constexpr int kOverrideLine = -1;

enum class ValueKind { Number, Integer, Expression, Word, NumberOrExpression };

struct KeySpec {
  std::string_view key;
  ValueKind kind;
};

constexpr std::array<KeySpec, 12> kProblemKeys = {{
    {"kind", ValueKind::Word},
    {"title", ValueKind::Expression},
    {"a", ValueKind::NumberOrExpression},
    {"b", ValueKind::NumberOrExpression},
    {"alpha", ValueKind::Number},
    {"operator", ValueKind::Word},
    {"sense", ValueKind::Word},
    {"lagrangian", ValueKind::Expression},
    {"cost", ValueKind::Expression},
    {"g", ValueKind::Expression},
    {"exact", ValueKind::Expression},
    {"exact_control", ValueKind::Expression},
}};

constexpr std::array<KeySpec, 11> kSolverKeys = {{
    {"N", ValueKind::Integer},
    {"N_min", ValueKind::Integer},
    {"N_max", ValueKind::Integer},
    {"eps", ValueKind::Number},
    {"grad_tol", ValueKind::Number},
    {"max_iterations", ValueKind::Integer},
    {"hessian", ValueKind::Word},
    {"quad.panels", ValueKind::Integer},
    {"quad.grading", ValueKind::Number},
    {"quad.nodes", ValueKind::Integer},
    {"samples", ValueKind::Integer},
}};

bool is_bc_key(std::string_view key) {
  static const std::regex pattern(R"(bc\.(a|b)\.[0-9]+)");
  return std::regex_match(key.begin(), key.end(), pattern);
}

std::optional<ValueKind> key_kind(const std::string& section, const std::string& key) {
  if (section == "problem") {
    if (is_bc_key(key)) return ValueKind::NumberOrExpression;
    if (key.starts_with("param.") && key.size() > 6) return ValueKind::Number;
    for (const auto& spec : kProblemKeys) {
      if (spec.key == key) return spec.kind;
    }
  } else if (section == "solver") {
    for (const auto& spec : kSolverKeys) {
      if (spec.key == key) return spec.kind;
    }
  }
  return std::nullopt;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::optional<double> parse_number(std::string_view text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last) return std::nullopt;
  return v;
}

bool is_word(std::string_view text) {
  if (text.empty()) return false;
  for (char c : text) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
  }
  return true;
}

ConfigValue classify(const std::string& raw, int line) {
  ConfigValue v;
  v.line = line;
  if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') {
    v.type = ConfigValue::Type::String;
    v.text = raw.substr(1, raw.size() - 2);
    if (v.text.find('"') != std::string::npos) {
      throw InputError("unexpected quote inside string value", line);
    }
  } else if (parse_number(raw)) {
    v.type = ConfigValue::Type::Number;
    v.text = raw;
  } else if (is_word(raw)) {
    v.type = ConfigValue::Type::Word;
    v.text = raw;
  } else {
    throw InputError("malformed value '" + raw + "'", line);
  }
  return v;
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace

ProblemConfig ProblemConfig::parse(std::string_view text) {
  ProblemConfig cfg;
  cfg.sections_["problem"];
  cfg.sections_["solver"];
  std::string current;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw InputError("malformed section header", line_no);
      current = trim(std::string_view(line).substr(1, line.size() - 2));
      if (current != "problem" && current != "solver") {
        throw InputError("unknown section [" + current + "]", line_no);
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError("expected 'key = value'", line_no);
    if (current.empty()) throw InputError("key outside of any section", line_no);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!key_kind(current, key)) {
      throw InputError("unknown key '" + key + "' in [" + current + "]", line_no);
    }
    if (cfg.find(current, key)) throw InputError("duplicate key '" + key + "'", line_no);
    cfg.set(current, key, classify(value, line_no));
  }
  return cfg;
}

ProblemConfig ProblemConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open problem file '" + path.string() + "'", 0);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (path.extension() == ".json") {
    nlohmann::ordered_json doc;
    try {
      doc = nlohmann::ordered_json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("invalid JSON: ") + e.what(), 0);
    }
    return from_json(doc);
  }
  return parse(buf.str());
}

ProblemConfig ProblemConfig::from_json(const nlohmann::ordered_json& doc) {
  const auto& root = doc.contains("config") ? doc.at("config") : doc;
  if (!root.is_object()) throw InputError("config must be a JSON object", 0);
  ProblemConfig cfg;
  for (const auto& [name, entries] : root.items()) {
    if (name != "problem" && name != "solver") {
      throw InputError("unknown section [" + name + "]", 0);
    }
    if (!entries.is_object()) throw InputError("section [" + name + "] must be an object", 0);
    for (const auto& [key, value] : entries.items()) {
      const auto kind = key_kind(name, key);
      if (!kind) throw InputError("unknown key '" + key + "' in [" + name + "]", 0);
      ConfigValue v;
      if (value.is_number()) {
        v.type = ConfigValue::Type::Number;
        v.text = value.dump();
      } else if (value.is_string()) {
        v.type = *kind == ValueKind::Word ? ConfigValue::Type::Word : ConfigValue::Type::String;
        v.text = value.get<std::string>();
      } else {
        throw InputError("type mismatch for key '" + key + "'", 0);
      }
      cfg.set(name, key, std::move(v));
    }
  }
  cfg.sections_.try_emplace("problem");
  cfg.sections_.try_emplace("solver");
  return cfg;
}

void ProblemConfig::set(const std::string& section, const std::string& key,
                        ConfigValue value) {
  auto& entries = sections_[section];
  for (auto& [k, v] : entries) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries.emplace_back(key, std::move(value));
}

void ProblemConfig::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw InputError("override '" + std::string(assignment) + "' is not key=value", kOverrideLine);
  }
  std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  std::string section = "problem";
  if (key.starts_with("solver.")) {
    section = "solver";
    key = key.substr(7);
  }
  const auto kind = key_kind(section, key);
  if (!kind) throw InputError("unknown key '" + std::string(assignment.substr(0, eq)) + "'",
                              kOverrideLine);
  ConfigValue v;
  if (*kind == ValueKind::Expression && !(value.size() >= 2 && value.front() == '"')) {
    // Shells strip quotes; take expression overrides verbatim.
    v.type = ConfigValue::Type::String;
    v.text = value;
  } else {
    v = classify(value, kOverrideLine);
  }
  v.line = kOverrideLine;
  set(section, key, std::move(v));
}

const ConfigValue* ProblemConfig::find(const std::string& section,
                                       const std::string& key) const {
  auto it = sections_.find(section);
  if (it == sections_.end()) return nullptr;
  for (const auto& [k, v] : it->second) {
    if (k == key) return &v;
  }
  return nullptr;
}

const ProblemConfig::Section& ProblemConfig::section(const std::string& name) const {
  static const Section empty;
  auto it = sections_.find(name);
  return it == sections_.end() ? empty : it->second;
}

std::string ProblemConfig::to_text() const {
  std::ostringstream out;
  for (const char* name : {"problem", "solver"}) {
    out << '[' << name << "]\n";
    for (const auto& [k, v] : section(name)) {
      out << k << " = ";
      if (v.type == ConfigValue::Type::String) {
        out << '"' << v.text << '"';
      } else {
        out << v.text;
      }
      out << '\n';
    }
  }
  return out.str();
}

nlohmann::ordered_json ProblemConfig::to_json() const {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const char* name : {"problem", "solver"}) {
    nlohmann::ordered_json sec = nlohmann::ordered_json::object();
    for (const auto& [k, v] : section(name)) {
      if (v.type == ConfigValue::Type::Number) {
        const double x = *parse_number(v.text);
        const bool integral = v.text.find_first_of(".eE") == std::string::npos &&
                              std::abs(x) < 9.0e15;
        if (integral) {
          sec[k] = static_cast<long long>(x);
        } else {
          sec[k] = x;
        }
      } else {
        sec[k] = v.text;
      }
    }
    out[name] = std::move(sec);
  }
  return out;
}

std::optional<FractionalOperator> parse_operator(std::string_view word, double alpha) {
  struct Entry {
    std::string_view name;
    OperatorKind kind;
    Side side;
  };
  static constexpr std::array<Entry, 6> table = {{
      {"rl_integral_left", OperatorKind::RLIntegral, Side::Left},
      {"rl_integral_right", OperatorKind::RLIntegral, Side::Right},
      {"rl_derivative_left", OperatorKind::RLDerivative, Side::Left},
      {"rl_derivative_right", OperatorKind::RLDerivative, Side::Right},
      {"caputo_left", OperatorKind::CaputoDerivative, Side::Left},
      {"caputo_right", OperatorKind::CaputoDerivative, Side::Right},
  }};
  for (const auto& e : table) {
    if (e.name == word) return FractionalOperator(e.kind, e.side, alpha);
  }
  return std::nullopt;
}

// --- schema validation ------------------------------------------------------------

namespace {

class SpecBuilder {
 public:
  explicit SpecBuilder(const ProblemConfig& cfg) : cfg_(cfg) {}

  RunSpec build() {
    check_types();
    RunSpec spec;
    const ConfigValue& kind = require("kind");
    if (kind.text == "variational") {
      spec.kind = ProblemKind::Variational;
    } else if (kind.text == "optimal_control") {
      spec.kind = ProblemKind::OptimalControl;
    } else {
      throw InputError("unknown kind '" + kind.text + "'", kind.line);
    }
    if (const auto* t = cfg_.find("problem", "title")) spec.title = t->text;

    const ConfigValue& alpha_v = require("alpha");
    alpha_ = number(alpha_v);
    if (!(alpha_ > 0.0)) throw InputError("alpha must be positive", alpha_v.line);
    params_["alpha"] = alpha_;
    for (const auto& [k, v] : cfg_.section("problem")) {
      if (k.starts_with("param.")) params_[k.substr(6)] = number(v);
    }

    const ConfigValue& op_v = require("operator");
    const auto op = parse_operator(op_v.text, alpha_);
    if (!op) throw InputError("unknown operator '" + op_v.text + "'", op_v.line);

    const ConfigValue& sense_v = require("sense");
    Sense sense = Sense::Minimize;
    if (sense_v.text == "maximize") {
      sense = Sense::Maximize;
    } else if (sense_v.text != "minimize") {
      throw InputError("unknown sense '" + sense_v.text + "'", sense_v.line);
    }

    const double a = constant(require("a"));
    const double b = constant(require("b"));
    if (!(a < b)) throw InputError("interval must satisfy a < b", require("b").line);

    BoundaryConditions bc = boundary_conditions(op->integer_order());

    if (spec.kind == ProblemKind::Variational) {
      forbid({"cost", "g", "exact_control"}, "variational");
      VariationalProblem& p = spec.problem;
      p.a = a;
      p.b = b;
      p.op = *op;
      p.lagrangian = expression(require("lagrangian"));
      p.bc = bc;
      if (const auto* e = cfg_.find("problem", "exact")) p.exact = expression(*e);
      p.sense = sense;
      guard(require("lagrangian").line, [&] { p.validate(); });
    } else {
      forbid({"lagrangian"}, "optimal_control");
      OptimalControlProblem ocp;
      ocp.a = a;
      ocp.b = b;
      ocp.op = *op;
      ocp.cost = expression(require("cost"));
      ocp.control = expression(require("g"));
      ocp.bc = bc;
      if (const auto* e = cfg_.find("problem", "exact")) ocp.exact_state = expression(*e);
      if (const auto* e = cfg_.find("problem", "exact_control")) {
        ocp.exact_control = expression(*e);
      }
      ocp.sense = sense;
      guard(require("cost").line, [&] { spec.problem = reduce_to_fvp(ocp); });
      spec.control = std::move(ocp);
    }
    solver(spec);
    return spec;
  }

 private:
  const ConfigValue& require(const std::string& key) {
    const auto* v = cfg_.find("problem", key);
    if (!v) throw InputError("missing required key '" + key + "' in [problem]", 0);
    return *v;
  }

  void forbid(std::initializer_list<const char*> keys, const std::string& kind) {
    for (const char* k : keys) {
      if (const auto* v = cfg_.find("problem", k)) {
        throw InputError(std::string("key '") + k + "' is not valid for kind " + kind,
                         v->line);
      }
    }
  }

  template <class F>
  void guard(int line, F&& f) {
    try {
      f();
    } catch (const InputError&) {
      throw;
    } catch (const Error& e) {
      throw InputError(e.what(), line);
    }
  }

  void check_types() {
    for (const char* name : {"problem", "solver"}) {
      for (const auto& [k, v] : cfg_.section(name)) {
        const ValueKind kind = *key_kind(name, k);
        const bool ok = [&] {
          switch (kind) {
            case ValueKind::Number:
            case ValueKind::Integer: return v.type == ConfigValue::Type::Number;
            case ValueKind::Expression: return v.type == ConfigValue::Type::String;
            case ValueKind::Word: return v.type == ConfigValue::Type::Word;
            case ValueKind::NumberOrExpression: return v.type != ConfigValue::Type::Word;
          }
          return false;
        }();
        if (!ok) throw InputError("type mismatch for key '" + k + "'", v.line);
        if (kind == ValueKind::Integer) {
          const double d = *parse_number(v.text);
          if (d != std::floor(d)) throw InputError("key '" + k + "' must be an integer", v.line);
        }
      }
    }
  }

  static double number(const ConfigValue& v) {
    const auto d = parse_number(v.text);
    if (!d) throw InputError("expected a number", v.line);
    return *d;
  }

  std::string substitute(const ConfigValue& v) const {
    static const std::regex placeholder(R"(\$([A-Za-z_][A-Za-z0-9_]*))");
    std::string out;
    auto begin = std::sregex_iterator(v.text.begin(), v.text.end(), placeholder);
    std::size_t last = 0;
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
      const auto& m = *it;
      out.append(v.text, last, static_cast<std::size_t>(m.position()) - last);
      const auto found = params_.find(m[1].str());
      if (found == params_.end()) {
        throw InputError("unknown parameter '$" + m[1].str() + "'", v.line);
      }
      out += '(' + format_double(found->second) + ')';
      last = static_cast<std::size_t>(m.position() + m.length());
    }
    out.append(v.text, last, std::string::npos);
    return out;
  }

  Expr expression(const ConfigValue& v) const {
    const std::string text = substitute(v);
    try {
      return Expr::parse(text);
    } catch (const SyntaxError& e) {
      throw InputError(std::string("in expression \"") + text + "\": " + e.what(), v.line);
    }
  }

  double constant(const ConfigValue& v) const {
    if (v.type == ConfigValue::Type::Number) return number(v);
    const Expr e = expression(v);
    for (Symbol s : {Symbol::X, Symbol::Y, Symbol::Yp, Symbol::D, Symbol::U}) {
      if (e.references(s)) throw InputError("constant expression references a variable", v.line);
    }
    try {
      return e.evaluate({});
    } catch (const Error& err) {
      throw InputError(err.what(), v.line);
    }
  }

  BoundaryConditions boundary_conditions(int n) {
    BoundaryConditions bc;
    bc.at_a.assign(n, 0.0);
    bc.at_b.assign(n, 0.0);
    std::vector<bool> seen_a(n, false);
    std::vector<bool> seen_b(n, false);
    for (const auto& [k, v] : cfg_.section("problem")) {
      if (!is_bc_key(k)) continue;
      const bool at_a = k[3] == 'a';
      const int order = std::stoi(k.substr(5));
      if (order >= n) {
        throw InputError("boundary condition of order " + std::to_string(order) +
                             " exceeds ceil(alpha) - 1 = " + std::to_string(n - 1),
                         v.line);
      }
      (at_a ? bc.at_a : bc.at_b)[order] = constant(v);
      (at_a ? seen_a : seen_b)[order] = true;
    }
    for (int k = 0; k < n; ++k) {
      if (!seen_a[k]) throw InputError("missing boundary condition bc.a." + std::to_string(k), 0);
      if (!seen_b[k]) throw InputError("missing boundary condition bc.b." + std::to_string(k), 0);
    }
    return bc;
  }

  void solver(RunSpec& spec) {
    SolverOptions& o = spec.options;
    auto integer = [&](const char* key, int& out) {
      if (const auto* v = cfg_.find("solver", key)) out = static_cast<int>(number(*v));
    };
    auto real = [&](const char* key, double& out) {
      if (const auto* v = cfg_.find("solver", key)) out = number(*v);
    };
    if (const auto* v = cfg_.find("solver", "N")) {
      spec.fixed_degree = static_cast<int>(number(*v));
      const int n = spec.problem.op.integer_order();
      if (*spec.fixed_degree < 2 * n) {
        throw InputError("solver.N must be at least 2 ceil(alpha) = " + std::to_string(2 * n),
                         v->line);
      }
    }
    integer("N_min", o.n_min);
    integer("N_max", o.n_max);
    real("eps", o.eps);
    real("grad_tol", o.grad_tol);
    integer("max_iterations", o.max_iterations);
    integer("quad.panels", o.quadrature.panels);
    real("quad.grading", o.quadrature.grading);
    integer("quad.nodes", o.quadrature.nodes);
    integer("samples", spec.samples);
    if (const auto* v = cfg_.find("solver", "hessian")) {
      if (v->text == "analytic") {
        o.hessian = HessianMode::Analytic;
      } else if (v->text == "finite_difference") {
        o.hessian = HessianMode::FiniteDifference;
      } else {
        throw InputError("unknown hessian mode '" + v->text + "'", v->line);
      }
    }
    auto check = [&](bool ok, const char* key, const char* what) {
      if (ok) return;
      const auto* v = cfg_.find("solver", key);
      throw InputError(std::string("solver.") + key + " " + what, v ? v->line : 0);
    };
    check(o.quadrature.panels >= 1, "quad.panels", "must be positive");
    check(o.quadrature.grading >= 1.0, "quad.grading", "must be >= 1");
    check(o.quadrature.nodes >= 1 && o.quadrature.nodes <= 256, "quad.nodes",
          "must be in [1, 256]");
    check(spec.samples >= 1, "samples", "must be positive");
    check(o.grad_tol > 0.0, "grad_tol", "must be positive");
    check(o.eps > 0.0, "eps", "must be positive");
    check(o.max_iterations >= 1, "max_iterations", "must be positive");
    check(o.n_max >= o.n_min, "N_max", "must be >= N_min");
    check(o.n_min >= 2 * spec.problem.op.integer_order(), "N_min",
          "must be at least 2 ceil(alpha)");
  }

  const ProblemConfig& cfg_;
  double alpha_ = 0.0;
  std::map<std::string, double> params_;
};

}  // namespace

RunSpec build_run_spec(const ProblemConfig& config) { return SpecBuilder(config).build(); }

}  // namespace fracritz
