#pragma once

/// @file config.hpp
/// @brief Run configuration: one JSON document, every field optional, all
/// violations reported together with their field paths.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vixsabr/io.hpp"
#include "vixsabr/mc.hpp"
#include "vixsabr/model.hpp"
#include "vixsabr/pricing.hpp"
#include "vixsabr/quadrature.hpp"

namespace vixsabr {

enum class OutputFormat { Csv, Json };

inline std::string_view to_string(OutputFormat f) noexcept { return f == OutputFormat::Csv ? "csv" : "json"; }
inline std::string_view to_string(Scheme s) noexcept { return s == Scheme::LogEuler ? "log_euler" : "level_euler"; }

struct RunConfig {
  SabrParams model{};
  double cap_a{2.0};
  double cap_b{1.0};
  McConfig mc{};
  QuadratureConfig quadrature{};
  std::vector<double> strikes = default_strike_grid();
  std::vector<double> maturities{0.1};
  double rate{0.0};
  std::string output_dir{"out"};
  OutputFormat format{OutputFormat::Csv};
  /// rho values swept by the table1 command
  std::vector<double> table1_rhos{-0.7, 0.0, 0.7};
  /// strike of the converge command
  double converge_strike{0.15};

  [[nodiscard]] CapSpec caps() const { return CapSpec::make(cap_a, cap_b, model); }
};

/// Aggregated validation failure; issues() holds one "field.path: message" per problem.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> issues)
      : std::runtime_error(join(issues)), issues_(std::move(issues)) {}
  [[nodiscard]] const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "invalid configuration:";
    for (const auto& i : v) s += "\n  " + i;
    return s;
  }
  std::vector<std::string> issues_;
};

namespace detail {

class ConfigReader {
 public:
  std::vector<std::string> issues;

  void fail(const std::string& path, const std::string& msg) { issues.push_back(path + ": " + msg); }

  // Flags keys of `obj` not listed in `known`.
  void check_keys(const nlohmann::json& obj, const std::string& path, std::initializer_list<std::string_view> known) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool ok = false;
      for (auto k : known) ok = ok || it.key() == k;
      if (!ok) fail(join(path, it.key()), "unknown field");
    }
  }

  void number(const nlohmann::json& obj, const std::string& path, std::string_view key, double& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(std::string(key));
    if (!v.is_number()) return fail(join(path, key), "expected a number");
    out = v.get<double>();
  }

  template <class UInt>
  void count(const nlohmann::json& obj, const std::string& path, std::string_view key, UInt& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(std::string(key));
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      return fail(join(path, key), "expected a non-negative integer");
    const auto u = v.get<std::uint64_t>();
    if (u > std::numeric_limits<UInt>::max()) return fail(join(path, key), "value out of range");
    out = static_cast<UInt>(u);
  }

  void list(const nlohmann::json& obj, const std::string& path, std::string_view key, std::vector<double>& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(std::string(key));
    if (!v.is_array()) return fail(join(path, key), "expected an array of numbers");
    std::vector<double> tmp;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) return fail(join(path, key) + "[" + std::to_string(i) + "]", "expected a number");
      tmp.push_back(v[i].get<double>());
    }
    out = std::move(tmp);
  }

  const nlohmann::json* section(const nlohmann::json& root, std::string_view key) {
    if (!root.contains(key)) return nullptr;
    const auto& v = root.at(std::string(key));
    if (!v.is_object()) {
      fail(std::string(key), "expected an object");
      return nullptr;
    }
    return &v;
  }

  static std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
  }
};

}  // namespace detail

/// Re-checks every module-level invariant; returns "field: message" strings.
inline std::vector<std::string> validation_issues(const RunConfig& c) {
  std::vector<std::string> out;
  auto bad = [&](const char* field, const std::string& msg) { out.push_back(std::string(field) + ": " + msg); };
  const auto& m = c.model;
  if (!(m.beta >= 0.0 && m.beta < 1.0)) bad("model.beta", "must lie in [0, 1)");
  if (!(m.rho > -1.0 && m.rho < 1.0)) bad("model.rho", "must lie in (-1, 1)");
  if (!(m.omega > 0.0 && std::isfinite(m.omega))) bad("model.omega", "must be positive");
  if (!(m.v0 > 0.0 && std::isfinite(m.v0))) bad("model.v0", "must be positive");
  if (!(c.cap_a > m.omega)) bad("caps.a", "must exceed model.omega");
  if (!(c.cap_b > 0.0)) bad("caps.b", "must be positive");
  if (c.mc.n_paths < 1) bad("mc.n_paths", "must be >= 1");
  if (c.mc.n_steps < 1) bad("mc.n_steps", "must be >= 1");
  if (!(c.mc.horizon > 0.0)) bad("mc.horizon", "must be positive");
  if (!(c.mc.vix_window >= 0.0)) bad("mc.vix_window", "must be >= 0");
  if (!(c.quadrature.abs_tol > 0.0)) bad("quadrature.abs_tol", "must be positive");
  if (!(c.quadrature.rel_tol > 0.0)) bad("quadrature.rel_tol", "must be positive");
  if (c.quadrature.max_subdivisions < 1) bad("quadrature.max_subdivisions", "must be >= 1");
  if (!(c.quadrature.large_x > 0.0)) bad("quadrature.large_x", "must be positive");
  if (c.strikes.empty()) bad("strikes", "must not be empty");
  for (std::size_t i = 0; i < c.strikes.size(); ++i)
    if (!(c.strikes[i] > 0.0)) out.push_back("strikes[" + std::to_string(i) + "]: must be positive");
  if (c.maturities.empty()) bad("maturities", "must not be empty");
  for (std::size_t i = 0; i < c.maturities.size(); ++i)
    if (!(c.maturities[i] > 0.0)) out.push_back("maturities[" + std::to_string(i) + "]: must be positive");
  if (!std::isfinite(c.rate)) bad("rate", "must be finite");
  if (c.output_dir.empty()) bad("output_dir", "must not be empty");
  for (std::size_t i = 0; i < c.table1_rhos.size(); ++i)
    if (!(c.table1_rhos[i] > -1.0 && c.table1_rhos[i] < 1.0))
      out.push_back("table1_rhos[" + std::to_string(i) + "]: must lie in (-1, 1)");
  if (!(c.converge_strike > 0.0)) bad("converge_strike", "must be positive");
  return out;
}

inline void validate(const RunConfig& c) {
  auto issues = validation_issues(c);
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

/// Parses a config document over the defaults. Throws ConfigError listing
/// every type and range problem found.
inline RunConfig config_from_json(const nlohmann::json& root) {
  detail::ConfigReader rd;
  RunConfig c;
  if (!root.is_object()) throw ConfigError({"<root>: expected a JSON object"});
  rd.check_keys(root, "", {"schema_version", "model", "caps", "mc", "quadrature", "strikes", "maturities", "rate",
                           "output_dir", "format", "table1_rhos", "converge_strike"});
  if (root.contains("schema_version") && root["schema_version"] != kSchemaVersion)
    rd.fail("schema_version", "unsupported version");

  if (const auto* s = rd.section(root, "model")) {
    rd.check_keys(*s, "model", {"beta", "rho", "omega", "v0"});
    rd.number(*s, "model", "beta", c.model.beta);
    rd.number(*s, "model", "rho", c.model.rho);
    rd.number(*s, "model", "omega", c.model.omega);
    rd.number(*s, "model", "v0", c.model.v0);
  }
  if (const auto* s = rd.section(root, "caps")) {
    rd.check_keys(*s, "caps", {"a", "b"});
    rd.number(*s, "caps", "a", c.cap_a);
    rd.number(*s, "caps", "b", c.cap_b);
  }
  if (const auto* s = rd.section(root, "mc")) {
    rd.check_keys(*s, "mc", {"n_paths", "n_steps", "horizon", "vix_window", "seed", "inner_paths", "inner_steps",
                             "threads", "scheme"});
    rd.count(*s, "mc", "n_paths", c.mc.n_paths);
    rd.count(*s, "mc", "n_steps", c.mc.n_steps);
    rd.number(*s, "mc", "horizon", c.mc.horizon);
    rd.number(*s, "mc", "vix_window", c.mc.vix_window);
    rd.count(*s, "mc", "seed", c.mc.seed);
    rd.count(*s, "mc", "inner_paths", c.mc.inner_paths);
    rd.count(*s, "mc", "inner_steps", c.mc.inner_steps);
    rd.count(*s, "mc", "threads", c.mc.threads);
    if (s->contains("scheme")) {
      const auto& v = (*s)["scheme"];
      if (v == "log_euler")
        c.mc.scheme = Scheme::LogEuler;
      else if (v == "level_euler")
        c.mc.scheme = Scheme::LevelEuler;
      else
        rd.fail("mc.scheme", "expected \"log_euler\" or \"level_euler\"");
    }
  }
  if (const auto* s = rd.section(root, "quadrature")) {
    rd.check_keys(*s, "quadrature", {"abs_tol", "rel_tol", "max_subdivisions", "large_x"});
    rd.number(*s, "quadrature", "abs_tol", c.quadrature.abs_tol);
    rd.number(*s, "quadrature", "rel_tol", c.quadrature.rel_tol);
    rd.count(*s, "quadrature", "max_subdivisions", c.quadrature.max_subdivisions);
    rd.number(*s, "quadrature", "large_x", c.quadrature.large_x);
  }
  rd.list(root, "", "strikes", c.strikes);
  rd.list(root, "", "maturities", c.maturities);
  rd.number(root, "", "rate", c.rate);
  if (root.contains("output_dir")) {
    if (root["output_dir"].is_string())
      c.output_dir = root["output_dir"].get<std::string>();
    else
      rd.fail("output_dir", "expected a string");
  }
  if (root.contains("format")) {
    const auto& v = root["format"];
    if (v == "csv")
      c.format = OutputFormat::Csv;
    else if (v == "json")
      c.format = OutputFormat::Json;
    else
      rd.fail("format", "expected \"csv\" or \"json\"");
  }
  rd.list(root, "", "table1_rhos", c.table1_rhos);
  rd.number(root, "", "converge_strike", c.converge_strike);

  // Range checks on every field that did not already fail to parse.
  auto issues = std::move(rd.issues);
  for (auto& r : validation_issues(c)) {
    const auto field = r.substr(0, r.find(':'));
    const bool seen = std::any_of(issues.begin(), issues.end(),
                                  [&](const std::string& i) { return i.rfind(field + ":", 0) == 0; });
    if (!seen) issues.push_back(std::move(r));
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return c;
}

inline nlohmann::json config_to_json(const RunConfig& c) {
  using nlohmann::json;
  return json{{"schema_version", kSchemaVersion},
              {"model", {{"beta", c.model.beta}, {"rho", c.model.rho}, {"omega", c.model.omega}, {"v0", c.model.v0}}},
              {"caps", {{"a", c.cap_a}, {"b", c.cap_b}}},
              {"mc",
               {{"n_paths", c.mc.n_paths},
                {"n_steps", c.mc.n_steps},
                {"horizon", c.mc.horizon},
                {"vix_window", c.mc.vix_window},
                {"seed", c.mc.seed},
                {"inner_paths", c.mc.inner_paths},
                {"inner_steps", c.mc.inner_steps},
                {"threads", c.mc.threads},
                {"scheme", std::string(to_string(c.mc.scheme))}}},
              {"quadrature",
               {{"abs_tol", c.quadrature.abs_tol},
                {"rel_tol", c.quadrature.rel_tol},
                {"max_subdivisions", c.quadrature.max_subdivisions},
                {"large_x", c.quadrature.large_x}}},
              {"strikes", c.strikes},
              {"maturities", c.maturities},
              {"rate", c.rate},
              {"output_dir", c.output_dir},
              {"format", std::string(to_string(c.format))},
              {"table1_rhos", c.table1_rhos},
              {"converge_strike", c.converge_strike}};
}

inline RunConfig parse_config(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError({std::string("<root>: malformed JSON: ") + e.what()});
  }
  return config_from_json(j);
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError({path.string() + ": cannot open file"});
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

inline std::string serialize_config(const RunConfig& c) { return config_to_json(c).dump(2) + "\n"; }

}  // namespace vixsabr
