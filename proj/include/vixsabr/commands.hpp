#pragma once

/// @file commands.hpp
/// @brief The four experiments behind the command-line tool. Each run_* returns
/// plain data; each render_* turns it into the exact bytes written to disk.

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vixsabr/asymptotics.hpp"
#include "vixsabr/config.hpp"
#include "vixsabr/io.hpp"
#include "vixsabr/mc.hpp"
#include "vixsabr/pricing.hpp"
#include "vixsabr/scale.hpp"

namespace vixsabr {

/// Raised when the explosion analysis is requested outside rho < 0.
class AssumptionNotMet : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// ---------------------------------------------------------------------------
// diagnose
// ---------------------------------------------------------------------------

struct DiagnoseResult {
  SabrParams params;
  ScaleReport scale;
  MartingaleReport martingale;
};

inline DiagnoseResult run_diagnose(const RunConfig& cfg) {
  validate(cfg);
  if (!cfg.model.assumption_holds())
    throw AssumptionNotMet(
        "the explosion analysis (scale function, Feller test) is only set up for rho < 0 and 0 <= beta < 1; "
        "got rho = " + format_double(cfg.model.rho));
  DiagnoseResult r;
  r.params = cfg.model;
  r.scale = explosion_verdict(cfg.model, cfg.quadrature);
  r.martingale = martingale_diagnostic(cfg.model, cfg.quadrature);
  return r;
}

/// Always JSON: the report is nested.
inline std::string render_diagnose(const DiagnoseResult& r) {
  auto j = to_json(r.scale);
  j["command"] = "diagnose";
  j["model"] = {{"beta", r.params.beta}, {"rho", r.params.rho}, {"omega", r.params.omega}, {"v0", r.params.v0}};
  j["martingale"] = to_json(r.martingale);
  return dump_json(j);
}

// ---------------------------------------------------------------------------
// table1
// ---------------------------------------------------------------------------

struct Table1Row {
  double rho;
  double v_hat;
  McEstimate forward;
};

/// F_V(T, a) and v_hat for each rho in cfg.table1_rhos, T = cfg.mc.horizon.
inline std::vector<Table1Row> run_table1(const RunConfig& cfg) {
  validate(cfg);
  std::vector<Table1Row> rows;
  for (double rho : cfg.table1_rhos) {
    SabrParams p = cfg.model;
    p.rho = rho;
    const auto caps = CapSpec::make(cfg.cap_a, cfg.cap_b, p);
    McConfig m = cfg.mc;
    m.store_paths = false;
    const auto paths = simulate_capped_paths(p, caps, m);
    rows.push_back({rho, caps.v_hat, estimate_forward(paths)});
  }
  return rows;
}

inline std::string render_table1(const std::vector<Table1Row>& rows, OutputFormat fmt) {
  if (fmt == OutputFormat::Json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) arr.push_back({{"rho", r.rho}, {"v_hat", r.v_hat}, {"forward", to_json(r.forward)}});
    return dump_json({{"schema_version", kSchemaVersion}, {"command", "table1"}, {"rows", arr}});
  }
  CsvTable t({"rho", "v_hat", "forward", "forward_se"});
  for (const auto& r : rows) t.row() << r.rho << r.v_hat << r.forward.value << r.forward.std_error;
  return t.str();
}

// ---------------------------------------------------------------------------
// smile
// ---------------------------------------------------------------------------

struct SmileRun {
  double T;
  McEstimate forward;
  std::vector<SmilePoint> points;
  std::vector<double> asymptotic_iv;  ///< implied_vol_limit at each strike
  std::vector<double> terminal_values;
};

inline SmileRun run_smile(const RunConfig& cfg) {
  validate(cfg);
  if (cfg.maturities.size() != 1)
    throw ConfigError({"maturities: the smile command takes exactly one maturity, got " +
                       std::to_string(cfg.maturities.size())});
  const auto caps = cfg.caps();
  SmileRun r;
  r.T = cfg.maturities.front();
  McConfig m = cfg.mc;
  m.horizon = r.T;
  m.store_paths = false;
  const auto paths = simulate_capped_paths(cfg.model, caps, m);
  r.forward = estimate_forward(paths);
  r.points = smile_from_paths(paths, cfg.strikes, r.T, cfg.rate, r.forward.value, resolve_threads(cfg.mc.threads));
  for (double K : cfg.strikes) r.asymptotic_iv.push_back(implied_vol_limit(K, cfg.model, caps));
  r.terminal_values = paths.terminal_values;
  return r;
}

inline std::string render_smile(const SmileRun& r, OutputFormat fmt) {
  if (fmt == OutputFormat::Json) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < r.points.size(); ++i) {
      const auto& p = r.points[i];
      arr.push_back({{"strike", p.strike},
                     {"log_strike", p.log_strike},
                     {"kind", p.kind == OptionKind::Call ? "call" : "put"},
                     {"price", to_json(p.price)},
                     {"implied_vol", json_number(p.implied_vol)},
                     {"iv_lo", json_number(p.iv_lo)},
                     {"iv_hi", json_number(p.iv_hi)},
                     {"asymptotic_iv", r.asymptotic_iv[i]},
                     {"status", std::string(to_string(p.status))}});
    }
    return dump_json({{"schema_version", kSchemaVersion},
                      {"command", "smile"},
                      {"T", r.T},
                      {"forward", to_json(r.forward)},
                      {"points", arr}});
  }
  CsvTable t({"strike", "log_strike", "price", "price_se", "implied_vol", "iv_lo", "iv_hi", "asymptotic_iv",
              "status"});
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    const auto& p = r.points[i];
    t.row() << p.strike << p.log_strike << p.price.value << p.price.std_error << p.implied_vol << p.iv_lo << p.iv_hi
            << r.asymptotic_iv[i] << to_string(p.status);
  }
  return t.str();
}

// ---------------------------------------------------------------------------
// converge
// ---------------------------------------------------------------------------

inline std::vector<RateConvergenceRow> run_converge(const RunConfig& cfg) {
  validate(cfg);
  std::vector<std::string> issues;
  if (cfg.maturities.size() < 2)
    issues.push_back("maturities: the converge command needs at least two maturities");
  if (!std::is_sorted(cfg.maturities.rbegin(), cfg.maturities.rend()) ||
      std::adjacent_find(cfg.maturities.begin(), cfg.maturities.end()) != cfg.maturities.end())
    issues.push_back("maturities: must be strictly decreasing for the converge command");
  if (cfg.converge_strike == cfg.model.v0)
    issues.push_back("converge_strike: must differ from model.v0 (J_V(v0) = 0 is not a large-deviation regime)");
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return rate_convergence_study(cfg.converge_strike, cfg.model, cfg.caps(), cfg.maturities, cfg.mc, cfg.rate);
}

inline std::string render_converge(const std::vector<RateConvergenceRow>& rows, OutputFormat fmt) {
  auto status = [](const RateConvergenceRow& r) { return r.statistically_zero ? "statistically_zero" : "ok"; };
  if (fmt == OutputFormat::Json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows)
      arr.push_back({{"T", r.T},
                     {"K", r.strike},
                     {"price", to_json(r.price)},
                     {"neg_t_log_c", json_number(r.neg_t_log_price)},
                     {"jv", r.jv},
                     {"gap", json_number(r.gap)},
                     {"status", status(r)}});
    return dump_json({{"schema_version", kSchemaVersion}, {"command", "converge"}, {"rows", arr}});
  }
  CsvTable t({"T", "K", "price", "price_se", "neg_t_log_c", "jv", "gap", "status"});
  for (const auto& r : rows)
    t.row() << r.T << r.strike << r.price.value << r.price.std_error << r.neg_t_log_price << r.jv << r.gap
            << status(r);
  return t.str();
}

}  // namespace vixsabr
