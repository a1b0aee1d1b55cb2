// vixsabr: command-line front end.
//
//   vixsabr diagnose  [--config F]            explosion / martingale report (JSON)
//   vixsabr table1    [--config F] [...]      v_hat and F_V(T, a) for each rho
//   vixsabr smile     [--config F] [...]      MC smile with the asymptotic overlay
//   vixsabr converge  [--config F] [...]      -T log C against J_V(K)
//
// Exit codes: 0 success, 2 invalid configuration or usage, 3 numerical failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vixsabr/vixsabr.hpp"

namespace {

enum ExitCode : int { kOk = 0, kConfig = 2, kNumerical = 3 };

struct Overrides {
  std::string config_path;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;
  std::string dump_terminal;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config_path, "JSON run configuration (defaults apply when omitted)");
  sub->add_option("--threads", o.threads, "worker threads, 0 = all cores");
  sub->add_option("--seed", o.seed, "64-bit RNG seed");
  sub->add_option("--out", o.out_dir, "output directory");
  sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

vixsabr::RunConfig resolve(const Overrides& o) {
  vixsabr::RunConfig cfg = o.config_path.empty() ? vixsabr::RunConfig{} : vixsabr::load_config(o.config_path);
  if (o.threads) cfg.mc.threads = *o.threads;
  if (o.seed) cfg.mc.seed = *o.seed;
  if (o.out_dir) cfg.output_dir = *o.out_dir;
  if (o.format) cfg.format = *o.format == "json" ? vixsabr::OutputFormat::Json : vixsabr::OutputFormat::Csv;
  vixsabr::validate(cfg);
  return cfg;
}

std::filesystem::path emit(const vixsabr::RunConfig& cfg, const std::string& stem, const std::string& ext,
                           const std::string& content) {
  const auto path = std::filesystem::path(cfg.output_dir) / (stem + "." + ext);
  vixsabr::write_atomic(path, content);
  std::cerr << "wrote " << path.string() << "\n";
  return path;
}

std::string ext(const vixsabr::RunConfig& cfg) { return std::string(vixsabr::to_string(cfg.format)); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"VIX futures and options under SABR with a capped volatility process"};
  app.require_subcommand(1);

  Overrides o;
  auto* diagnose = app.add_subcommand("diagnose", "scale function, Feller explosion test and martingale check");
  auto* table1 = app.add_subcommand("table1", "switch level v_hat and VIX futures F_V(T, a) for each rho");
  auto* smile = app.add_subcommand("smile", "Monte Carlo VIX smile with the short-maturity asymptotic curve");
  auto* converge = app.add_subcommand("converge", "-T log C_V(K, T) against the rate function J_V(K)");
  for (auto* s : {diagnose, table1, smile, converge}) add_common(s, o);
  smile->add_option("--dump-terminal", o.dump_terminal, "also write the terminal v_T sample to this CSV file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    const auto cfg = resolve(o);
    if (diagnose->parsed()) {
      const auto r = vixsabr::run_diagnose(cfg);
      emit(cfg, "diagnose", "json", vixsabr::render_diagnose(r));
      std::cout << "explosion_flag=" << (r.scale.explosion_flag ? "true" : "false")
                << " boundary_upper=" << vixsabr::to_string(r.scale.boundary.upper)
                << " martingale=" << (r.martingale.verdict ? "true" : "false") << "\n";
    } else if (table1->parsed()) {
      const auto rows = vixsabr::run_table1(cfg);
      std::cout << vixsabr::render_table1(rows, vixsabr::OutputFormat::Csv);
      emit(cfg, "table1", ext(cfg), vixsabr::render_table1(rows, cfg.format));
    } else if (smile->parsed()) {
      const auto r = vixsabr::run_smile(cfg);
      emit(cfg, "smile", ext(cfg), vixsabr::render_smile(r, cfg.format));
      if (!o.dump_terminal.empty()) {
        vixsabr::write_atomic(o.dump_terminal, vixsabr::terminal_values_csv(r.terminal_values));
        std::cerr << "wrote " << o.dump_terminal << "\n";
      }
    } else if (converge->parsed()) {
      const auto rows = vixsabr::run_converge(cfg);
      std::cout << vixsabr::render_converge(rows, vixsabr::OutputFormat::Csv);
      emit(cfg, "converge", ext(cfg), vixsabr::render_converge(rows, cfg.format));
    }
  } catch (const vixsabr::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const vixsabr::AssumptionNotMet& e) {
    std::cerr << "notice: " << e.what() << "\n";
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
  return kOk;
}
