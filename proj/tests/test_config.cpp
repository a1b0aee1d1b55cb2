#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vixsabr/commands.hpp"
#include "vixsabr/config.hpp"
#include "vixsabr/io.hpp"

using namespace vixsabr;

namespace fs = std::filesystem;

TEST(Config, DefaultsMatchBaseCase) {
  const RunConfig c;
  EXPECT_EQ(c.model.beta, 0.5);
  EXPECT_EQ(c.model.rho, -0.7);
  EXPECT_EQ(c.model.omega, 1.0);
  EXPECT_EQ(c.model.v0, 0.1);
  EXPECT_EQ(c.cap_a, 2.0);
  EXPECT_EQ(c.cap_b, 1.0);
  EXPECT_EQ(c.mc.n_paths, 100000u);
  EXPECT_EQ(c.mc.n_steps, 100u);
  EXPECT_EQ(c.mc.seed, 42u);
  EXPECT_EQ(c.rate, 0.0);
  EXPECT_NO_THROW(validate(c));
}

TEST(Config, EmptyDocumentGivesDefaults) {
  const auto c = parse_config("{}");
  EXPECT_EQ(serialize_config(c), serialize_config(RunConfig{}));
}

TEST(Config, RoundTripIsIdentity) {
  RunConfig c;
  c.model = {0.3, -0.45, 1.7, 0.123456789012345};
  c.cap_a = 3.25;
  c.cap_b = 0.1 + 0.2;
  c.mc.seed = 18446744073709551557ULL;
  c.mc.scheme = Scheme::LevelEuler;
  c.mc.inner_paths = 77;
  c.strikes = {0.01, 1.0 / 3.0, 0.7};
  c.maturities = {0.2, 0.1};
  c.format = OutputFormat::Json;
  c.output_dir = "some/dir";
  const auto text = serialize_config(c);
  const auto back = parse_config(text);
  EXPECT_EQ(serialize_config(back), text);
  EXPECT_EQ(back.model.v0, c.model.v0);
  EXPECT_EQ(back.cap_b, c.cap_b);
  EXPECT_EQ(back.mc.seed, c.mc.seed);
  EXPECT_EQ(back.strikes, c.strikes);
  // and once more through load -> serialize -> load
  EXPECT_EQ(serialize_config(parse_config(serialize_config(back))), text);
}

TEST(Config, AggregatesAllIssuesWithFieldPaths) {
  const char* doc = R"({
    "model": {"beta": 1.5, "rho": "x", "omega": 1.0, "v0": -1},
    "caps": {"a": 0.5},
    "mc": {"n_paths": 0, "seed": -3, "scheme": "rk4"},
    "strikes": [0.1, -0.2],
    "format": "xml",
    "typo": 1
  })";
  try {
    parse_config(doc);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (const char* field : {"model.beta", "model.rho", "model.v0", "caps.a", "mc.n_paths", "mc.seed", "mc.scheme",
                              "strikes[1]", "format", "typo"})
      EXPECT_NE(msg.find(field), std::string::npos) << field << " missing from:\n" << msg;
    EXPECT_GE(e.issues().size(), 10u);
  }
}

TEST(Config, MalformedJson) { EXPECT_THROW(parse_config("{ not json"), ConfigError); }

TEST(Config, LoadFromFile) {
  const auto dir = fs::temp_directory_path() / "vixsabr_cfg_test";
  fs::create_directories(dir);
  const auto path = dir / "c.json";
  std::ofstream(path) << R"({"model": {"rho": 0.25}, "maturities": [0.05]})";
  const auto c = load_config(path);
  EXPECT_EQ(c.model.rho, 0.25);
  EXPECT_EQ(c.maturities, std::vector<double>{0.05});
  EXPECT_THROW(load_config(dir / "missing.json"), ConfigError);
}

TEST(Csv, FormatAndHeader) {
  CsvTable t({"a", "b", "c"});
  t.row() << 0.1 << "x" << std::size_t{3};
  t.row() << 1e-20 << "y" << std::size_t{0};
  EXPECT_EQ(t.str(), "a,b,c\n0.10000000000000001,x,3\n9.9999999999999995e-21,y,0\n");
  CsvTable empty({"only"});
  EXPECT_EQ(empty.str(), "only\n");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  // 17 significant digits round-trip exactly
  for (double x : {1.0 / 3.0, 2.336308338453881, 1e300, -2.2250738585072014e-308}) EXPECT_EQ(std::stod(format_double(x)), x);
}

TEST(Io, AtomicWriteReplaces) {
  const auto dir = fs::temp_directory_path() / "vixsabr_io_test";
  fs::remove_all(dir);
  const auto path = dir / "nested" / "out.csv";
  write_atomic(path, "first\n");
  write_atomic(path, "second\n");
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  EXPECT_EQ(ss.str(), "second\n");
  EXPECT_FALSE(fs::exists(path.string() + ".tmp"));
}

TEST(Io, TerminalDump) {
  const std::vector<double> v{0.1, 0.25};
  EXPECT_EQ(terminal_values_csv(v), "v_T\n0.10000000000000001\n0.25\n");
}

TEST(Io, JsonSchemaVersion) {
  PathSet ps;
  ps.terminal_values = {0.1, 0.2};
  ps.n_paths = 2;
  ps.n_steps = 1;
  ps.horizon = 0.1;
  const auto j = to_json(ps);
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["terminal_values"].size(), 2u);
  McEstimate e{0.5, std::nan(""), 3};
  EXPECT_TRUE(to_json(e)["std_error"].is_null());
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

namespace {
RunConfig quick_config() {
  RunConfig c;
  c.mc.n_paths = 4000;
  c.mc.n_steps = 20;
  return c;
}
}  // namespace

TEST(Commands, Table1SwitchLevelsAndThreadInvariance) {
  auto c = quick_config();
  c.mc.threads = 1;
  const auto rows = run_table1(c);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_NEAR(rows[0].v_hat, 2.336, 5e-4);
  EXPECT_NEAR(rows[1].v_hat, 3.464, 5e-4);
  EXPECT_NEAR(rows[2].v_hat, 5.136, 5e-4);
  const auto a = render_table1(rows, OutputFormat::Csv);
  c.mc.threads = 3;
  EXPECT_EQ(render_table1(run_table1(c), OutputFormat::Csv), a);
  EXPECT_EQ(a.substr(0, a.find('\n')), "rho,v_hat,forward,forward_se");
  const auto j = nlohmann::json::parse(render_table1(rows, OutputFormat::Json));
  EXPECT_EQ(j["schema_version"], 1);
}

TEST(Commands, SeedChangeMovesForwardWithinNoise) {
  auto c = quick_config();
  c.mc.n_paths = 20000;
  const auto a = run_table1(c);
  c.mc.seed = 7;
  const auto b = run_table1(c);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NE(a[i].forward.value, b[i].forward.value);
    EXPECT_LE(std::abs(a[i].forward.value - b[i].forward.value),
              4 * std::hypot(a[i].forward.std_error, b[i].forward.std_error));
  }
}

TEST(Commands, DiagnoseGateAndReport) {
  auto c = quick_config();
  const auto r = run_diagnose(c);
  EXPECT_TRUE(r.scale.explosion_flag);
  EXPECT_EQ(r.scale.boundary.upper, BoundaryClass::Exit);
  EXPECT_TRUE(r.martingale.verdict);
  const auto j = nlohmann::json::parse(render_diagnose(r));
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["boundary"]["upper"], "Exit");
  c.model.rho = 0.0;
  EXPECT_THROW(run_diagnose(c), AssumptionNotMet);
  c.model = {0.3, -0.5, 1.0, 0.1};
  EXPECT_EQ(run_diagnose(c).scale.boundary.upper, BoundaryClass::Regular);
}

TEST(Commands, SmileRequiresOneMaturity) {
  auto c = quick_config();
  c.maturities = {0.1, 0.05};
  EXPECT_THROW(run_smile(c), ConfigError);
  c.maturities = {0.1};
  const auto r = run_smile(c);
  EXPECT_EQ(r.points.size(), c.strikes.size());
  const auto csv = render_smile(r, OutputFormat::Csv);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "strike,log_strike,price,price_se,implied_vol,iv_lo,iv_hi,asymptotic_iv,status");
  // asymptotic overlay is increasing and convex in log-strike on the default grid
  for (std::size_t i = 1; i + 1 < r.asymptotic_iv.size(); ++i) {
    EXPECT_GT(r.asymptotic_iv[i + 1], r.asymptotic_iv[i]);
    EXPECT_GT(r.asymptotic_iv[i + 1] - 2 * r.asymptotic_iv[i] + r.asymptotic_iv[i - 1], 0.0);
  }
}

TEST(Commands, ConvergePreconditions) {
  auto c = quick_config();
  EXPECT_THROW(run_converge(c), ConfigError);  // one maturity
  c.maturities = {0.1, 0.2};
  EXPECT_THROW(run_converge(c), ConfigError);
  c.maturities = {0.2, 0.1};
  c.converge_strike = c.model.v0;
  EXPECT_THROW(run_converge(c), ConfigError);
  c.converge_strike = 0.15;
  const auto rows = run_converge(c);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) EXPECT_EQ(r.jv, rate_function_jv(0.15, c.model, c.caps()));
}
