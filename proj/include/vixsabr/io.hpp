#pragma once

/// @file io.hpp
/// @brief CSV/JSON output. CSV cells use 17 significant digits and '.' as the
/// decimal separator; every JSON document carries schema_version = 1.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "vixsabr/mc.hpp"
#include "vixsabr/scale.hpp"

namespace vixsabr {

inline constexpr int kSchemaVersion = 1;

/// Shortest-safe round-trip text for a double (locale independent).
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

/// In-memory CSV table: header row plus rows of preformatted cells.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  class Row {
   public:
    Row& operator<<(double x) {
      cells_.push_back(format_double(x));
      return *this;
    }
    Row& operator<<(std::string_view s) {
      cells_.emplace_back(s);
      return *this;
    }
    Row& operator<<(const char* s) { return *this << std::string_view(s); }
    Row& operator<<(std::size_t n) {
      cells_.push_back(std::to_string(n));
      return *this;
    }

   private:
    friend class CsvTable;
    std::vector<std::string> cells_;
  };

  Row& row() { return rows_.emplace_back(); }

  [[nodiscard]] std::size_t size() const noexcept { return rows_.size(); }

  [[nodiscard]] std::string str() const {
    std::string out;
    append_line(out, header_);
    for (const auto& r : rows_) {
      if (r.cells_.size() != header_.size()) throw std::logic_error("CsvTable: row width differs from header");
      append_line(out, r.cells_);
    }
    return out;
  }

 private:
  static void append_line(std::string& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  }

  std::vector<std::string> header_;
  std::vector<Row> rows_;
};

/// Writes `content` to a sibling temp file, then renames it over `path`.
inline void write_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.flush();
    if (!f) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

/// One value per line, 17 significant digits.
inline std::string terminal_values_csv(std::span<const double> values) {
  std::string out = "v_T\n";
  for (double v : values) {
    out += format_double(v);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------


/// NaN and infinities map to null.
inline nlohmann::json json_number(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

inline nlohmann::json to_json(const McEstimate& e) {
  return nlohmann::json{{"value", json_number(e.value)},
              {"std_error", json_number(e.std_error)},
              {"n_effective", e.n_effective}};
}

inline nlohmann::json to_json(const PathSet& ps) {
  nlohmann::json j{{"schema_version", kSchemaVersion},
         {"n_paths", ps.n_paths},
         {"n_steps", ps.n_steps},
         {"horizon", ps.horizon},
         {"terminal_values", ps.terminal_values}};
  if (!ps.paths.empty()) j["paths"] = ps.paths;
  return j;
}

inline nlohmann::json to_json(const PInfinityFit& f) {
  return nlohmann::json{{"p_infinity", f.p_infinity},
              {"c1", f.c1},
              {"c1_regression", json_number(f.c1_regression)},
              {"c1_tail", f.c1_tail},
              {"c1_from_regression", f.c1_from_regression},
              {"max_rel_residual", f.max_rel_residual},
              {"stabilized", f.stabilized},
              {"grid_x", f.grid_x},
              {"grid_p", f.grid_p}};
}

inline nlohmann::json to_json(const MartingaleReport& m) {
  return nlohmann::json{{"verdict", m.verdict},
              {"upper_diverges", m.upper_diverges},
              {"lower_diverges", m.lower_diverges},
              {"upper_samples", m.upper_samples},
              {"lower_samples", m.lower_samples}};
}

inline nlohmann::json to_json(const ScaleReport& r) {
  return nlohmann::json{{"schema_version", kSchemaVersion},
              {"p_infinity", r.p_infinity},
              {"c1_fit", r.c1_fit},
              {"kappa", r.kappa},
              {"nu_at_large_x", json_number(r.nu_at_large_x)},
              {"nu_stabilized", r.nu_stabilized},
              {"nu_samples", r.nu_samples},
              {"feller_c", r.feller_c},
              {"nu_zero_divergent", r.nu_zero_divergent},
              {"nu_zero_decade_increment", r.nu_zero_decade_increment},
              {"explosion_flag", r.explosion_flag},
              {"boundary", {{"lower", std::string(to_string(r.boundary.lower))},
                            {"upper", std::string(to_string(r.boundary.upper))}}},
              {"p_fit", to_json(r.p_fit)}};
}

/// Two-space indented dump with a trailing newline.
inline std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace vixsabr
