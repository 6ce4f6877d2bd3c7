#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "mc.hpp"
#include "series.hpp"

namespace ctev {

// 17 significant digits: lossless round-trip for binary64.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return s.substr(b, e - b);
}

inline double parse_double(const std::string& field, std::size_t line, std::size_t column) {
  const std::string t = trim(field);
  if (t.empty()) throw parse_error(line, column, "empty field");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) throw parse_error(line, column, "not a number: '" + t + "'");
  return v;
}

}  // namespace detail

// Reads a CSV whose header names columns "x" and "y" (extra columns are
// ignored, order is free). Lines starting with '#' and blank lines are
// skipped; CRLF and LF endings are both accepted. Non-finite entries are
// rejected with their line number, and with require_positive_y so are
// non-positive responses.
inline std::pair<std::vector<double>, std::vector<double>> read_xy_csv(const std::string& path,
                                                                       bool require_positive_y) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open input file: " + path);

  std::vector<double> xs, ys;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  std::size_t ix = 0, iy = 0;

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') continue;
    const auto fields = detail::split_csv_line(line);
    if (!have_header) {
      bool found_x = false, found_y = false;
      for (std::size_t c = 0; c < fields.size(); ++c) {
        const std::string name = detail::trim(fields[c]);
        if (name == "x" && !found_x) {
          ix = c;
          found_x = true;
        } else if (name == "y" && !found_y) {
          iy = c;
          found_y = true;
        }
      }
      if (!found_x || !found_y)
        throw parse_error(lineno, 1, "header must name columns 'x' and 'y'");
      have_header = true;
      continue;
    }
    if (fields.size() <= std::max(ix, iy))
      throw parse_error(lineno, fields.size(), "row has too few fields");
    const double x = detail::parse_double(fields[ix], lineno, ix + 1);
    const double y = detail::parse_double(fields[iy], lineno, iy + 1);
    if (!std::isfinite(x)) throw invariant_error("non-finite covariate", lineno);
    if (!std::isfinite(y)) throw invariant_error("non-finite response", lineno);
    if (require_positive_y && !(y > 0.0))
      throw invariant_error("responses must be strictly positive", lineno);
    xs.push_back(x);
    ys.push_back(y);
  }
  if (!have_header) throw parse_error(1, 1, "missing header row");
  if (xs.empty()) throw invariant_error("input contains no data rows");
  return {std::move(xs), std::move(ys)};
}

inline PairedSeries ingest_csv(const std::string& path) {
  auto [xs, ys] = read_xy_csv(path, /*require_positive_y=*/true);
  return PairedSeries(std::move(xs), std::move(ys));
}

using ConfigHeader = std::vector<std::pair<std::string, std::string>>;

inline void write_config_header(std::ofstream& out, const ConfigHeader& config) {
  for (const auto& [key, value] : config) out << "# " << key << "=" << value << "\n";
}

inline constexpr const char* mc_csv_header = "k_frac,k,bias,mse,mean_se,coverage,n_missing";

// One row per k_frac; numbers at 17 significant digits so a re-parse
// reproduces the result exactly. A matplotlib sidecar script referencing only
// the CSV is emitted at <path>.plot.py.
inline void emit_mc_csv(const MCResult& result, const std::string& path,
                        const ConfigHeader& config = {}) {
  if (result.rows.empty()) throw config_error("emit_mc_csv: empty result");
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open output file: " + path);
    write_config_header(out, config);
    out << mc_csv_header << "\n";
    for (const auto& r : result.rows) {
      out << fmt17(r.k_frac) << ',' << r.k << ',' << fmt17(r.bias) << ',' << fmt17(r.mse) << ','
          << fmt17(r.mean_se) << ',' << fmt17(r.coverage) << ',' << r.n_missing << "\n";
    }
    if (!out) throw io_error("write failed: " + path);
  }

  std::string base = path;
  const auto slash = base.find_last_of('/');
  if (slash != std::string::npos) base = base.substr(slash + 1);
  std::ofstream plot(path + ".plot.py", std::ios::binary);
  if (!plot) throw io_error("cannot open output file: " + path + ".plot.py");
  plot << "#!/usr/bin/env python3\n"
          "import csv\n"
          "import matplotlib\n"
          "matplotlib.use(\"Agg\")\n"
          "import matplotlib.pyplot as plt\n"
          "\n"
          "rows = []\n"
          "with open(\""
       << base
       << "\") as f:\n"
          "    for line in f:\n"
          "        if line.startswith(\"#\"):\n"
          "            continue\n"
          "        rows.append(line)\n"
          "data = list(csv.DictReader(rows))\n"
          "kf = [float(r[\"k_frac\"]) for r in data]\n"
          "bias = [float(r[\"bias\"]) for r in data]\n"
          "mse = [float(r[\"mse\"]) for r in data]\n"
          "fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(6, 7))\n"
          "ax1.plot(kf, bias, marker=\"o\")\n"
          "ax1.axhline(0.0, color=\"grey\", lw=0.8)\n"
          "ax1.set_ylabel(\"bias\")\n"
          "ax2.plot(kf, mse, marker=\"o\")\n"
          "ax2.set_xlabel(\"k/n\")\n"
          "ax2.set_ylabel(\"MSE\")\n"
          "fig.tight_layout()\n"
          "fig.savefig(\""
       << base
       << ".png\", dpi=150)\n";
  if (!plot) throw io_error("write failed: " + path + ".plot.py");
}

// Re-parses a CSV produced by emit_mc_csv.
inline std::vector<MCRow> parse_mc_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open input file: " + path);
  std::vector<MCRow> rows;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!have_header) {
      if (line != mc_csv_header) throw parse_error(lineno, 1, "unexpected header");
      have_header = true;
      continue;
    }
    const auto f = detail::split_csv_line(line);
    if (f.size() != 7) throw parse_error(lineno, f.size(), "expected 7 fields");
    MCRow r;
    r.k_frac = detail::parse_double(f[0], lineno, 1);
    r.k = static_cast<std::size_t>(detail::parse_double(f[1], lineno, 2));
    r.bias = detail::parse_double(f[2], lineno, 3);
    r.mse = detail::parse_double(f[3], lineno, 4);
    r.mean_se = detail::parse_double(f[4], lineno, 5);
    r.coverage = detail::parse_double(f[5], lineno, 6);
    r.n_missing = static_cast<std::size_t>(detail::parse_double(f[6], lineno, 7));
    rows.push_back(r);
  }
  if (!have_header) throw parse_error(1, 1, "missing header row");
  return rows;
}

}  // namespace ctev
