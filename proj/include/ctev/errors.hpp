#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ctev {

// Error categories double as process exit codes in the CLI (see --help).
enum class errc : int {
  internal = 1,
  config = 2,
  empty_window = 3,
  parse = 4,
  invariant = 5,
  degenerate_sample = 6,
  io = 7,
  all_missing = 8,
  cholesky = 9,
  empty_side = 10,
  degenerate_series = 11,
  non_positive_response = 12,
};

class error : public std::runtime_error {
public:
  error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const noexcept { return code_; }
  int exit_code() const noexcept { return static_cast<int>(code_); }

private:
  errc code_;
};

// Invalid parameter combination detected before any computation.
struct config_error : error {
  explicit config_error(const std::string& w) : error(errc::config, w) {}
};

// No observation carries positive kernel weight at the conditioning point.
struct empty_window_error : error {
  explicit empty_window_error(double x0)
      : error(errc::empty_window,
              "empty window: no covariate with positive kernel weight at x0=" + std::to_string(x0)),
        x0(x0) {}
  double x0;
};

struct parse_error : error {
  parse_error(std::size_t line, std::size_t column, const std::string& reason)
      : error(errc::parse,
              "parse error at line " + std::to_string(line) + ", column " + std::to_string(column) +
                  ": " + reason),
        line(line),
        column(column) {}
  std::size_t line;
  std::size_t column;
};

// Data violates a documented invariant (e.g. non-positive response).
struct invariant_error : error {
  explicit invariant_error(const std::string& reason, std::size_t line = 0)
      : error(errc::invariant,
              line ? ("invariant violation at line " + std::to_string(line) + ": " + reason)
                   : ("invariant violation: " + reason)),
        line(line) {}
  std::size_t line;
};

struct degenerate_sample_error : error {
  explicit degenerate_sample_error(const std::string& w) : error(errc::degenerate_sample, w) {}
};

struct too_few_concomitants_error : error {
  explicit too_few_concomitants_error(std::size_t k)
      : error(errc::degenerate_sample,
              "concomitant bandwidth needs k >= 10, got k=" + std::to_string(k)) {}
};

struct io_error : error {
  explicit io_error(const std::string& w) : error(errc::io, w) {}
};

struct all_missing_error : error {
  explicit all_missing_error(const std::string& w) : error(errc::all_missing, w) {}
};

struct cholesky_error : error {
  explicit cholesky_error(const std::string& w) : error(errc::cholesky, w) {}
};

struct empty_side_error : error {
  explicit empty_side_error(const std::string& side)
      : error(errc::empty_side, "signed split: " + side + " side has fewer than 2 observations") {}
};

struct degenerate_series_error : error {
  explicit degenerate_series_error(const std::string& w) : error(errc::degenerate_series, w) {}
};

struct non_positive_response_error : error {
  explicit non_positive_response_error(const std::string& w)
      : error(errc::non_positive_response, w) {}
};

}  // namespace ctev
