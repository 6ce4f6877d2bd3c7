#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace ctev {

// Aligned covariate/response sample. Responses are strictly positive so that
// log(Y/q) is always defined; non-finite entries are rejected at construction
// rather than silently dropped.
class PairedSeries {
public:
  PairedSeries(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() != y_.size())
      throw invariant_error("covariate and response vectors have different lengths");
    if (x_.empty()) throw invariant_error("series must contain at least one observation");
    for (std::size_t i = 0; i < x_.size(); ++i) {
      if (!std::isfinite(x_[i])) throw invariant_error("non-finite covariate", i + 1);
      if (!std::isfinite(y_[i]) || !(y_[i] > 0.0))
        throw invariant_error("responses must be finite and strictly positive", i + 1);
    }
  }

  std::size_t n() const { return x_.size(); }
  std::span<const double> x() const { return x_; }
  std::span<const double> y() const { return y_; }

private:
  std::vector<double> x_;
  std::vector<double> y_;
};

}  // namespace ctev
