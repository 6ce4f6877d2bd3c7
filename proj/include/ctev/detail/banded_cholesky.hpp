#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "../errors.hpp"

namespace ctev::detail {

// Lower Cholesky factor of a symmetric positive-definite banded Toeplitz
// matrix A(i,j) = cov[|i-j|] (cov has bandwidth+1 entries; entries beyond the
// band are treated as zero). The factor is banded with the same bandwidth and
// is stored row-major as L[i*(bw+1)+d] = L(i, i-d), d = 0..bw. Cost O(n bw^2).
class BandedCholesky {
public:
  BandedCholesky(std::size_t n, std::span<const double> cov) : n_(n), bw_(cov.size() - 1) {
    l_.assign(n_ * (bw_ + 1), 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t dmax = std::min(i, bw_);
      for (std::size_t d = dmax + 1; d-- > 0;) {  // j = i-d, left to diagonal
        const std::size_t j = i - d;
        double s = cov[d];
        const std::size_t kmin = (i > bw_) ? i - bw_ : 0;
        for (std::size_t k = kmin; k < j; ++k) s -= at(i, i - k) * at(j, j - k);
        if (j < i) {
          l_[i * (bw_ + 1) + d] = s / at(j, 0);
        } else {
          if (!(s > 0.0) || !std::isfinite(s))
            throw cholesky_error("banded Cholesky: matrix is not positive definite");
          l_[i * (bw_ + 1)] = std::sqrt(s);
        }
      }
    }
  }

  std::size_t size() const { return n_; }
  std::size_t bandwidth() const { return bw_; }

  // out = L * z
  void apply(std::span<const double> z, std::span<double> out) const {
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t dmax = std::min(i, bw_);
      double s = 0.0;
      for (std::size_t d = 0; d <= dmax; ++d) s += l_[i * (bw_ + 1) + d] * z[i - d];
      out[i] = s;
    }
  }

  double at(std::size_t i, std::size_t d) const { return l_[i * (bw_ + 1) + d]; }

private:
  std::size_t n_;
  std::size_t bw_;
  std::vector<double> l_;
};

}  // namespace ctev::detail
