#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "detail/mathutil.hpp"
#include "errors.hpp"
#include "series.hpp"

namespace ctev {

// Rank transform rank(X_j)/(n+1), average ranks for ties. Output lies
// strictly inside (0,1) and depends only on the ordering of the input.
inline std::vector<double> rank_to_uniform(std::span<const double> x) {
  if (x.empty()) throw config_error("rank_to_uniform: empty input");
  auto r = detail::ranks_average(x);
  const double denom = static_cast<double>(x.size()) + 1.0;
  for (double& v : r) v /= denom;
  return r;
}

// Split a covariate/log-return series by the sign of the returns. The first
// series keeps the positive returns, the second the sign-flipped negative
// ones; zero returns are dropped from both. Each side needs at least 2
// observations.
inline std::pair<PairedSeries, PairedSeries> split_signed(std::span<const double> x,
                                                          std::span<const double> r) {
  if (x.size() != r.size()) throw config_error("split_signed: input lengths differ");
  std::vector<double> px, py, nx, ny;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!std::isfinite(r[j])) throw invariant_error("non-finite return", j + 1);
    if (r[j] > 0.0) {
      px.push_back(x[j]);
      py.push_back(r[j]);
    } else if (r[j] < 0.0) {
      nx.push_back(x[j]);
      ny.push_back(-r[j]);
    }
  }
  if (px.size() < 2) throw empty_side_error("positive");
  if (nx.size() < 2) throw empty_side_error("negative");
  return {PairedSeries(std::move(px), std::move(py)), PairedSeries(std::move(nx), std::move(ny))};
}

struct QQData {
  std::vector<double> theoretical;  // exponential quantiles -log(1 - i/(m+1))
  std::vector<double> empirical;    // log-exceedances over the threshold order statistic
  double slope_hint = 0.0;          // least-squares slope through the origin
};

// Pareto QQ data from the top m responses: empirical log-exceedances of the
// ascending order statistics over Y_(n-m) against exponential quantiles.
// The theoretical side depends only on m.
inline QQData pareto_qq(std::span<const double> y, std::size_t m) {
  const std::size_t n = y.size();
  if (m < 2 || m + 1 > n) throw config_error("pareto_qq: need 2 <= m <= n-1");
  std::vector<double> sorted(y.begin(), y.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = n - m - 1; i < n; ++i)
    if (!(sorted[i] > 0.0))
      throw non_positive_response_error("pareto_qq: the used order statistics must be positive");

  QQData out;
  out.theoretical.resize(m);
  out.empirical.resize(m);
  const double log_thr = std::log(sorted[n - m - 1]);
  double st2 = 0.0, ste = 0.0;
  for (std::size_t i = 1; i <= m; ++i) {
    const double th = -std::log(1.0 - static_cast<double>(i) / (static_cast<double>(m) + 1.0));
    const double em = std::log(sorted[n - m - 1 + i]) - log_thr;
    out.theoretical[i - 1] = th;
    out.empirical[i - 1] = em;
    st2 += th * th;
    ste += th * em;
  }
  out.slope_hint = ste / st2;
  return out;
}

// Sample ACF with the biased (1/n) autocovariance denominator — the standard
// convention keeping the sequence positive semi-definite — and PACF by
// Durbin–Levinson on the ACF. Both vectors run over lags 0..max_lag with
// acf[0] = pacf[0] = 1.
inline std::pair<std::vector<double>, std::vector<double>> acf_pacf(std::span<const double> z,
                                                                    std::size_t max_lag) {
  const std::size_t n = z.size();
  if (n < 2 || 2 * max_lag >= n) throw config_error("acf_pacf: need max_lag < n/2");
  const double m = detail::mean(z);
  double c0 = 0.0;
  for (double v : z) c0 += (v - m) * (v - m);
  c0 /= static_cast<double>(n);
  if (!(c0 > 0.0)) throw degenerate_series_error("acf_pacf: sample variance is zero");

  std::vector<double> acf(max_lag + 1);
  acf[0] = 1.0;
  for (std::size_t l = 1; l <= max_lag; ++l) {
    double c = 0.0;
    for (std::size_t t = 0; t + l < n; ++t) c += (z[t] - m) * (z[t + l] - m);
    acf[l] = c / static_cast<double>(n) / c0;
  }

  std::vector<double> pacf(max_lag + 1);
  pacf[0] = 1.0;
  if (max_lag >= 1) {
    std::vector<double> phi_prev(max_lag + 1, 0.0), phi(max_lag + 1, 0.0);
    phi_prev[1] = acf[1];
    pacf[1] = acf[1];
    for (std::size_t kk = 2; kk <= max_lag; ++kk) {
      double num = acf[kk];
      double den = 1.0;
      for (std::size_t j = 1; j < kk; ++j) {
        num -= phi_prev[j] * acf[kk - j];
        den -= phi_prev[j] * acf[j];
      }
      if (!(den > 0.0))
        throw degenerate_series_error("acf_pacf: Durbin-Levinson recursion is degenerate");
      const double pk = num / den;
      pacf[kk] = pk;
      for (std::size_t j = 1; j < kk; ++j) phi[j] = phi_prev[j] - pk * phi_prev[kk - j];
      phi[kk] = pk;
      std::swap(phi, phi_prev);
    }
  }
  return {std::move(acf), std::move(pacf)};
}

}  // namespace ctev
