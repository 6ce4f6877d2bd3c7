#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "detail/mathutil.hpp"
#include "errors.hpp"
#include "series.hpp"

namespace ctev {

enum class BandwidthVariant { sj_global, sj_concomitant, cross_validation, fixed_rule };

// Grid and smoothing parameters for the cross-validation selector. The grid
// spans [lo_factor, hi_factor] times the normal-reference bandwidth of the
// covariates, log-spaced; b <= 0 requests the default response smoothing
// bandwidth (normal-reference rule on the log responses).
struct CVParams {
  double lo_factor = 0.25;
  double hi_factor = 4.0;
  std::size_t grid_size = 20;
  double b = 0.0;
};

struct BandwidthRule {
  BandwidthVariant variant = BandwidthVariant::fixed_rule;
  CVParams cv{};

  bool depends_on_k() const {
    return variant == BandwidthVariant::fixed_rule ||
           variant == BandwidthVariant::sj_concomitant;
  }
};

// Data-independent rule h = sqrt(log(k)/n).
inline double bw_fixed(std::size_t n, std::size_t k) {
  if (n < 1) throw config_error("bw_fixed: n must be >= 1");
  if (k < 2) throw config_error("bw_fixed: k must be >= 2");
  return std::sqrt(std::log(static_cast<double>(k)) / static_cast<double>(n));
}

// Normal-reference bandwidth 1.06 * min(sd, IQR/1.349) * n^(-1/5).
inline double normal_reference_bandwidth(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 2) throw config_error("normal_reference_bandwidth: need at least 2 observations");
  const double sd = detail::sample_sd(xs);
  if (!(sd > 0.0)) throw degenerate_sample_error("sample has zero variance");
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = detail::quantile_sorted(sorted, 0.75) - detail::quantile_sorted(sorted, 0.25);
  double scale = std::min(sd, iqr / 1.349);
  if (!(scale > 0.0)) scale = sd;
  return 1.06 * scale * std::pow(static_cast<double>(n), -0.2);
}

namespace detail {

// Pairwise Gaussian-derivative functionals used by the Sheather–Jones
// two-stage plug-in. The diagonal is included and the sum is normalised by
// n(n-1), matching the usual implementation of the method.
inline double sj_psi4(std::span<const double> xs, double alpha) {
  const std::size_t n = xs.size();
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = (xs[i] - xs[j]) / alpha;
      const double d2 = d * d;
      s += (d2 * d2 - 6.0 * d2 + 3.0) * std::exp(-0.5 * d2);
    }
  s = 2.0 * s + 3.0 * static_cast<double>(n);
  const double nd = static_cast<double>(n);
  return s / (nd * (nd - 1.0) * std::pow(alpha, 5.0) * std::sqrt(2.0 * pi));
}

inline double sj_psi6(std::span<const double> xs, double alpha) {
  const std::size_t n = xs.size();
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = (xs[i] - xs[j]) / alpha;
      const double d2 = d * d;
      s += (d2 * d2 * d2 - 15.0 * d2 * d2 + 45.0 * d2 - 15.0) * std::exp(-0.5 * d2);
    }
  s = 2.0 * s - 15.0 * static_cast<double>(n);
  const double nd = static_cast<double>(n);
  return s / (nd * (nd - 1.0) * std::pow(alpha, 7.0) * std::sqrt(2.0 * pi));
}

}  // namespace detail

struct SjBandwidth {
  double value = 0.0;
  bool fell_back = false;  // true when the solve failed and the normal-reference rule was used
};

// Sheather–Jones solve-the-equation plug-in bandwidth for Gaussian-kernel
// density estimation. Stage-one bandwidths use the standard normal-scale
// initialisation; the fixed point is located by bisection on a bracket scaled
// from the normal-reference bandwidth. Any failure (negative functional
// estimates, no sign change) falls back to the normal-reference value with
// the fell_back tag set.
inline SjBandwidth sj_plugin(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 10) throw config_error("sj_plugin: need at least 10 observations");
  const double sd = detail::sample_sd(xs);
  if (!(sd > 0.0)) throw degenerate_sample_error("sample has zero variance");
  const double hnr = normal_reference_bandwidth(xs);

  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = detail::quantile_sorted(sorted, 0.75) - detail::quantile_sorted(sorted, 0.25);
  double lambda = std::min(sd, iqr / 1.349);
  if (!(lambda > 0.0)) lambda = sd;

  const double nd = static_cast<double>(n);
  const double a = 0.920 * lambda * std::pow(nd, -1.0 / 7.0);
  const double b = 0.912 * lambda * std::pow(nd, -1.0 / 9.0);
  const double sda = detail::sj_psi4(xs, a);
  const double tdb = -detail::sj_psi6(xs, b);
  if (!(sda > 0.0) || !(tdb > 0.0)) return {hnr, true};

  const double alpha_c = 1.357 * std::pow(sda / tdb, 1.0 / 7.0);
  const double rk = 1.0 / (2.0 * std::sqrt(detail::pi));  // \int K^2 for Gaussian K
  auto f = [&](double h) {
    const double p4 = detail::sj_psi4(xs, alpha_c * std::pow(h, 5.0 / 7.0));
    if (!(p4 > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return std::pow(rk / (nd * p4), 0.2) - h;
  };

  double lo = hnr / 20.0, hi = hnr * 5.0;
  double flo = f(lo), fhi = f(hi);
  for (int round = 0; round < 8 && (!(flo > 0.0) || !(fhi < 0.0)); ++round) {
    if (std::isnan(flo) || std::isnan(fhi)) return {hnr, true};
    if (!(flo > 0.0)) { lo /= 4.0; flo = f(lo); }
    if (!(fhi < 0.0)) { hi *= 4.0; fhi = f(hi); }
  }
  if (std::isnan(flo) || std::isnan(fhi) || !(flo > 0.0) || !(fhi < 0.0)) return {hnr, true};

  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (std::isnan(fm)) return {hnr, true};
    if (fm > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return {0.5 * (lo + hi), false};
}

inline double bw_sheather_jones(std::span<const double> xs) { return sj_plugin(xs).value; }

// Sheather–Jones bandwidth fitted on the covariates paired with the k largest
// responses (the concomitants). Ties in the responses are broken by original
// index order, so the selection is stable.
inline double bw_sj_concomitant(const PairedSeries& s, std::size_t k) {
  if (k < 10) throw too_few_concomitants_error(k);
  if (k > s.n()) throw config_error("bw_sj_concomitant: k exceeds the sample size");
  std::vector<std::size_t> idx(s.n());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const auto ys = s.y();
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (ys[a] != ys[b]) return ys[a] > ys[b];
    return a < b;
  });
  std::vector<double> conc(k);
  const auto xs = s.x();
  for (std::size_t i = 0; i < k; ++i) conc[i] = xs[idx[i]];
  return bw_sheather_jones(conc);
}

struct CVObjectiveTrace {
  std::vector<double> h_grid;
  std::vector<double> objective;
  double argmin_h = 0.0;  // ties broken toward the smaller h
};

// Leave-one-out cross-validation criterion for the covariate bandwidth:
//   sum_i sum_j (1{Y_i > Y_j} - S_{-i}(Y_j | X_i))^2
// where S_{-i} is the doubly-smoothed Nadaraya–Watson survival estimator with
// Gaussian covariate kernel and Gaussian CDF response smoothing at bandwidth
// b. A leave-one-out term whose kernel mass underflows to zero contributes
// the noninformative prediction 1/2.
inline CVObjectiveTrace bw_cv_loo(const PairedSeries& s, std::span<const double> h_grid,
                                  double b) {
  const std::size_t n = s.n();
  if (n < 3) throw config_error("bw_cv_loo: need at least 3 observations");
  if (h_grid.empty()) throw config_error("bw_cv_loo: empty bandwidth grid");
  for (double h : h_grid)
    if (!(h > 0.0) || !std::isfinite(h)) throw config_error("bw_cv_loo: bandwidths must be positive");
  if (!(b > 0.0) || !std::isfinite(b)) throw config_error("bw_cv_loo: b must be positive");

  const auto xs = s.x();
  const auto ys = s.y();

  // Survival smoothing of the response indicators: G[jp][j] -> 1{Y_jp > Y_j}
  // as b -> 0. Independent of h, so computed once.
  std::vector<double> G(n * n);
  for (std::size_t jp = 0; jp < n; ++jp)
    for (std::size_t j = 0; j < n; ++j)
      G[jp * n + j] = detail::normal_cdf((ys[jp] - ys[j]) / b);

  CVObjectiveTrace out;
  out.h_grid.assign(h_grid.begin(), h_grid.end());
  out.objective.resize(h_grid.size());

  std::vector<double> kw(n), num(n);
  for (std::size_t m = 0; m < h_grid.size(); ++m) {
    const double h = h_grid[m];
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double den = 0.0;
      std::fill(num.begin(), num.end(), 0.0);
      for (std::size_t jp = 0; jp < n; ++jp) {
        if (jp == i) continue;
        const double w = detail::normal_pdf((xs[i] - xs[jp]) / h);
        den += w;
        if (w == 0.0) continue;
        const double* grow = &G[jp * n];
        for (std::size_t j = 0; j < n; ++j) num[j] += w * grow[j];
      }
      for (std::size_t j = 0; j < n; ++j) {
        const double pred = den > 0.0 ? num[j] / den : 0.5;
        const double ind = ys[i] > ys[j] ? 1.0 : 0.0;
        const double d = ind - pred;
        obj += d * d;
      }
    }
    out.objective[m] = obj;
  }

  std::size_t best = 0;
  for (std::size_t m = 1; m < out.objective.size(); ++m)
    if (out.objective[m] < out.objective[best]) best = m;
  out.argmin_h = out.h_grid[best];
  return out;
}

// Default response-smoothing bandwidth: normal-reference rule on log Y.
inline double default_smoothing_bandwidth(const PairedSeries& s) {
  std::vector<double> logs(s.n());
  const auto ys = s.y();
  for (std::size_t i = 0; i < s.n(); ++i) logs[i] = std::log(ys[i]);
  return normal_reference_bandwidth(logs);
}

inline std::vector<double> default_cv_grid(std::span<const double> xs, const CVParams& p) {
  if (p.grid_size < 1 || !(p.lo_factor > 0.0) || !(p.hi_factor >= p.lo_factor))
    throw config_error("invalid cross-validation grid parameters");
  const double hnr = normal_reference_bandwidth(xs);
  return detail::log_spaced(p.lo_factor * hnr, p.hi_factor * hnr, p.grid_size);
}

// Dispatch over the four selection rules. FixedRule and SheatherJonesConcomitant
// consume k; the other two ignore it.
inline double resolve(const BandwidthRule& rule, const PairedSeries& s, std::size_t k) {
  switch (rule.variant) {
    case BandwidthVariant::fixed_rule:
      return bw_fixed(s.n(), k);
    case BandwidthVariant::sj_global:
      return bw_sheather_jones(s.x());
    case BandwidthVariant::sj_concomitant:
      return bw_sj_concomitant(s, k);
    case BandwidthVariant::cross_validation: {
      const auto grid = default_cv_grid(s.x(), rule.cv);
      const double b = rule.cv.b > 0.0 ? rule.cv.b : default_smoothing_bandwidth(s);
      return bw_cv_loo(s, grid, b).argmin_h;
    }
  }
  throw config_error("unknown bandwidth rule");
}

inline const char* bandwidth_rule_name(BandwidthVariant v) {
  switch (v) {
    case BandwidthVariant::sj_global: return "sj-global";
    case BandwidthVariant::sj_concomitant: return "sj-concomitant";
    case BandwidthVariant::cross_validation: return "cv";
    case BandwidthVariant::fixed_rule: return "fixed";
  }
  return "?";
}

inline BandwidthVariant bandwidth_rule_from_name(const std::string& name) {
  if (name == "fixed") return BandwidthVariant::fixed_rule;
  if (name == "sj-global") return BandwidthVariant::sj_global;
  if (name == "sj-concomitant") return BandwidthVariant::sj_concomitant;
  if (name == "cv") return BandwidthVariant::cross_validation;
  throw config_error("unknown bandwidth rule: " + name);
}

}  // namespace ctev
