#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "bandwidth.hpp"
#include "detail/mathutil.hpp"
#include "errors.hpp"
#include "kernel.hpp"
#include "series.hpp"

namespace ctev {

struct EstimatorConfig {
  double x0 = 0.5;       // conditioning point
  std::size_t k = 2;     // intermediate-sequence value, in [2, n]
  double h = 0.1;        // bandwidth
  Kernel kernel{};
  double ci_level = 0.95;
};

struct HillEstimate {
  double gamma_hat = 0.0;
  double q_hat = 0.0;
  double g_hat = 0.0;       // covariate density estimate at x0
  double std_error = 0.0;   // NaN when se_ok is false
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double effective_mass = 0.0;    // sum of kernel weights
  std::size_t window_count = 0;   // observations with positive kernel weight
  bool se_ok = false;
};

enum class LevelMode { random_level, deterministic_level };

struct TailCurve {
  std::vector<double> s;
  std::vector<double> t_hat;  // non-increasing along increasing s
  LevelMode mode = LevelMode::random_level;
};

namespace detail {

inline std::vector<double> kernel_weights(std::span<const double> xs, double x0, double h,
                                          const Kernel& k) {
  std::vector<double> w(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) w[j] = kernel_eval(k, (x0 - xs[j]) / h);
  return w;
}

inline double total_mass(std::span<const double> w) {
  double s = 0.0;
  for (double v : w) s += v;
  return s;
}

inline void require_window(double mass, double x0) {
  if (!(mass > 0.0) || !std::isfinite(mass)) throw empty_window_error(x0);
}

// Weighted survival fraction with strict exceedance: sum_j w_j 1{Y_j > y} / mass.
inline double weighted_survival(std::span<const double> ys, std::span<const double> w,
                                double mass, double y) {
  double s = 0.0;
  for (std::size_t j = 0; j < ys.size(); ++j)
    if (ys[j] > y) s += w[j];
  return s / mass;
}

// Generalised inverse of the weighted ECDF, restricted to the observed
// responses. Defined through the surviving mass: the smallest sample value
// whose strictly-above mass fraction is <= s_level. Equivalent to
// inf{y in sample : F_n(y) >= 1 - s_level}; tied values share one ECDF jump.
inline double weighted_quantile_survival(std::span<const double> ys, std::span<const double> w,
                                         double mass, double s_level) {
  const std::size_t n = ys.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return ys[a] < ys[b]; });
  double cum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    const double v = ys[idx[i]];
    std::size_t j = i;
    while (j < n && ys[idx[j]] == v) {
      cum += w[idx[j]];
      ++j;
    }
    if ((mass - cum) / mass <= s_level) return v;
    i = j;
  }
  return ys[idx[n - 1]];  // unreachable for s_level >= 0
}

inline void validate_config(const EstimatorConfig& cfg, std::size_t n) {
  if (!std::isfinite(cfg.x0)) throw config_error("x0 must be finite");
  if (cfg.k < 2 || cfg.k > n) throw config_error("k must lie in [2, n]");
  if (!(cfg.h > 0.0) || !std::isfinite(cfg.h)) throw config_error("bandwidth must be positive");
  if (!(cfg.ci_level > 0.0 && cfg.ci_level < 1.0))
    throw config_error("ci_level must be in (0,1)");
}

}  // namespace detail

// Nadaraya–Watson estimate of P(Y > y | X = x0). Strict exceedance.
inline double cond_survival(const PairedSeries& s, double x0, double h, const Kernel& kernel,
                            double y) {
  if (!(h > 0.0) || !std::isfinite(h)) throw config_error("bandwidth must be positive");
  const auto w = detail::kernel_weights(s.x(), x0, h, kernel);
  const double mass = detail::total_mass(w);
  detail::require_window(mass, x0);
  return detail::weighted_survival(s.y(), w, mass, y);
}

// Generalised inverse of the weighted ECDF at level p; always one of the
// observed responses.
inline double cond_quantile(const PairedSeries& s, double x0, double h, const Kernel& kernel,
                            double p) {
  if (!(h > 0.0) || !std::isfinite(h)) throw config_error("bandwidth must be positive");
  if (!(p > 0.0 && p < 1.0)) throw config_error("quantile level must be in (0,1)");
  const auto w = detail::kernel_weights(s.x(), x0, h, kernel);
  const double mass = detail::total_mass(w);
  detail::require_window(mass, x0);
  return detail::weighted_quantile_survival(s.y(), w, mass, 1.0 - p);
}

// Kernel-weighted Hill estimator at conditioning point x0 with plug-in
// standard error and normal confidence interval. The threshold is the
// weighted (1 - k/n) quantile; log terms use log_+(t) = max(log t, 0), so a
// response equal to the threshold contributes nothing.
inline HillEstimate cond_hill(const PairedSeries& s, const EstimatorConfig& cfg) {
  const std::size_t n = s.n();
  detail::validate_config(cfg, n);
  const auto xs = s.x();
  const auto ys = s.y();
  const auto w = detail::kernel_weights(xs, cfg.x0, cfg.h, cfg.kernel);
  const double mass = detail::total_mass(w);
  detail::require_window(mass, cfg.x0);

  std::size_t window_count = 0;
  for (double v : w)
    if (v > 0.0) ++window_count;

  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(cfg.k);
  const double q = detail::weighted_quantile_survival(ys, w, mass, kd / nd);

  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (ys[j] > q) {
      const double r = ys[j] / q;
      if (r > 1.0) acc += w[j] * std::log(r);
    }
  }
  const double gamma = (nd / kd) * acc / mass;
  const double g_hat = mass / (nd * cfg.h);

  HillEstimate e;
  e.gamma_hat = gamma;
  e.q_hat = q;
  e.g_hat = g_hat;
  e.effective_mass = mass;
  e.window_count = window_count;
  e.se_ok = g_hat > 0.0 && std::isfinite(g_hat);
  if (e.se_ok) {
    // Plug-in variance gamma^2 * \int K^2 / (g(x) k h); sqrt(k h) is the rate.
    e.std_error = gamma * std::sqrt(kernel_l2(cfg.kernel) / (g_hat * kd * cfg.h));
    const double z = detail::normal_quantile(0.5 * (1.0 + cfg.ci_level));
    e.ci_lo = gamma - z * e.std_error;
    e.ci_hi = gamma + z * e.std_error;
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    e.std_error = nan;
    e.ci_lo = nan;
    e.ci_hi = nan;
  }
  return e;
}

// Tail empirical function on a grid of scale factors. In random-level mode the
// threshold is the weighted (1 - k/n) quantile; in deterministic-level mode
// the caller supplies it. t_hat(s) = S(s * threshold) / (k/n).
inline TailCurve tail_curve(const PairedSeries& s, const EstimatorConfig& cfg,
                            std::span<const double> s_grid, LevelMode mode,
                            double threshold = 0.0) {
  const std::size_t n = s.n();
  detail::validate_config(cfg, n);
  for (double v : s_grid)
    if (!(v > 0.0) || !std::isfinite(v)) throw config_error("tail_curve: grid values must be positive");
  const auto w = detail::kernel_weights(s.x(), cfg.x0, cfg.h, cfg.kernel);
  const double mass = detail::total_mass(w);
  detail::require_window(mass, cfg.x0);

  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(cfg.k);
  double thr;
  if (mode == LevelMode::random_level) {
    thr = detail::weighted_quantile_survival(s.y(), w, mass, kd / nd);
  } else {
    if (!(threshold > 0.0) || !std::isfinite(threshold))
      throw config_error("tail_curve: deterministic level requires a positive threshold");
    thr = threshold;
  }

  TailCurve out;
  out.mode = mode;
  out.s.assign(s_grid.begin(), s_grid.end());
  out.t_hat.resize(s_grid.size());
  for (std::size_t i = 0; i < s_grid.size(); ++i)
    out.t_hat[i] = detail::weighted_survival(s.y(), w, mass, s_grid[i] * thr) / (kd / nd);
  return out;
}

// Exceedance-sum functional (n/k) sum_j w_j phi(Y_j/q) 1{Y_j > q} / sum_j w_j.
// With phi = log this is exactly the Hill estimate; phi must vanish at 1 and
// be nondecreasing on [1, inf) for the plug-in theory to apply (not enforced).
template <class Phi>
double tail_functional(const PairedSeries& s, const EstimatorConfig& cfg, Phi&& phi) {
  const std::size_t n = s.n();
  detail::validate_config(cfg, n);
  const auto ys = s.y();
  const auto w = detail::kernel_weights(s.x(), cfg.x0, cfg.h, cfg.kernel);
  const double mass = detail::total_mass(w);
  detail::require_window(mass, cfg.x0);

  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(cfg.k);
  const double q = detail::weighted_quantile_survival(ys, w, mass, kd / nd);
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    if (ys[j] > q) acc += w[j] * phi(ys[j] / q);
  return (nd / kd) * acc / mass;
}

struct TracePoint {
  std::size_t k = 0;
  double h = 0.0;
  std::optional<HillEstimate> estimate;  // empty when the window is empty at this k
};

struct ProfilePoint {
  double x = 0.0;
  std::optional<HillEstimate> estimate;
};

// Hill estimates over a k-grid at fixed x0, with the bandwidth resolved per k
// through the rule. Empty windows are encoded as missing points, not errors,
// so whole traces never abort on boundary configurations.
inline std::vector<TracePoint> hill_trace(const PairedSeries& s, double x0, const Kernel& kernel,
                                          std::span<const std::size_t> k_values,
                                          const BandwidthRule& rule, double ci_level = 0.95) {
  const std::size_t n = s.n();
  for (std::size_t k : k_values)
    if (k < 2 || k > n) throw config_error("hill_trace: every k must lie in [2, n]");

  std::optional<double> shared_h;
  if (!rule.depends_on_k() && !k_values.empty()) shared_h = resolve(rule, s, k_values.front());

  std::vector<TracePoint> out;
  out.reserve(k_values.size());
  for (std::size_t k : k_values) {
    TracePoint p;
    p.k = k;
    p.h = shared_h ? *shared_h : resolve(rule, s, k);
    try {
      p.estimate = cond_hill(s, EstimatorConfig{x0, k, p.h, kernel, ci_level});
    } catch (const empty_window_error&) {
      p.estimate = std::nullopt;
    }
    out.push_back(std::move(p));
  }
  return out;
}

// Hill estimates over a conditioning-point grid at fixed k (risk profile).
inline std::vector<ProfilePoint> risk_profile(const PairedSeries& s,
                                              std::span<const double> x_grid, std::size_t k,
                                              const Kernel& kernel, const BandwidthRule& rule,
                                              double ci_level = 0.95) {
  const std::size_t n = s.n();
  if (k < 2 || k > n) throw config_error("risk_profile: k must lie in [2, n]");
  const double h = resolve(rule, s, k);

  std::vector<ProfilePoint> out;
  out.reserve(x_grid.size());
  for (double x : x_grid) {
    ProfilePoint p;
    p.x = x;
    try {
      p.estimate = cond_hill(s, EstimatorConfig{x, k, h, kernel, ci_level});
    } catch (const empty_window_error&) {
      p.estimate = std::nullopt;
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace ctev
