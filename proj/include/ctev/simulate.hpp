#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "detail/banded_cholesky.hpp"
#include "detail/fft.hpp"
#include "detail/mathutil.hpp"
#include "errors.hpp"
#include "rng.hpp"
#include "series.hpp"

namespace ctev {

using GammaFn = std::function<double(double)>;

// Default tail-index map 3x(x-1)+1: strictly positive on [0,1], minimum 1/4
// at x = 1/2, value 1 at the endpoints.
inline double gamma_default(double x) { return 3.0 * x * (x - 1.0) + 1.0; }

enum class SimModel { cond_frechet, cond_pareto, csgms, cond_frechet_arfima };

// Declarative description of one generative model plus seed. Only the fields
// relevant to `model` are consulted.
struct SimSpec {
  SimModel model = SimModel::cond_pareto;
  std::size_t n = 1000;
  std::uint64_t seed = 1;

  // cond_frechet / cond_pareto: AR(1) coefficient shared by the X and U drivers.
  double ar_coeff = 0.1;

  // csgms
  double length_scale = 0.5;
  double sigma = 1.0;
  std::size_t truncation = 100;  // number of point-process atoms kept

  // cond_frechet_arfima
  double arfima_ar = 0.5;
  double arfima_ma = 0.2;
  double arfima_d = 0.1;
};

// Stream ids of the seed-splitting scheme (see derive_stream): 0 = X driver,
// 1 = U driver, 2 = point-process arrivals, 3+i = Gaussian path i, and a
// far-away id for the point-process tail completion. Fixed so that e.g.
// changing the truncation never perturbs the covariate stream.
namespace sim_stream {
inline constexpr std::uint64_t x_driver = 0;
inline constexpr std::uint64_t u_driver = 1;
inline constexpr std::uint64_t arrivals = 2;
inline constexpr std::uint64_t paths = 3;
inline constexpr std::uint64_t tail_completion = 0x100000000;
}  // namespace sim_stream

// Stationary AR(1) driven by standard Gaussian noise, mapped to exactly
// uniform marginals: U_t = Phi(Z_t * sqrt(1-phi^2)) with Z_0 drawn from the
// stationary law. Output is strictly inside (0,1).
inline std::vector<double> sim_ar1_uniform(std::size_t n, double phi, std::uint64_t seed) {
  if (!(std::fabs(phi) < 1.0)) throw config_error("sim_ar1_uniform: |phi| must be < 1");
  Rng rng(seed);
  std::vector<double> u(n);
  const double marg_sd = 1.0 / std::sqrt(1.0 - phi * phi);
  double z = marg_sd * rng.normal();
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) z = phi * z + rng.normal();
    double v = detail::normal_cdf(z / marg_sd);
    // the CDF can round to the support edge for |z| beyond ~8.3
    if (v >= 1.0) v = 1.0 - 0x1p-53;
    if (v <= 0.0) v = 0x1p-54;
    u[t] = v;
  }
  return u;
}

// Y_j = (-log U_j)^(-gamma(X_j)): conditionally unit Frechet with shape
// 1/gamma(x) given X_j = x.
inline PairedSeries sim_cond_frechet(std::span<const double> x, std::span<const double> u,
                                     const GammaFn& gamma) {
  if (x.size() != u.size()) throw config_error("sim_cond_frechet: driver lengths differ");
  std::vector<double> ys(x.size());
  for (std::size_t j = 0; j < x.size(); ++j)
    ys[j] = std::pow(-std::log(u[j]), -gamma(x[j]));
  return PairedSeries(std::vector<double>(x.begin(), x.end()), std::move(ys));
}

// Y_j = U_j^(-gamma(X_j)): conditionally Pareto with survival y^(-1/gamma(x)),
// exactly — no slowly varying correction term.
inline PairedSeries sim_cond_pareto(std::span<const double> x, std::span<const double> u,
                                    const GammaFn& gamma) {
  if (x.size() != u.size()) throw config_error("sim_cond_pareto: driver lengths differ");
  std::vector<double> ys(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) ys[j] = std::pow(u[j], -gamma(x[j]));
  return PairedSeries(std::vector<double>(x.begin(), x.end()), std::move(ys));
}

namespace detail {

// MA(inf) coefficients of the fractional integration (1-B)^(-d):
// psi_0 = 1, psi_j = psi_{j-1} (j-1+d)/j.
inline std::vector<double> fractional_psi(double d, std::size_t len) {
  std::vector<double> psi(len);
  psi[0] = 1.0;
  for (std::size_t j = 1; j < len; ++j)
    psi[j] = psi[j - 1] * (static_cast<double>(j) - 1.0 + d) / static_cast<double>(j);
  return psi;
}

inline constexpr std::size_t arfima_burn_in = 2000;

}  // namespace detail

// ARFIMA(1,d,1): fractional noise from the truncated MA(inf) expansion of
// (1-B)^(-d) applied to Gaussian innovations, then the ARMA(1,1) recursion
// x_t = ar x_{t-1} + f_t + ma f_{t-1}. The first 2000 indices are burn-in and
// discarded; the MA truncation length equals n plus the burn-in.
namespace detail {

// Law of the maximum of the point-process atoms beyond the g-th arrival, for
// one index: max_{i} (g + E_i)^(-gamma) V_i with V^(1/gamma) ~ LogNormal(mu, s),
// E[V^(1/gamma)] = 1. Writing c = y^(-1/gamma),
//   P(max <= y) = exp(-E[(c L - g)_+]),
// and E[(c L - g)_+] = c Phi((mu + s^2 - ln(g/c))/s) - g Phi((mu - ln(g/c))/s)
// for the log-normal L. The function is increasing in c with root bracketed
// by [t, t + g] when solving E[(c L - g)_+] = t, so inversion is a bisection.
inline double sample_tail_max(double g, double gamma, double sigma, double t) {
  if (!(t > 0.0)) return 0.0;
  const double s = sigma / gamma;
  if (s < 1e-10) return std::pow(g + t, -gamma);  // degenerate marks: plain arrivals
  const double mu = -0.5 * s * s;                 // makes E[L] = 1
  const auto excess = [&](double c) {
    const double la = std::log(g / c);
    return c * normal_cdf((mu + s * s - la) / s) - g * normal_cdf((mu - la) / s);
  };
  double lo = t, hi = t + g;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (excess(mid) < t)
      lo = mid;
    else
      hi = mid;
  }
  const double c = 0.5 * (lo + hi);
  return std::exp(-gamma * std::log(c));
}

}  // namespace detail

inline std::vector<double> sim_arfima(std::size_t n, double ar, double ma, double d,
                                      std::uint64_t seed) {
  if (!(std::fabs(ar) < 1.0)) throw config_error("sim_arfima: |ar| must be < 1");
  if (!(d > -0.5 && d < 0.5)) throw config_error("sim_arfima: d must be in (-0.5, 0.5)");
  const std::size_t total = n + detail::arfima_burn_in;
  Rng rng(seed);
  std::vector<double> eps(total);
  for (double& e : eps) e = rng.normal();

  const auto psi = detail::fractional_psi(d, total);
  const auto conv = detail::convolve(psi, eps);  // f_t = sum_{j<=t} psi_j eps_{t-j}

  std::vector<double> x(total);
  x[0] = conv[0];
  for (std::size_t t = 1; t < total; ++t) x[t] = ar * x[t - 1] + conv[t] + ma * conv[t - 1];
  return std::vector<double>(x.begin() + detail::arfima_burn_in, x.end());
}

// Max-stable construction with conditionally Frechet marginals: for each kept
// atom i, P_i^(X_j) = Gamma_{i,j}^(-gamma(X_j)) with Gamma_{i,j} cumulative
// sums of per-index unit exponentials (responses are conditionally
// independent given the covariates), and a shared Gaussian path W^(i) over
// the index set with squared-exponential covariance
// C(j,j') = sigma^2 exp(-(j-j')^2 / (2 l^2)). Then
//   Y_j = max_i P_i^(X_j) exp(W_j^(i) - sigma^2/(2 gamma(X_j))).
// The covariance is numerically banded (entries beyond ~8.5 l are below
// double precision) and factored once by banded Cholesky with diagonal
// jitter 1e-10 sigma^2.
//
// Only the first `truncation` atoms carry the shared Gaussian paths. The
// remaining atoms are folded in through an exact per-index draw of their
// conditional maximum given the last kept arrival (independent randomness,
// closed-form law in sample_tail_max). The conditional marginal is therefore
// exact for every truncation level, which only controls how much cross-index
// dependence is carried; with log-normal marks the maximum is regularly
// attained at arbitrarily deep ranks once sigma/gamma is large, so the tail
// cannot simply be dropped.
inline PairedSeries sim_csgms(std::size_t n, std::span<const double> x, const GammaFn& gamma,
                              double length_scale, double sigma, std::size_t truncation,
                              std::uint64_t seed) {
  if (n == 0 || x.size() != n) throw config_error("sim_csgms: covariate length must equal n");
  if (!(length_scale > 0.0)) throw config_error("sim_csgms: length scale must be positive");
  if (!(sigma > 0.0)) throw config_error("sim_csgms: sigma must be positive");
  if (truncation < 1) throw config_error("sim_csgms: truncation must be >= 1");

  const double s2 = sigma * sigma;
  std::size_t bw = static_cast<std::size_t>(std::ceil(8.5 * length_scale)) + 2;
  bw = std::min(bw, n - 1);
  std::vector<double> cov(bw + 1);
  for (std::size_t d = 0; d <= bw; ++d) {
    const double dd = static_cast<double>(d);
    cov[d] = s2 * std::exp(-dd * dd / (2.0 * length_scale * length_scale));
  }
  cov[0] += 1e-10 * s2;
  const detail::BandedCholesky chol(n, cov);

  std::vector<double> gam(n), shift(n);
  for (std::size_t j = 0; j < n; ++j) {
    gam[j] = gamma(x[j]);
    if (!(gam[j] > 0.0)) throw config_error("sim_csgms: gamma(x) must be positive");
    shift[j] = s2 / (2.0 * gam[j]);
  }

  Rng arrivals(derive_stream(seed, sim_stream::arrivals));
  std::vector<double> arrival(n, 0.0);
  std::vector<double> z(n), w(n);
  std::vector<double> log_y(n, -std::numeric_limits<double>::infinity());

  for (std::size_t i = 0; i < truncation; ++i) {
    Rng path(derive_stream(seed, sim_stream::paths + i));
    for (double& v : z) v = path.normal();
    chol.apply(z, w);
    for (std::size_t j = 0; j < n; ++j) {
      arrival[j] += arrivals.exponential();
      const double cand = -gam[j] * std::log(arrival[j]) + w[j] - shift[j];
      if (cand > log_y[j]) log_y[j] = cand;
    }
  }

  // exact completion of the atoms beyond the last kept arrival
  Rng tail(derive_stream(seed, sim_stream::tail_completion));
  for (std::size_t j = 0; j < n; ++j) {
    const double t = tail.exponential();
    const double tmax = detail::sample_tail_max(arrival[j], gam[j], sigma, t);
    if (tmax > 0.0) {
      const double cand = std::log(tmax);
      if (cand > log_y[j]) log_y[j] = cand;
    }
  }

  std::vector<double> ys(n);
  for (std::size_t j = 0; j < n; ++j) ys[j] = std::exp(log_y[j]);
  return PairedSeries(std::vector<double>(x.begin(), x.end()), std::move(ys));
}

// Composition of the generators per model. Drivers use the fixed sub-streams
// of the master seed, so e.g. two models sharing a seed share the covariate
// path where the construction allows it.
inline PairedSeries build_sim(const SimSpec& spec, const GammaFn& gamma = gamma_default) {
  if (spec.n == 0) throw config_error("build_sim: n must be >= 1");
  switch (spec.model) {
    case SimModel::cond_frechet: {
      const auto x = sim_ar1_uniform(spec.n, spec.ar_coeff, derive_stream(spec.seed, sim_stream::x_driver));
      const auto u = sim_ar1_uniform(spec.n, spec.ar_coeff, derive_stream(spec.seed, sim_stream::u_driver));
      return sim_cond_frechet(x, u, gamma);
    }
    case SimModel::cond_pareto: {
      const auto x = sim_ar1_uniform(spec.n, spec.ar_coeff, derive_stream(spec.seed, sim_stream::x_driver));
      const auto u = sim_ar1_uniform(spec.n, spec.ar_coeff, derive_stream(spec.seed, sim_stream::u_driver));
      return sim_cond_pareto(x, u, gamma);
    }
    case SimModel::csgms: {
      Rng rng(derive_stream(spec.seed, sim_stream::x_driver));
      std::vector<double> x(spec.n);
      for (double& v : x) v = rng.uniform01();  // i.i.d. standard uniform covariates
      return sim_csgms(spec.n, x, gamma, spec.length_scale, spec.sigma, spec.truncation,
                       spec.seed);
    }
    case SimModel::cond_frechet_arfima: {
      const auto xd = sim_arfima(spec.n, spec.arfima_ar, spec.arfima_ma, spec.arfima_d,
                                 derive_stream(spec.seed, sim_stream::x_driver));
      const auto ud = sim_arfima(spec.n, spec.arfima_ar, spec.arfima_ma, spec.arfima_d,
                                 derive_stream(spec.seed, sim_stream::u_driver));
      // Uniformisation by ranks/(n+1): the marginal law has no closed CDF.
      const auto rx = detail::ranks_average(xd);
      const auto ru = detail::ranks_average(ud);
      const double denom = static_cast<double>(spec.n) + 1.0;
      std::vector<double> x(spec.n), u(spec.n);
      for (std::size_t j = 0; j < spec.n; ++j) {
        x[j] = rx[j] / denom;
        u[j] = ru[j] / denom;
      }
      return sim_cond_frechet(x, u, gamma);
    }
  }
  throw config_error("build_sim: unknown model");
}

inline const char* sim_model_name(SimModel m) {
  switch (m) {
    case SimModel::cond_frechet: return "frechet";
    case SimModel::cond_pareto: return "pareto";
    case SimModel::csgms: return "csgms";
    case SimModel::cond_frechet_arfima: return "arfima";
  }
  return "?";
}

inline SimModel sim_model_from_name(const std::string& name) {
  if (name == "frechet") return SimModel::cond_frechet;
  if (name == "pareto") return SimModel::cond_pareto;
  if (name == "csgms") return SimModel::csgms;
  if (name == "arfima") return SimModel::cond_frechet_arfima;
  throw config_error("unknown simulation model: " + name);
}

}  // namespace ctev
