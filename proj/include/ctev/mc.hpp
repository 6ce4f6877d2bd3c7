#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "bandwidth.hpp"
#include "errors.hpp"
#include "estimators.hpp"
#include "kernel.hpp"
#include "simulate.hpp"

namespace ctev {

// A Monte Carlo bias/MSE experiment over a k/n grid at one conditioning point.
struct MCStudy {
  SimSpec spec;
  double x0 = 0.6;
  std::vector<double> k_fracs;  // ascending, in (0, 1]
  BandwidthRule h_rule{};
  std::size_t replications = 200;
  std::uint64_t base_seed = 1;
  Kernel kernel{};
  double ci_level = 0.95;
};

struct MCRow {
  double k_frac = 0.0;
  std::size_t k = 0;
  double bias = 0.0;     // mean estimate minus true value
  double mse = 0.0;
  double mean_se = 0.0;  // average plug-in standard error
  double coverage = 0.0; // fraction of non-missing replications whose CI covers the truth
  std::size_t n_missing = 0;
};

struct MCResult {
  double gamma_true = 0.0;
  std::vector<MCRow> rows;  // one per k_frac, in input order
};

namespace detail {

inline void validate_study(const MCStudy& st) {
  if (st.replications < 1) throw config_error("mc: replications must be >= 1");
  if (st.k_fracs.empty()) throw config_error("mc: k_fracs must be nonempty");
  double prev = 0.0;
  for (double f : st.k_fracs) {
    if (!(f > 0.0 && f <= 1.0)) throw config_error("mc: k_fracs must lie in (0,1]");
    if (!(f >= prev)) throw config_error("mc: k_fracs must be ascending");
    prev = f;
    const auto k = static_cast<std::size_t>(std::floor(f * static_cast<double>(st.spec.n)));
    if (k < 2) throw config_error("mc: floor(k_frac * n) must be >= 2");
  }
  if (!(st.ci_level > 0.0 && st.ci_level < 1.0)) throw config_error("mc: ci_level must be in (0,1)");
  if (!std::isfinite(st.x0)) throw config_error("mc: x0 must be finite");
}

}  // namespace detail

// Runs the study. Replication r (1-based) simulates with seed base_seed ^ r,
// so the result is a pure function of the study: the worker count only
// distributes the independent replications and never changes any output bit
// (each replication writes to its own slot; aggregation is sequential).
// Missing estimates (empty windows) are excluded from the moments and counted.
inline MCResult run_mc(const MCStudy& st, std::size_t workers = 1,
                       const GammaFn& gamma = gamma_default) {
  detail::validate_study(st);
  if (workers < 1) workers = 1;

  const std::size_t reps = st.replications;
  const std::size_t nk = st.k_fracs.size();
  const std::size_t n = st.spec.n;
  std::vector<std::size_t> ks(nk);
  for (std::size_t i = 0; i < nk; ++i)
    ks[i] = static_cast<std::size_t>(std::floor(st.k_fracs[i] * static_cast<double>(n)));

  std::vector<std::vector<std::optional<HillEstimate>>> cell(
      reps, std::vector<std::optional<HillEstimate>>(nk));

  auto run_rep = [&](std::size_t r) {
    SimSpec sp = st.spec;
    sp.seed = st.base_seed ^ static_cast<std::uint64_t>(r + 1);
    const PairedSeries series = build_sim(sp, gamma);
    std::optional<double> shared_h;
    if (!st.h_rule.depends_on_k()) shared_h = resolve(st.h_rule, series, ks.front());
    for (std::size_t i = 0; i < nk; ++i) {
      const double h = shared_h ? *shared_h : resolve(st.h_rule, series, ks[i]);
      try {
        cell[r][i] = cond_hill(series, EstimatorConfig{st.x0, ks[i], h, st.kernel, st.ci_level});
      } catch (const empty_window_error&) {
        cell[r][i] = std::nullopt;
      }
    }
  };

  if (workers == 1 || reps == 1) {
    for (std::size_t r = 0; r < reps; ++r) run_rep(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      for (;;) {
        const std::size_t r = next.fetch_add(1);
        if (r >= reps) return;
        try {
          run_rep(r);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    const std::size_t nw = std::min(workers, reps);
    pool.reserve(nw);
    for (std::size_t t = 0; t < nw; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  MCResult out;
  out.gamma_true = gamma(st.x0);
  out.rows.resize(nk);
  for (std::size_t i = 0; i < nk; ++i) {
    MCRow& row = out.rows[i];
    row.k_frac = st.k_fracs[i];
    row.k = ks[i];
    double sum = 0.0, sum_sq_err = 0.0, sum_se = 0.0;
    std::size_t used = 0, covered = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& e = cell[r][i];
      if (!e) {
        ++row.n_missing;
        continue;
      }
      ++used;
      sum += e->gamma_hat;
      const double err = e->gamma_hat - out.gamma_true;
      sum_sq_err += err * err;
      sum_se += e->std_error;
      if (e->se_ok && e->ci_lo <= out.gamma_true && out.gamma_true <= e->ci_hi) ++covered;
    }
    if (used == 0)
      throw all_missing_error("mc: every replication failed at k_frac=" +
                              std::to_string(st.k_fracs[i]));
    const double ud = static_cast<double>(used);
    row.bias = sum / ud - out.gamma_true;
    row.mse = sum_sq_err / ud;
    row.mean_se = sum_se / ud;
    row.coverage = static_cast<double>(covered) / ud;
  }
  return out;
}

}  // namespace ctev
