#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>

#include "detail/mathutil.hpp"
#include "errors.hpp"

namespace ctev {

enum class KernelFamily { uniform, epanechnikov, triangular, biweight, gaussian };

// Bounded symmetric probability density on [-1,1]. The Gaussian family is the
// admitted unbounded-support variant (support_radius = infinity); estimators
// accept it, the CLI prints a note when it is selected.
struct Kernel {
  KernelFamily family = KernelFamily::epanechnikov;

  bool compact() const { return family != KernelFamily::gaussian; }
  double support_radius() const {
    return compact() ? 1.0 : std::numeric_limits<double>::infinity();
  }
};

// K(u). The support boundary is closed: compact families evaluate their
// closed-form expression at |u| = 1 (uniform gives 0.5, the others 0), so the
// uniform kernel is exactly the indicator-based subsample weighting.
inline double kernel_eval(const Kernel& k, double u) {
  const double a = std::fabs(u);
  switch (k.family) {
    case KernelFamily::uniform:
      return a <= 1.0 ? 0.5 : 0.0;
    case KernelFamily::epanechnikov:
      return a <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    case KernelFamily::triangular:
      return a <= 1.0 ? 1.0 - a : 0.0;
    case KernelFamily::biweight: {
      if (a > 1.0) return 0.0;
      const double t = 1.0 - u * u;
      return 0.9375 * t * t;
    }
    case KernelFamily::gaussian:
      return detail::normal_pdf(u);
  }
  return 0.0;
}

// \int K^2(u) du — the kernel factor of every plug-in variance. Closed forms.
inline double kernel_l2(const Kernel& k) {
  switch (k.family) {
    case KernelFamily::uniform:
      return 0.5;
    case KernelFamily::epanechnikov:
      return 0.6;
    case KernelFamily::triangular:
      return 2.0 / 3.0;
    case KernelFamily::biweight:
      return 5.0 / 7.0;
    case KernelFamily::gaussian:
      return 1.0 / (2.0 * std::sqrt(detail::pi));
  }
  return 0.0;
}

// Numeric fallback for \int K^2, for kernels without a closed form on file.
inline double kernel_l2_quadrature(const Kernel& k) {
  const double r = k.compact() ? 1.0 : 12.0;  // Gaussian tail < 1e-30 beyond 12
  return detail::simpson([&](double u) { const double v = kernel_eval(k, u); return v * v; },
                         -r, r, 1 << 15);
}

struct DensityEstimate {
  double x = 0.0;
  double value = 0.0;  // >= 0 always; 0 iff no observation has positive weight
  std::size_t n = 0;
  double bandwidth = 0.0;
};

// Parzen–Rosenblatt covariate-density estimate (1/(nh)) sum_j K((x-X_j)/h).
// A zero value is legal output; consumers decide whether it is an error.
inline DensityEstimate density_estimate(std::span<const double> xs, double x, double h,
                                        const Kernel& k) {
  if (!(h > 0.0) || !std::isfinite(h)) throw config_error("density_estimate: bandwidth must be positive");
  if (xs.empty()) throw config_error("density_estimate: empty sample");
  double s = 0.0;
  for (double xi : xs) s += kernel_eval(k, (x - xi) / h);
  const double n = static_cast<double>(xs.size());
  return DensityEstimate{x, s / (n * h), xs.size(), h};
}

inline const char* kernel_name(KernelFamily f) {
  switch (f) {
    case KernelFamily::uniform: return "uniform";
    case KernelFamily::epanechnikov: return "epanechnikov";
    case KernelFamily::triangular: return "triangular";
    case KernelFamily::biweight: return "biweight";
    case KernelFamily::gaussian: return "gaussian";
  }
  return "?";
}

inline Kernel kernel_from_name(const std::string& name) {
  if (name == "uniform") return {KernelFamily::uniform};
  if (name == "epanechnikov") return {KernelFamily::epanechnikov};
  if (name == "triangular") return {KernelFamily::triangular};
  if (name == "biweight") return {KernelFamily::biweight};
  if (name == "gaussian") return {KernelFamily::gaussian};
  throw config_error("unknown kernel family: " + name);
}

}  // namespace ctev
