#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fpot/geometry.hpp"
#include "fpot/measure.hpp"

namespace fpot {

struct CostPerturbation;

/// Transport cost profile h: continuous, nondecreasing, h(0) = 0. Costs are
/// evaluated on distances; couplings pay h(|x1 - x2|).
///
/// Built-in kinds: power r^p (p > 0), bounded concave min(r, cap), and sampled
/// profiles interpolated linearly on their r-grid. Derived costs (rescaled,
/// Lipschitz-regularized, linearly perturbed) wrap an existing profile.
class CostFn {
 public:
  struct Impl;

  CostFn() = default;

  static CostFn power(double p);
  static CostFn bounded_concave(double cap);
  /// Sampled profile; radii must start at 0 with value 0 and be strictly
  /// increasing, values nondecreasing. Beyond the last sample the profile
  /// continues with its final slope.
  static CostFn from_samples(std::vector<double> radii, std::vector<double> values);
  /// Samples an arbitrary profile on a 4096-point log-spaced grid up to r_max.
  static CostFn sampled(const std::function<double(double)>& h, double r_max);

  double operator()(double r) const;
  bool valid() const { return impl_ != nullptr; }

  /// Least Lipschitz constant if the profile is globally Lipschitz.
  std::optional<double> lipschitz_constant() const;
  /// Lipschitz constant valid on [0, r_max] (finite for every kind).
  double lipschitz_on(double r_max) const;
  bool bounded() const;
  /// Exponent p with h(a r) >= a^p h(r) for all a >= 1, when known by kind.
  std::optional<double> growth_exponent() const;
  /// Exponent p with h(a r) >= a^p h(r) for all a <= 1, when known by kind.
  std::optional<double> shrink_exponent() const;
  /// True when the 1D monotone-coupling fast path applies (convex by kind).
  bool convex() const;

  std::string describe() const;

 private:
  explicit CostFn(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;

  friend CostFn rescale_cost(const CostFn&, double);
  friend CostFn lipschitz_approx(const CostFn&, double);
  friend struct CostPerturbation;
  friend CostPerturbation unbounded_perturbation(const CostFn&, double,
                                                 const std::vector<const DiscreteMeasure*>&);
};

/// h_s(r) := h(r * e^s).
CostFn rescale_cost(const CostFn& h, double s);

/// Largest n-Lipschitz minorant h^n(r) = inf_{s>=0} h(s) + n|r - s|.
/// Exact for power, bounded-concave, and sampled kinds; derived kinds fall
/// back to a dense-grid lower envelope.
CostFn lipschitz_approx(const CostFn& h, double n);

struct CostPerturbation {
  CostFn cost;                 // h + eps * g(|x|)
  double eps = 0.0;
  double g_integral = 0.0;     // integral of g d(rho0)
  std::vector<double> radii;   // breakpoints r_0 = 0, r_1 = 1, ...
};

/// Builds the unbounded perturbation h + eps*g where g is piecewise linear,
/// g(r_k) = k on radii with nondecreasing increments chosen so the tail mass
/// of rho0 beyond r_{k+1} is at most 2^-k. rho0 is the sum of the given
/// measures (total mass need not be 1). Compactly supported rho0 leads to
/// constant increments past the support radius.
CostPerturbation unbounded_perturbation(const CostFn& h, double eps,
                                        const std::vector<const DiscreteMeasure*>& parts);

/// Discrete h-transform: out[i] = min_j h(|eval[i] - from[j]|) - zeta[j].
std::vector<double> h_transform(const CostFn& h, const std::vector<Vec>& from_points,
                                const std::vector<double>& zeta,
                                const std::vector<Vec>& eval_points);

}  // namespace fpot
