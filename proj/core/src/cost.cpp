#include "fpot/cost.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace fpot {

namespace {

enum class Kind { Power, ConcaveCap, Samples, Scaled, Envelope, Perturbed };

double interp_samples(const std::vector<double>& r, const std::vector<double>& v, double q) {
  if (q <= r.front()) return v.front();
  if (q >= r.back()) {
    const std::size_t k = r.size() - 1;
    const double slope = (v[k] - v[k - 1]) / (r[k] - r[k - 1]);
    return v[k] + slope * (q - r[k]);
  }
  const auto it = std::upper_bound(r.begin(), r.end(), q);
  const std::size_t k = static_cast<std::size_t>(it - r.begin());
  const double t = (q - r[k - 1]) / (r[k] - r[k - 1]);
  return v[k - 1] + t * (v[k] - v[k - 1]);
}

}  // namespace

struct CostFn::Impl {
  Kind kind;
  // Power: value = mult * r^p.
  double p = 2.0;
  double mult = 1.0;
  // ConcaveCap: value = min(slope * r, cap).
  double slope = 1.0;
  double cap = 1.0;
  // Samples / Envelope grid.
  std::vector<double> radii;
  std::vector<double> values;
  // Scaled / Envelope / Perturbed wrap a base profile.
  std::shared_ptr<const Impl> base;
  double input_factor = 1.0;  // Scaled
  double lip_n = 0.0;         // Envelope
  // Perturbed: base + eps * g, g piecewise linear with unit steps on g_radii.
  double eps = 0.0;
  std::vector<double> g_radii;

  double eval(double r) const {
    switch (kind) {
      case Kind::Power:
        return mult * std::pow(r, p);
      case Kind::ConcaveCap:
        return std::min(slope * r, cap);
      case Kind::Samples:
        return interp_samples(radii, values, r);
      case Kind::Scaled:
        return base->eval(r * input_factor);
      case Kind::Envelope:
        return eval_envelope(r);
      case Kind::Perturbed:
        return base->eval(r) + eps * eval_g(r);
    }
    return 0.0;
  }

  double eval_envelope(double r) const {
    // Closed forms where the base kind allows them; otherwise the swept grid.
    const Impl* b = base.get();
    double factor = 1.0;
    while (b->kind == Kind::Scaled) {
      factor *= b->input_factor;
      b = b->base.get();
    }
    const double rr = r * factor;  // evaluate against the unscaled base
    const double n_eff = lip_n / factor;
    if (b->kind == Kind::Power) {
      const double a = b->mult;
      const double p_ = b->p;
      if (p_ == 1.0) return std::min(a, n_eff) * rr;
      if (p_ > 1.0) {
        const double s = std::pow(n_eff / (a * p_), 1.0 / (p_ - 1.0));
        if (rr <= s) return a * std::pow(rr, p_);
        return a * std::pow(s, p_) + n_eff * (rr - s);
      }
      // p < 1: concave with h(0)=0, the envelope is min(n r, h(r)).
      return std::min(n_eff * rr, a * std::pow(rr, p_));
    }
    if (b->kind == Kind::ConcaveCap) {
      return std::min(std::min(n_eff, b->slope) * rr, b->cap);
    }
    if (!radii.empty()) {
      // Swept grid; n-Lipschitz extension beyond the last node.
      const double env = interp_samples(radii, values, r);
      if (b->kind == Kind::Samples) return env;
      return std::min(base->eval(r), env);
    }
    return base->eval(r);
  }

  double eval_g(double r) const {
    if (r <= 0.0) return 0.0;
    const std::size_t k = g_radii.size() - 1;
    if (r >= g_radii[k]) {
      const double step = g_radii[k] - g_radii[k - 1];
      return double(k) + (r - g_radii[k]) / step;
    }
    const auto it = std::upper_bound(g_radii.begin(), g_radii.end(), r);
    const std::size_t j = static_cast<std::size_t>(it - g_radii.begin());
    return double(j - 1) + (r - g_radii[j - 1]) / (g_radii[j] - g_radii[j - 1]);
  }
};

CostFn CostFn::power(double p) {
  if (!(p > 0.0)) throw std::invalid_argument("power cost needs p > 0");
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::Power;
  impl->p = p;
  impl->mult = 1.0;
  return CostFn(std::move(impl));
}

CostFn CostFn::bounded_concave(double cap) {
  if (!(cap > 0.0)) throw std::invalid_argument("concave cap must be positive");
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::ConcaveCap;
  impl->slope = 1.0;
  impl->cap = cap;
  return CostFn(std::move(impl));
}

CostFn CostFn::from_samples(std::vector<double> radii, std::vector<double> values) {
  if (radii.size() != values.size() || radii.size() < 2) {
    throw std::invalid_argument("sampled cost needs matching radii/values, at least 2");
  }
  if (radii.front() != 0.0 || values.front() != 0.0) {
    throw std::invalid_argument("sampled cost must start at h(0) = 0");
  }
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (!(radii[i] > radii[i - 1])) throw std::invalid_argument("cost radii must increase");
    if (values[i] < values[i - 1]) throw std::invalid_argument("cost values must be nondecreasing");
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::Samples;
  impl->radii = std::move(radii);
  impl->values = std::move(values);
  return CostFn(std::move(impl));
}

CostFn CostFn::sampled(const std::function<double(double)>& h, double r_max) {
  if (!(r_max > 0.0)) throw std::invalid_argument("sampled cost needs r_max > 0");
  constexpr int kPoints = 4096;
  std::vector<double> r(kPoints + 1), v(kPoints + 1);
  r[0] = 0.0;
  v[0] = 0.0;
  const double r_min = r_max * 1e-6;
  const double ratio = std::log(r_max / r_min) / (kPoints - 1);
  for (int i = 1; i <= kPoints; ++i) {
    r[i] = r_min * std::exp(ratio * (i - 1));
    v[i] = h(r[i]);
  }
  return from_samples(std::move(r), std::move(v));
}

double CostFn::operator()(double r) const {
  if (!impl_) throw std::logic_error("cost function not initialized");
  if (r < 0.0) throw std::invalid_argument("cost evaluated at negative radius");
  return impl_->eval(r);
}

std::optional<double> CostFn::lipschitz_constant() const {
  const Impl* b = impl_.get();
  double factor = 1.0;
  while (b->kind == Kind::Scaled) {
    factor *= b->input_factor;
    b = b->base.get();
  }
  switch (b->kind) {
    case Kind::Power:
      if (b->p == 1.0) return b->mult * factor;
      return std::nullopt;
    case Kind::ConcaveCap:
      return b->slope * factor;
    case Kind::Samples: {
      double lip = 0.0;
      for (std::size_t i = 1; i < b->radii.size(); ++i) {
        lip = std::max(lip, (b->values[i] - b->values[i - 1]) / (b->radii[i] - b->radii[i - 1]));
      }
      return lip * factor;
    }
    case Kind::Envelope:
      return b->lip_n * factor;
    case Kind::Perturbed: {
      CostFn base_fn(b->base);
      const auto base_lip = base_fn.lipschitz_constant();
      if (!base_lip) return std::nullopt;
      const double g_slope = 1.0 / (b->g_radii[1] - b->g_radii[0]);
      return (*base_lip + b->eps * g_slope) * factor;
    }
    default:
      return std::nullopt;
  }
}

double CostFn::lipschitz_on(double r_max) const {
  const auto global = lipschitz_constant();
  if (global) return *global;
  // Nondecreasing profiles: bound the slope by a two-point secant sweep.
  double lip = 0.0;
  const int k = 512;
  double prev = impl_->eval(0.0);
  for (int i = 1; i <= k; ++i) {
    const double r = r_max * i / k;
    const double v = impl_->eval(r);
    lip = std::max(lip, (v - prev) / (r_max / k));
    prev = v;
  }
  return lip * 1.05 + 1e-12;
}

bool CostFn::bounded() const {
  const Impl* b = impl_.get();
  while (b->kind == Kind::Scaled) b = b->base.get();
  switch (b->kind) {
    case Kind::ConcaveCap:
      return true;
    case Kind::Samples:
      return b->values[b->values.size() - 1] == b->values[b->values.size() - 2];
    case Kind::Envelope:
      if (b->lip_n == 0.0) return true;
      return CostFn(b->base).bounded();
    default:
      return false;
  }
}

std::optional<double> CostFn::growth_exponent() const {
  const Impl* b = impl_.get();
  while (b->kind == Kind::Scaled) b = b->base.get();
  if (b->kind == Kind::Power) return b->p;
  return std::nullopt;
}

std::optional<double> CostFn::shrink_exponent() const {
  const Impl* b = impl_.get();
  while (b->kind == Kind::Scaled) b = b->base.get();
  if (b->kind == Kind::Power) return b->p;
  if (b->kind == Kind::ConcaveCap) return 1.0;
  return std::nullopt;
}

bool CostFn::convex() const {
  const Impl* b = impl_.get();
  while (b->kind == Kind::Scaled) b = b->base.get();
  if (b->kind == Kind::Power) return b->p >= 1.0;
  if (b->kind == Kind::Envelope) return CostFn(b->base).convex();
  return false;
}

std::string CostFn::describe() const {
  const Impl* b = impl_.get();
  switch (b->kind) {
    case Kind::Power:
      return "power:" + std::to_string(b->p);
    case Kind::ConcaveCap:
      return "concave_cap:" + std::to_string(b->cap);
    case Kind::Samples:
      return "samples";
    case Kind::Scaled:
      return CostFn(b->base).describe() + "*scaled";
    case Kind::Envelope:
      return CostFn(b->base).describe() + "^lip";
    case Kind::Perturbed:
      return CostFn(b->base).describe() + "+eps*g";
  }
  return "?";
}

CostFn rescale_cost(const CostFn& h, double s) {
  if (!h.valid()) throw std::logic_error("cost function not initialized");
  if (s == 0.0) return h;
  auto impl = std::make_shared<CostFn::Impl>();
  impl->kind = Kind::Scaled;
  impl->base = h.impl_;
  impl->input_factor = std::exp(s);
  return CostFn(std::move(impl));
}

CostFn lipschitz_approx(const CostFn& h, double n) {
  if (!h.valid()) throw std::logic_error("cost function not initialized");
  if (!(n > 0.0)) throw std::invalid_argument("lipschitz bound must be positive");

  auto impl = std::make_shared<CostFn::Impl>();
  impl->kind = Kind::Envelope;
  impl->base = h.impl_;
  impl->lip_n = n;

  // Closed-form kinds need no grid; everything else gets a swept lower
  // envelope: forward then backward pass with slope n, exact for piecewise
  // linear profiles.
  const CostFn::Impl* b = h.impl_.get();
  double factor = 1.0;
  while (b->kind == Kind::Scaled) {
    factor *= b->input_factor;
    b = b->base.get();
  }
  if (b->kind != Kind::Power && b->kind != Kind::ConcaveCap) {
    std::vector<double> r;
    if (b->kind == Kind::Samples) {
      r = b->radii;
      for (double& q : r) q /= factor;
    } else {
      const int k = 4096;
      r.resize(k + 1);
      for (int i = 0; i <= k; ++i) r[i] = 40.0 * i / k;
    }
    std::vector<double> v(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) v[i] = h.impl_->eval(r[i]);
    for (std::size_t i = 1; i < r.size(); ++i) {
      v[i] = std::min(v[i], v[i - 1] + n * (r[i] - r[i - 1]));
    }
    for (std::size_t i = r.size() - 1; i-- > 0;) {
      v[i] = std::min(v[i], v[i + 1] + n * (r[i + 1] - r[i]));
    }
    impl->radii = std::move(r);
    impl->values = std::move(v);
  }
  return CostFn(std::move(impl));
}

CostPerturbation unbounded_perturbation(const CostFn& h, double eps,
                                        const std::vector<const DiscreteMeasure*>& parts) {
  if (!h.valid()) throw std::logic_error("cost function not initialized");
  if (!(eps >= 0.0)) throw std::invalid_argument("perturbation eps must be nonnegative");
  if (parts.empty()) throw std::invalid_argument("perturbation needs at least one measure");

  auto tail_mass = [&](double r) {
    double s = 0.0;
    for (const DiscreteMeasure* mu : parts) s += mu->mass_outside_radius(r);
    return s;
  };
  double support_radius = 0.0;
  for (const DiscreteMeasure* mu : parts) {
    for (const Vec& p : mu->points()) support_radius = std::max(support_radius, p.norm());
  }

  // r_0 = 0, r_1 = 1; then the smallest radius with tail mass <= 2^-k,
  // keeping increments nondecreasing. Past the support the increments stay
  // constant.
  std::vector<double> radii = {0.0, 1.0};
  double budget = 1.0;
  while (radii.back() <= support_radius) {
    budget *= 0.5;
    const double prev_inc = radii[radii.size() - 1] - radii[radii.size() - 2];
    double next = radii.back() + prev_inc;
    while (tail_mass(next) > budget) next += prev_inc;
    radii.push_back(next);
    if (radii.size() > 4096) throw std::runtime_error("perturbation breakpoint budget exceeded");
  }

  auto impl = std::make_shared<CostFn::Impl>();
  impl->kind = Kind::Perturbed;
  impl->base = h.impl_;
  impl->eps = eps;
  impl->g_radii = radii;

  CostPerturbation out;
  out.cost = CostFn(std::move(impl));
  out.eps = eps;
  out.radii = radii;

  const CostFn::Impl* g_holder = out.cost.impl_.get();
  for (const DiscreteMeasure* mu : parts) {
    for (std::size_t i = 0; i < mu->size(); ++i) {
      out.g_integral += mu->weights()[i] * g_holder->eval_g(mu->points()[i].norm());
    }
  }
  return out;
}

std::vector<double> h_transform(const CostFn& h, const std::vector<Vec>& from_points,
                                const std::vector<double>& zeta,
                                const std::vector<Vec>& eval_points) {
  if (from_points.size() != zeta.size()) {
    throw std::invalid_argument("h_transform: zeta must match its support points");
  }
  std::vector<double> out(eval_points.size());
  for (std::size_t i = 0; i < eval_points.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < from_points.size(); ++j) {
      const double v = h(distance(eval_points[i], from_points[j])) - zeta[j];
      if (v < best) best = v;
    }
    out[i] = best;
  }
  return out;
}

}  // namespace fpot
