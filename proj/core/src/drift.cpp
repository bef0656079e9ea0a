#include "fpot/drift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "fpot/quadrature.hpp"
#include "fpot/time_map.hpp"

namespace fpot {
namespace {

double sign_of(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

}  // namespace

Vec DriftSpec::B(const Vec& x) const {
  switch (kind) {
    case Kind::Zero:
      return {};
    case Kind::Linear:
      if (dim == 1) return {M.a11 * x.x + b.x, 0.0};
      return M.apply(x) + b;
    case Kind::GradientPower: {
      const double r = (dim == 1) ? std::abs(x.x) : x.norm();
      if (r == 0.0) return {};
      return x * (coeff * std::pow(r, power - 2.0));
    }
    case Kind::Sign1D:
      return {sign_of(x.x), 0.0};
    case Kind::Custom:
      return custom(x);
  }
  return {};
}

VectorField DriftSpec::b_field() const {
  DriftSpec self = *this;
  return {dim, [self](const Vec& x) { return self.B(x); }};
}

VectorField DriftSpec::a_field() const {
  DriftSpec self = *this;
  return {dim, [self](const Vec& x) { return self.A(x); }};
}

VectorField DriftSpec::velocity_field() const {
  DriftSpec self = *this;
  return {dim, [self](const Vec& x) { return self.B(x) * -1.0; }};
}

DriftSpec DriftSpec::zero(int dim) {
  DriftSpec d;
  d.kind = Kind::Zero;
  d.dim = dim;
  d.lambda = 0.0;
  return d;
}

DriftSpec DriftSpec::ou(double lambda, int dim) {
  DriftSpec d;
  d.kind = Kind::Linear;
  d.dim = dim;
  d.lambda = lambda;
  d.M = {lambda, 0.0, 0.0, lambda};
  d.b = {};
  return d;
}

DriftSpec DriftSpec::linear(const Mat2& m, const Vec& offset, int dim, double lambda_claim) {
  const double floor_eig = (dim == 1) ? m.a11 : m.sym_min_eig();
  if (lambda_claim > floor_eig + 1e-9) {
    throw std::invalid_argument("lambda claim exceeds field monotonicity");
  }
  DriftSpec d;
  d.kind = Kind::Linear;
  d.dim = dim;
  d.lambda = lambda_claim;
  d.M = m;
  d.b = offset;
  return d;
}

DriftSpec DriftSpec::rotation(double omega) {
  DriftSpec d;
  d.kind = Kind::Linear;
  d.dim = 2;
  d.lambda = 0.0;
  d.M = {0.0, omega, -omega, 0.0};
  d.b = {};
  return d;
}

DriftSpec DriftSpec::sign() {
  DriftSpec d;
  d.kind = Kind::Sign1D;
  d.dim = 1;
  d.lambda = 0.0;
  return d;
}

DriftSpec DriftSpec::gradient_power(double p, double coeff, int dim) {
  if (p < 1.0 || coeff <= 0.0) {
    throw std::invalid_argument("gradient power drift needs p >= 1 and coeff > 0");
  }
  DriftSpec d;
  d.kind = Kind::GradientPower;
  d.dim = dim;
  d.lambda = 0.0;
  d.power = p;
  d.coeff = coeff;
  return d;
}

DriftSpec DriftSpec::custom_field(int dim, std::function<Vec(const Vec&)> f, double lambda_claim) {
  DriftSpec d;
  d.kind = Kind::Custom;
  d.dim = dim;
  d.lambda = lambda_claim;
  d.custom = std::move(f);
  return d;
}

DriftSpec DriftSpec::parse(const std::string& text, int dim, double lambda) {
  const std::size_t colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string tail = (colon == std::string::npos) ? "" : text.substr(colon + 1);

  if (head == "zero") return zero(dim);
  if (head == "ou") return ou(lambda, dim);
  if (head == "sign") {
    if (dim != 1) throw std::invalid_argument("sign drift is one dimensional");
    return sign();
  }
  if (head == "rotation") {
    if (dim != 2) throw std::invalid_argument("rotation drift is two dimensional");
    return rotation(tail.empty() ? 1.0 : std::stod(tail));
  }
  if (head == "grad_power") {
    const auto vals = parse_number_list(tail);
    if (vals.empty()) throw std::invalid_argument("grad_power needs p[,coeff]");
    return gradient_power(vals[0], vals.size() > 1 ? vals[1] : 1.0, dim);
  }
  if (head == "linear") {
    const std::size_t semi = tail.find(';');
    const auto mv = parse_number_list(tail.substr(0, semi));
    Vec offset{};
    if (semi != std::string::npos) {
      const auto bv = parse_number_list(tail.substr(semi + 1));
      offset.x = bv.empty() ? 0.0 : bv[0];
      offset.y = bv.size() > 1 ? bv[1] : 0.0;
    }
    Mat2 m{};
    if (dim == 1) {
      if (mv.size() != 1) throw std::invalid_argument("1d linear drift needs one coefficient");
      m = {mv[0], 0.0, 0.0, mv[0]};
    } else {
      if (mv.size() != 4) throw std::invalid_argument("2d linear drift needs four coefficients");
      m = {mv[0], mv[1], mv[2], mv[3]};
    }
    return linear(m, offset, dim, lambda);
  }
  throw std::invalid_argument("unknown drift: " + text);
}

MonotonicityReport check_lambda_monotone(const VectorField& B, double lambda, int samples,
                                         double box_radius, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-box_radius, box_radius);
  auto draw = [&]() -> Vec {
    Vec v{unif(rng), 0.0};
    if (B.dim == 2) v.y = unif(rng);
    return v;
  };

  MonotonicityReport report;
  report.worst_ratio = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    Vec x = draw();
    Vec y = draw();
    double d2 = (x - y).norm2();
    if (d2 < 1e-18) continue;
    const double ratio = (B(x) - B(y)).dot(x - y) / d2;
    if (ratio < report.worst_ratio) {
      report.worst_ratio = ratio;
      report.witness_x = x;
      report.witness_y = y;
    }
  }
  report.passed = report.worst_ratio >= lambda - 1e-9;
  return report;
}

Vec resolvent(const VectorField& A, double s, const Vec& x, const Vec* guess) {
  if (!(s > 0.0)) throw std::invalid_argument("resolvent needs s > 0");

  if (A.dim == 1) {
    // Solution obeys |z - x| <= s |A(x)|, and the residual is increasing in z.
    const double slack = s * std::abs(A(x).x) + 1.0;
    double lo = x.x - slack;
    double hi = x.x + slack;
    auto residual = [&](double z) { return z + s * A(Vec{z, 0.0}).x - x.x; };
    if (residual(lo) > 0.0 || residual(hi) < 0.0) {
      throw std::runtime_error("resolvent failed");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(x.x)); ++it) {
      const double mid = 0.5 * (lo + hi);
      (residual(mid) < 0.0 ? lo : hi) = mid;
    }
    return {0.5 * (lo + hi), 0.0};
  }

  Vec z = guess ? *guess : x;
  double tau = 0.5;
  const double tol = 1e-10 * (1.0 + x.norm());
  Vec res = z + s * A(z) - x;
  double best = res.norm();
  for (int it = 0; it < 10000; ++it) {
    if (best <= tol) return z;
    const Vec trial = z - tau * res;
    const Vec trial_res = trial + s * A(trial) - x;
    const double nrm = trial_res.norm();
    if (nrm < best) {
      z = trial;
      res = trial_res;
      best = nrm;
      tau = std::min(1.0, tau * 1.2);
    } else {
      tau *= 0.5;
      if (tau < 1e-14) break;
    }
  }
  throw std::runtime_error("resolvent failed");
}

Vec yosida(const VectorField& A, double n, const Vec& x) {
  if (!(n > 0.0)) throw std::invalid_argument("yosida needs n > 0");
  return n * (x - resolvent(A, 1.0 / n, x));
}

Vec yosida_capped(const VectorField& A, double n, const Vec& x) {
  const Vec plain = yosida(A, n, x);
  const double nrm = plain.norm();
  if (nrm <= n) return plain;

  if (A.dim == 1) {
    // The truncated operator keeps the sign of the plain value in one
    // dimension, so the cap is a clamp.
    return {sign_of(plain.x) * n, 0.0};
  }

  // |Y_s(x)| is continuous and nonincreasing in s; grow s until it crosses n,
  // then bisect.
  double lo = 1.0 / n;
  double hi = 2.0 * lo;
  Vec at_hi{};
  bool bracketed = false;
  for (int it = 0; it < 200; ++it) {
    at_hi = (x - resolvent(A, hi, x)) * (1.0 / hi);
    if (at_hi.norm() <= n) {
      bracketed = true;
      break;
    }
    lo = hi;
    hi *= 2.0;
  }
  if (!bracketed) throw std::runtime_error("yosida cap failed");

  Vec value = at_hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    value = (x - resolvent(A, mid, x)) * (1.0 / mid);
    const double vn = value.norm();
    if (std::abs(vn - n) <= 1e-12 * n) break;
    (vn > n ? lo : hi) = mid;
    if (hi - lo <= 1e-15 * hi) break;
  }
  const double vn = value.norm();
  if (vn == 0.0) throw std::runtime_error("yosida cap failed");
  return value * (n / vn);
}

namespace {

struct MollifierTable {
  std::vector<Vec> nodes;      // inside the unit ball
  std::vector<double> weights; // positive, sum to one
  double first_moment = 0.0;   // sum of w |u|
};

double bump(double r2) { return r2 < 1.0 ? std::exp(1.0 / (r2 - 1.0)) : 0.0; }

MollifierTable build_mollifier_table(int dim) {
  MollifierTable t;
  if (dim == 1) {
    const GaussLegendre gl(32);
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double u = gl.nodes[i];
      t.nodes.push_back({u, 0.0});
      t.weights.push_back(gl.weights[i] * bump(u * u));
    }
  } else {
    const GaussLegendre gl(20);
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      for (std::size_t j = 0; j < gl.nodes.size(); ++j) {
        const Vec u{gl.nodes[i], gl.nodes[j]};
        const double w = gl.weights[i] * gl.weights[j] * bump(u.norm2());
        if (w > 0.0) {
          t.nodes.push_back(u);
          t.weights.push_back(w);
        }
      }
    }
  }
  double total = 0.0;
  for (double w : t.weights) total += w;
  for (double& w : t.weights) w /= total;
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    t.first_moment += t.weights[i] * t.nodes[i].norm();
  }
  return t;
}

const MollifierTable& mollifier_table(int dim) {
  static const MollifierTable one = build_mollifier_table(1);
  static const MollifierTable two = build_mollifier_table(2);
  return dim == 1 ? one : two;
}

struct RadialKernelTable {
  std::vector<double> nodes;   // in (0, 2)
  std::vector<double> weights; // positive, sum to one
};

// Peak-one bump on (0, 2): kr(y) = e^a exp(a / ((y-1)^2 - 1)) with the
// exponent solved so the total integral is one.
double radial_exponent() {
  const GaussLegendre gl(32);
  auto mass = [&](double a) {
    auto f = [&](double u) { return std::exp(a * u * u / (u * u - 1.0)); };
    return gl.integrate_composite(f, -1.0, 1.0, 4);
  };
  double lo = 1e-3;
  double hi = 1.0;
  while (mass(hi) > 1.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mass(mid) > 1.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

RadialKernelTable build_radial_table() {
  const double a = radial_exponent();
  auto kr = [&](double y) {
    const double d = (y - 1.0) * (y - 1.0) - 1.0;
    return d < 0.0 ? std::exp(a + a / d) : 0.0;
  };
  RadialKernelTable t;
  const GaussLegendre gl(32);
  const int panels = 8;
  for (int p = 0; p < panels; ++p) {
    const double a0 = 2.0 * p / panels;
    const double b0 = 2.0 * (p + 1) / panels;
    const double mid = 0.5 * (a0 + b0);
    const double half = 0.5 * (b0 - a0);
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double y = mid + half * gl.nodes[i];
      t.nodes.push_back(y);
      t.weights.push_back(half * gl.weights[i] * kr(y));
    }
  }
  double total = 0.0;
  for (double w : t.weights) total += w;
  for (double& w : t.weights) w /= total;
  return t;
}

const RadialKernelTable& radial_table() {
  static const RadialKernelTable table = build_radial_table();
  return table;
}

}  // namespace

double mollifier_first_moment(int dim) { return mollifier_table(dim).first_moment; }

Vec smooth_bounded_approx(const VectorField& A, const ApproxParams& params, const Vec& x) {
  if (params.n < 1) throw std::invalid_argument("approximation needs n >= 1");
  const double beta = params.beta > 0.0 ? params.beta : 1.0 / params.n;
  const MollifierTable& table = mollifier_table(A.dim);
  const double eta = beta / (params.n * table.first_moment);
  Vec out{};
  for (std::size_t i = 0; i < table.nodes.size(); ++i) {
    out += table.weights[i] * yosida_capped(A, params.n, x - eta * table.nodes[i]);
  }
  return out;
}

Vec radial_smooth(const VectorField& field, int m, const Vec& x) {
  if (m < 1) throw std::invalid_argument("radial smoothing needs m >= 1");
  const RadialKernelTable& table = radial_table();
  Vec out{};
  for (std::size_t i = 0; i < table.nodes.size(); ++i) {
    out += table.weights[i] * field(x * std::exp(-table.nodes[i] / m));
  }
  return out;
}

TabulatedField::TabulatedField(const VectorField& source, int dim, double radius,
                               int points_per_axis)
    : dim_(dim), radius_(radius), n_(points_per_axis) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("tabulated field needs dim 1 or 2");
  if (!(radius > 0.0) || n_ < 2) throw std::invalid_argument("tabulated field needs radius > 0 and >= 2 points");
  const double h = 2.0 * radius_ / (n_ - 1);
  if (dim_ == 1) {
    values_.resize(n_);
    for (int i = 0; i < n_; ++i) values_[i] = source(Vec{-radius_ + i * h, 0.0});
  } else {
    values_.resize(static_cast<std::size_t>(n_) * n_);
    for (int iy = 0; iy < n_; ++iy) {
      for (int ix = 0; ix < n_; ++ix) {
        values_[static_cast<std::size_t>(iy) * n_ + ix] =
            source(Vec{-radius_ + ix * h, -radius_ + iy * h});
      }
    }
  }
}

Vec TabulatedField::operator()(const Vec& x) const {
  const double margin = 1e-9 * (radius_ + 1.0);
  auto locate = [&](double c) -> std::pair<int, double> {
    if (std::abs(c) > radius_ + margin) {
      throw std::out_of_range("tabulated field query outside domain");
    }
    const double h = 2.0 * radius_ / (n_ - 1);
    double u = (std::clamp(c, -radius_, radius_) + radius_) / h;
    int i0 = std::min(n_ - 2, static_cast<int>(u));
    return {i0, u - i0};
  };
  if (dim_ == 1) {
    auto [i0, f] = locate(x.x);
    return values_[i0] * (1.0 - f) + values_[i0 + 1] * f;
  }
  auto [ix, fx] = locate(x.x);
  auto [iy, fy] = locate(x.y);
  const Vec v00 = values_[static_cast<std::size_t>(iy) * n_ + ix];
  const Vec v10 = values_[static_cast<std::size_t>(iy) * n_ + ix + 1];
  const Vec v01 = values_[static_cast<std::size_t>(iy + 1) * n_ + ix];
  const Vec v11 = values_[static_cast<std::size_t>(iy + 1) * n_ + ix + 1];
  return (v00 * (1.0 - fx) + v10 * fx) * (1.0 - fy) + (v01 * (1.0 - fx) + v11 * fx) * fy;
}

VectorField TabulatedField::field() const {
  auto self = std::make_shared<TabulatedField>(*this);
  return {dim_, [self](const Vec& x) { return (*self)(x); }};
}

LadderField build_ladder_field(const VectorField& A, const ApproxParams& params,
                               double domain_radius, int table_points_per_axis) {
  if (table_points_per_axis <= 0) {
    table_points_per_axis = (A.dim == 1) ? 8193 : 193;
  }
  ApproxParams p = params;
  if (p.beta <= 0.0) p.beta = 1.0 / p.n;

  VectorField raw{A.dim, [A, p](const Vec& x) { return smooth_bounded_approx(A, p, x); }};
  auto table = std::make_shared<TabulatedField>(raw, A.dim, domain_radius, table_points_per_axis);

  LadderField lf;
  lf.params = p;
  lf.domain_radius = domain_radius;
  lf.a_n = {A.dim, [table](const Vec& x) { return (*table)(x); }};
  const int m = p.m;
  const VectorField a_n = lf.a_n;
  lf.a_nm = {A.dim, [a_n, m](const Vec& x) { return radial_smooth(a_n, m, x); }};
  return lf;
}

Vec rescaled_drift(const VectorField& A, double lambda, double s, const Vec& y) {
  const double t = t_of_s(s, lambda);
  const double factor = std::exp(-lambda * t);
  return A(y * factor) * factor;
}

TimeField rescaled_field(const VectorField& A, double lambda) {
  if (lambda == 0.0) return TimeField::constant(A);
  return {A.dim,
          [A, lambda](const Vec& y, double s) { return rescaled_drift(A, lambda, s, y); }};
}

}  // namespace fpot
