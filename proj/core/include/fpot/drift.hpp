#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fpot/geometry.hpp"

namespace fpot {

/// Callable vector field on R^d, d in {1, 2}.
struct VectorField {
  int dim = 1;
  std::function<Vec(const Vec&)> eval;

  Vec operator()(const Vec& x) const { return eval(x); }
};

/// Time-dependent vector field (y, s) -> R^d.
struct TimeField {
  int dim = 1;
  std::function<Vec(const Vec&, double)> eval;
  bool time_dependent = true;  // false lets solvers cache cell velocities

  Vec operator()(const Vec& x, double s) const { return eval(x, s); }

  static TimeField constant(const VectorField& f) {
    return {f.dim, [f](const Vec& x, double) { return f(x); }, false};
  }
};

/// Drift specification B together with a declared monotonicity split
/// B = A + lambda * I, where A is expected to be monotone:
/// <A(x) - A(y), x - y> >= 0.
struct DriftSpec {
  enum class Kind { Zero, Linear, GradientPower, Sign1D, Custom };

  Kind kind = Kind::Zero;
  int dim = 1;
  double lambda = 0.0;  // declared lambda-monotonicity of B

  Mat2 M;              // Linear: B(x) = M x + b (1D uses a11 only)
  Vec b;               // Linear offset
  double power = 2.0;  // GradientPower: B(x) = coeff * |x|^(p-2) x
  double coeff = 1.0;
  std::function<Vec(const Vec&)> custom;

  Vec B(const Vec& x) const;
  /// Monotone part A = B - lambda * I (minimal selection at kinks: A(0) = 0
  /// for the sign drift).
  Vec A(const Vec& x) const { return B(x) - x * lambda; }

  VectorField b_field() const;
  VectorField a_field() const;
  /// Velocity of the mass transport in the forward equation, -B.
  VectorField velocity_field() const;

  static DriftSpec zero(int dim);
  /// B(x) = lambda * x (any dim); the declared split leaves A = 0.
  static DriftSpec ou(double lambda, int dim = 1);
  /// Validates the claim against the smallest eigenvalue of (M + M^T)/2.
  static DriftSpec linear(const Mat2& m, const Vec& offset, int dim, double lambda_claim);
  /// 2D skew field B(x, y) = omega * (y, -x); lambda = 0.
  static DriftSpec rotation(double omega);
  /// 1D sign field, B(0) = 0; lambda = 0.
  static DriftSpec sign();
  /// Gradient of coeff*|x|^p / p, p >= 1, coeff > 0; lambda = 0.
  static DriftSpec gradient_power(double p, double coeff, int dim = 1);
  static DriftSpec custom_field(int dim, std::function<Vec(const Vec&)> f, double lambda_claim);

  /// Parses preset strings used by configs: "zero", "ou", "sign",
  /// "linear:a" / "linear:a;b" (1D), "linear:a11,a12,a21,a22" with optional
  /// ";b1,b2" (2D), "rotation:omega", "grad_power:p,c". The declared lambda
  /// is taken from the separate config value (used directly by "ou").
  static DriftSpec parse(const std::string& text, int dim, double lambda);
};

struct MonotonicityReport {
  bool passed = false;
  double worst_ratio = 0.0;  // min over sampled pairs of <B(x)-B(y),x-y>/|x-y|^2
  Vec witness_x, witness_y;
};

/// Samples pairs uniformly in the box [-radius, radius]^d and checks
/// <B(x) - B(y), x - y> >= (lambda - 1e-9) |x - y|^2 on every pair.
MonotonicityReport check_lambda_monotone(const VectorField& B, double lambda, int samples,
                                         double box_radius, std::uint64_t seed);

/// Resolvent J_s(x) = (I + s A)^{-1} x of a monotone field, s > 0. One
/// dimension uses bisection on the strictly increasing residual; two use a
/// damped fixed-point iteration with adaptive step size. Throws
/// "resolvent failed" when the iteration does not converge.
Vec resolvent(const VectorField& A, double s, const Vec& x,
              const Vec* guess = nullptr);

/// Yosida regularization of parameter 1/n: Y_n(x) = n (x - J_{1/n}(x)).
/// n-Lipschitz and |Y_n(x)| <= |A(x)|.
Vec yosida(const VectorField& A, double n, const Vec& x);

/// Yosida regularization of the norm-truncated operator
/// (A^{-1} + normal cone of the n-ball)^{-1}. Equals yosida() whenever that
/// value already has norm <= n; otherwise the resolvent parameter grows until
/// the output lands on the n-sphere. Monotone, n-Lipschitz, and
/// |value| <= min(|A(x)|, n).
Vec yosida_capped(const VectorField& A, double n, const Vec& x);

struct ApproxParams {
  int n = 1;        // Lipschitz / truncation level
  int m = 1;        // radial smoothing level
  double beta = 0;  // mollification amplitude, default 1/n

  static ApproxParams make(int n, int m) {
    return {n, m, 1.0 / n};
  }
};

/// Smooth bounded approximation A_n: the capped Yosida value mollified at
/// scale eta = beta / (n k), k = integral of |u| against the mollifier.
/// Satisfies |A_n(x) - Y_n(x)| <= beta and |A_n(x)| <= min(|A(x)|, n) + beta.
Vec smooth_bounded_approx(const VectorField& A, const ApproxParams& params, const Vec& x);

/// Radial smoothing of a field: integral over r in (0, 1] of field(r x)
/// against the dilated kernel theta(r^m) dr/r, normalized. First-order
/// accurate in 1/m, Lipschitz-preserving, and |D value(x) . x| stays bounded
/// by 2 m sup|field|.
Vec radial_smooth(const VectorField& field, int m, const Vec& x);

/// Field sampled on a uniform grid over [-radius, radius]^d with linear
/// (bilinear) interpolation. Queries outside the domain throw.
class TabulatedField {
 public:
  TabulatedField(const VectorField& source, int dim, double radius, int points_per_axis);
  Vec operator()(const Vec& x) const;
  VectorField field() const;
  double radius() const { return radius_; }

 private:
  int dim_;
  double radius_;
  int n_;
  std::vector<Vec> values_;
};

/// The drift approximation ladder A_{n,m} packaged for solvers and error
/// integrals: A_n is tabulated once over the domain, A_{n,m} evaluates the
/// radial smoothing against that table.
struct LadderField {
  ApproxParams params;
  double domain_radius = 0.0;
  VectorField a_n;   // mollified capped Yosida (tabulated)
  VectorField a_nm;  // radial smoothing of a_n

  Vec operator()(const Vec& x) const { return a_nm(x); }
};

LadderField build_ladder_field(const VectorField& A, const ApproxParams& params,
                               double domain_radius, int table_points_per_axis = 0);

/// Rescaled drift field A~(y, s) = e^{-lambda t(s)} A(e^{-lambda t(s)} y).
/// Throws "rescaled time out of range" when s >= s_infinity(lambda).
Vec rescaled_drift(const VectorField& A, double lambda, double s, const Vec& y);

/// The rescaled field packaged as a TimeField; lambda = 0 returns A itself.
TimeField rescaled_field(const VectorField& A, double lambda);

/// Mollifier constants for dimension d: the normalization of the unit bump
/// exp(1/(|u|^2-1)) and k = integral of |u| against the normalized bump.
double mollifier_first_moment(int dim);

}  // namespace fpot
