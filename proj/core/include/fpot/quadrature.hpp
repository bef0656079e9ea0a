#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace fpot {

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence. Good to machine precision for n <= 128.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int n) {
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
      // Chebyshev-like initial guess for the i-th root.
      double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      nodes[i] = x;
      weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }

  /// Integrates f over [a, b].
  template <class F>
  double integrate(const F& f, double a, double b) const {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      s += weights[i] * f(mid + half * nodes[i]);
    }
    return s * half;
  }

  /// Integrates f over [a, b] split into `panels` equal panels.
  template <class F>
  double integrate_composite(const F& f, double a, double b, int panels) const {
    double s = 0.0;
    for (int p = 0; p < panels; ++p) {
      const double pa = a + (b - a) * p / panels;
      const double pb = a + (b - a) * (p + 1) / panels;
      s += integrate(f, pa, pb);
    }
    return s;
  }
};

}  // namespace fpot
