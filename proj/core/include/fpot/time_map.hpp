#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fpot {

/// Rescaled time s(t) = (e^{2 lambda t} - 1) / (2 lambda); the identity at
/// lambda = 0.
inline double s_of_t(double t, double lambda) {
  if (lambda == 0.0) return t;
  return std::expm1(2.0 * lambda * t) / (2.0 * lambda);
}

/// Horizon of the rescaled clock: +infinity for lambda >= 0, -1/(2 lambda)
/// otherwise.
inline double s_infinity(double lambda) {
  if (lambda >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / (2.0 * lambda);
}

/// Inverse of s_of_t. Throws when s falls outside [0, s_infinity).
inline double t_of_s(double s, double lambda) {
  if (s < 0.0) throw std::invalid_argument("rescaled time out of range");
  if (lambda == 0.0) return s;
  const double arg = 1.0 + 2.0 * lambda * s;
  if (!(arg > 0.0)) throw std::invalid_argument("rescaled time out of range");
  return std::log1p(2.0 * lambda * s) / (2.0 * lambda);
}

}  // namespace fpot
