#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "fpot/geometry.hpp"

namespace fpot {

/// Finitely supported measure: points with nonnegative weights. Probability
/// measures (total mass 1 within 1e-12) are the common case; auxiliary mass
/// budgets (for example a sum of two probability measures) are allowed through
/// from_weighted_points with normalize=false.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;

  /// Builds a measure from raw points and weights. Exact duplicate points are
  /// merged (weights added). With normalize=true the weights are rescaled to
  /// total mass 1; otherwise the given total is kept.
  static DiscreteMeasure from_weighted_points(std::vector<Vec> points,
                                              std::vector<double> weights,
                                              int dim, bool normalize = true);

  /// Cell-center quadrature of a density on a grid: weight_i proportional to
  /// f(center_i) * cell_volume, normalized to total mass 1. Throws
  /// "degenerate density" if every sampled value vanishes.
  static DiscreteMeasure from_density(const std::function<double(const Vec&)>& f,
                                      const Grid& grid);

  int dim() const { return dim_; }
  std::size_t size() const { return points_.size(); }
  const std::vector<Vec>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }

  double total_mass() const;
  Vec mean() const;
  /// Scalar second moment about the mean, summed over axes.
  double second_moment() const;
  /// Per-axis variance (y component is zero in one dimension).
  Vec axis_variance() const;
  /// Mass at distance >= r from the origin.
  double mass_outside_radius(double r) const;

  /// Image under x -> factor * x. Factor must be positive.
  DiscreteMeasure pushforward_scale(double factor) const;
  /// Image under x -> x + shift.
  DiscreteMeasure translate(const Vec& shift) const;

  /// Columns "x,w" (1D) or "x,y,w" (2D), with a header line.
  void write_csv(std::ostream& out) const;
  void write_csv_file(const std::string& path) const;
  static DiscreteMeasure read_csv(std::istream& in);
  static DiscreteMeasure read_csv_file(const std::string& path);

 private:
  int dim_ = 1;
  std::vector<Vec> points_;
  std::vector<double> weights_;
};

struct CoarsenResult {
  DiscreteMeasure measure;
  double radius = 0.0;  // max displacement a unit of mass may have undergone
  double disp1 = 0.0;   // sum of weight * displacement over merged points
  double disp2 = 0.0;   // sum of weight * displacement^2
  double mass = 0.0;    // total mass of the input
  bool coarsened = false;
};

/// Reduces the support to at most n_max points by merging cells of a regular
/// bin lattice centered at the measure's mean; each bin collapses to its
/// weighted centroid, so mass and mean are preserved exactly.
CoarsenResult coarsen_support(const DiscreteMeasure& mu, int n_max);

/// Gaussian density helpers used by tests, the harness, and the CLI presets.
std::function<double(const Vec&)> gaussian_density_1d(double mean, double variance);
std::function<double(const Vec&)> gaussian_density_2d(const Vec& mean, double variance);

}  // namespace fpot
