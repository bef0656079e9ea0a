#include "fpot/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <utility>

namespace fpot {

namespace {

void validate_weights(const std::vector<double>& w) {
  for (double v : w) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("measure weights must be finite and nonnegative");
    }
  }
}

}  // namespace

DiscreteMeasure DiscreteMeasure::from_weighted_points(std::vector<Vec> points,
                                                      std::vector<double> weights,
                                                      int dim, bool normalize) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("measure dimension must be 1 or 2");
  if (points.size() != weights.size()) {
    throw std::invalid_argument("points and weights must have equal length");
  }
  if (points.empty()) throw std::invalid_argument("measure needs at least one support point");
  validate_weights(weights);

  // Merge exact duplicates so support points stay pairwise distinct.
  std::map<std::pair<double, double>, double> merged;
  for (std::size_t i = 0; i < points.size(); ++i) {
    merged[{points[i].x, dim == 2 ? points[i].y : 0.0}] += weights[i];
  }

  DiscreteMeasure mu;
  mu.dim_ = dim;
  mu.points_.reserve(merged.size());
  mu.weights_.reserve(merged.size());
  double total = 0.0;
  for (const auto& [p, w] : merged) {
    mu.points_.push_back({p.first, p.second});
    mu.weights_.push_back(w);
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("measure has zero total mass");
  if (normalize) {
    for (double& w : mu.weights_) w /= total;
  }
  return mu;
}

DiscreteMeasure DiscreteMeasure::from_density(const std::function<double(const Vec&)>& f,
                                              const Grid& grid) {
  const int count = grid.cell_count();
  std::vector<Vec> pts(count);
  std::vector<double> w(count);
  double total = 0.0;
  for (int i = 0; i < count; ++i) {
    pts[i] = grid.center(i);
    const double v = f(pts[i]);
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("density must be finite and nonnegative");
    }
    w[i] = v * grid.cell_volume();
    total += w[i];
  }
  if (!(total > 0.0)) throw std::invalid_argument("degenerate density");

  DiscreteMeasure mu;
  mu.dim_ = grid.dim();
  mu.points_ = std::move(pts);
  for (double& v : w) v /= total;
  mu.weights_ = std::move(w);
  return mu;
}

double DiscreteMeasure::total_mass() const {
  return std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

Vec DiscreteMeasure::mean() const {
  Vec m;
  for (std::size_t i = 0; i < points_.size(); ++i) m += points_[i] * weights_[i];
  const double total = total_mass();
  return m * (1.0 / total);
}

double DiscreteMeasure::second_moment() const {
  const Vec m = mean();
  double s = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    s += weights_[i] * (points_[i] - m).norm2();
  }
  return s / total_mass();
}

Vec DiscreteMeasure::axis_variance() const {
  const Vec m = mean();
  Vec v;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const Vec d = points_[i] - m;
    v.x += weights_[i] * d.x * d.x;
    v.y += weights_[i] * d.y * d.y;
  }
  const double total = total_mass();
  return {v.x / total, v.y / total};
}

double DiscreteMeasure::mass_outside_radius(double r) const {
  double s = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (points_[i].norm() >= r) s += weights_[i];
  }
  return s;
}

DiscreteMeasure DiscreteMeasure::pushforward_scale(double factor) const {
  if (!(factor > 0.0)) throw std::invalid_argument("pushforward factor must be positive");
  DiscreteMeasure out = *this;
  for (Vec& p : out.points_) p = p * factor;
  return out;
}

DiscreteMeasure DiscreteMeasure::translate(const Vec& shift) const {
  DiscreteMeasure out = *this;
  for (Vec& p : out.points_) p += shift;
  return out;
}

void DiscreteMeasure::write_csv(std::ostream& out) const {
  char buf[96];
  out << (dim_ == 1 ? "x,w\n" : "x,y,w\n");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (dim_ == 1) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", points_[i].x, weights_[i]);
    } else {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", points_[i].x, points_[i].y,
                    weights_[i]);
    }
    out << buf;
  }
}

void DiscreteMeasure::write_csv_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_csv(out);
}

DiscreteMeasure DiscreteMeasure::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty measure csv");
  int dim;
  if (line == "x,w") {
    dim = 1;
  } else if (line == "x,y,w") {
    dim = 2;
  } else {
    throw std::invalid_argument("measure csv header must be 'x,w' or 'x,y,w'");
  }

  std::vector<Vec> pts;
  std::vector<double> w;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    Vec p;
    double wi;
    if (dim == 1) {
      if (!(row >> p.x >> wi)) throw std::invalid_argument("bad measure csv row: " + line);
    } else {
      if (!(row >> p.x >> p.y >> wi)) throw std::invalid_argument("bad measure csv row: " + line);
    }
    pts.push_back(p);
    w.push_back(wi);
  }
  return from_weighted_points(std::move(pts), std::move(w), dim, /*normalize=*/false);
}

DiscreteMeasure DiscreteMeasure::read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open measure csv: " + path);
  return read_csv(in);
}

CoarsenResult coarsen_support(const DiscreteMeasure& mu, int n_max) {
  if (n_max < 1) throw std::invalid_argument("coarsening budget must be positive");
  if (static_cast<int>(mu.size()) <= n_max) {
    CoarsenResult res;
    res.measure = mu;
    res.mass = mu.total_mass();
    return res;
  }

  const Vec c = mu.mean();
  double extent = 0.0;
  for (const Vec& p : mu.points()) {
    extent = std::max(extent, std::abs(p.x - c.x));
    if (mu.dim() == 2) extent = std::max(extent, std::abs(p.y - c.y));
  }
  extent = std::max(extent, 1e-300);

  // Grow the bin size until the occupied bins fit the budget. Bins are
  // centered on the mean so congruent measures coarsen congruently.
  const double d = mu.dim();
  double bin = 2.0 * extent / std::max(1.0, std::floor(std::pow(double(n_max), 1.0 / d)));
  for (int iter = 0; iter < 64; ++iter) {
    std::map<std::pair<long long, long long>, std::pair<Vec, double>> bins;
    auto key = [&](const Vec& p) {
      const long long ix = llround(std::floor((p.x - c.x) / bin + 0.5));
      const long long iy =
          mu.dim() == 2 ? llround(std::floor((p.y - c.y) / bin + 0.5)) : 0;
      return std::make_pair(ix, iy);
    };
    bool fits = true;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      auto& slot = bins[key(mu.points()[i])];
      slot.first += mu.points()[i] * mu.weights()[i];
      slot.second += mu.weights()[i];
      if (static_cast<int>(bins.size()) > n_max) {
        fits = false;
        break;
      }
    }
    if (fits) {
      std::vector<Vec> pts;
      std::vector<double> w;
      pts.reserve(bins.size());
      for (const auto& [k, slot] : bins) {
        (void)k;
        if (slot.second <= 0.0) continue;
        pts.push_back(slot.first * (1.0 / slot.second));
        w.push_back(slot.second);
      }
      CoarsenResult res;
      res.radius = 0.5 * bin * std::sqrt(d);
      res.coarsened = true;
      for (std::size_t i = 0; i < mu.size(); ++i) {
        const auto& slot = bins[key(mu.points()[i])];
        if (slot.second <= 0.0) continue;
        const double delta = distance(mu.points()[i], slot.first * (1.0 / slot.second));
        res.disp1 += mu.weights()[i] * delta;
        res.disp2 += mu.weights()[i] * delta * delta;
        res.mass += mu.weights()[i];
      }
      res.measure = DiscreteMeasure::from_weighted_points(std::move(pts), std::move(w),
                                                          mu.dim(), /*normalize=*/false);
      return res;
    }
    bin *= 1.5;
  }
  throw std::runtime_error("support coarsening failed to meet budget");
}

std::function<double(const Vec&)> gaussian_density_1d(double mean, double variance) {
  if (!(variance > 0.0)) throw std::invalid_argument("gaussian variance must be positive");
  return [mean, variance](const Vec& p) {
    const double d = p.x - mean;
    return std::exp(-0.5 * d * d / variance);
  };
}

std::function<double(const Vec&)> gaussian_density_2d(const Vec& mean, double variance) {
  if (!(variance > 0.0)) throw std::invalid_argument("gaussian variance must be positive");
  return [mean, variance](const Vec& p) {
    return std::exp(-0.5 * (p - mean).norm2() / variance);
  };
}

}  // namespace fpot
