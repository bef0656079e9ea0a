#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace fpot {

/// Point or vector in one or two dimensions. One-dimensional data leaves y at
/// zero; the ambient dimension is tracked by the owning object (Grid, measure,
/// field), not by the vector itself.
struct Vec {
  double x = 0.0;
  double y = 0.0;

  Vec() = default;
  Vec(double x_, double y_ = 0.0) : x(x_), y(y_) {}

  Vec operator+(const Vec& o) const { return {x + o.x, y + o.y}; }
  Vec operator-(const Vec& o) const { return {x - o.x, y - o.y}; }
  Vec operator*(double s) const { return {x * s, y * s}; }
  Vec& operator+=(const Vec& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  double dot(const Vec& o) const { return x * o.x + y * o.y; }
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
};

inline Vec operator*(double s, const Vec& v) { return v * s; }

inline double distance(const Vec& a, const Vec& b) { return (a - b).norm(); }

/// 2x2 matrix, row major.
struct Mat2 {
  double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

  Vec apply(const Vec& v) const {
    return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y};
  }

  /// Smallest eigenvalue of the symmetric part (M + M^T)/2.
  double sym_min_eig() const {
    const double s11 = a11;
    const double s22 = a22;
    const double s12 = 0.5 * (a12 + a21);
    const double tr = s11 + s22;
    const double disc = std::sqrt(0.25 * (s11 - s22) * (s11 - s22) + s12 * s12);
    return 0.5 * tr - disc;
  }
};

/// Uniform cell grid on the box [-L, L]^d, d in {1, 2}. Cell centers sit at
/// -L + (i + 1/2) * spacing per axis. In two dimensions the flat index is
/// iy * cells_per_axis + ix.
class Grid {
 public:
  Grid(int dim, double half_extent, int cells_per_axis)
      : dim_(dim), half_extent_(half_extent), n_(cells_per_axis) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("grid dimension must be 1 or 2");
    if (!(half_extent > 0.0)) throw std::invalid_argument("grid half extent must be positive");
    if (n_ < 2) throw std::invalid_argument("grid needs at least 2 cells per axis");
  }

  int dim() const { return dim_; }
  double half_extent() const { return half_extent_; }
  int cells_per_axis() const { return n_; }
  double spacing() const { return 2.0 * half_extent_ / n_; }
  double cell_volume() const { return dim_ == 1 ? spacing() : spacing() * spacing(); }
  int cell_count() const { return dim_ == 1 ? n_ : n_ * n_; }

  double axis_center(int i) const { return -half_extent_ + (i + 0.5) * spacing(); }

  Vec center(int flat) const {
    if (dim_ == 1) return {axis_center(flat), 0.0};
    return {axis_center(flat % n_), axis_center(flat / n_)};
  }

  int flat_index(int ix, int iy = 0) const { return dim_ == 1 ? ix : iy * n_ + ix; }

  std::vector<Vec> centers() const {
    std::vector<Vec> c(cell_count());
    for (int i = 0; i < cell_count(); ++i) c[i] = center(i);
    return c;
  }

  /// True if v lies strictly inside the box shrunk by `margin` on every side.
  bool contains(const Vec& v, double margin = 0.0) const {
    const double lim = half_extent_ - margin;
    if (std::abs(v.x) >= lim) return false;
    if (dim_ == 2 && std::abs(v.y) >= lim) return false;
    return true;
  }

  /// Axis cell index for a coordinate, clamped to the valid range.
  int axis_cell(double c) const {
    int i = static_cast<int>(std::floor((c + half_extent_) / spacing()));
    if (i < 0) i = 0;
    if (i >= n_) i = n_ - 1;
    return i;
  }

 private:
  int dim_;
  double half_extent_;
  int n_;
};

}  // namespace fpot
