#pragma once

#include <spectv/error.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

namespace spectv {

// Dense 1D/2D raster, row-major. dims = {n} or {rows, cols}.
struct Grid {
  std::vector<std::size_t> dims;
  double spacing = 1.0;
  std::vector<double> values;

  Grid() = default;
  Grid(std::vector<std::size_t> d, double h = 1.0, double fill = 0.0)
      : dims(std::move(d)), spacing(h), values(product(dims), fill) {}
  Grid(std::vector<std::size_t> d, std::vector<double> v, double h = 1.0)
      : dims(std::move(d)), spacing(h), values(std::move(v)) {
    validate();
  }

  static std::size_t product(const std::vector<std::size_t>& d) {
    std::size_t n = 1;
    for (auto k : d) n *= k;
    return d.empty() ? 0 : n;
  }

  std::size_t size() const { return values.size(); }
  std::size_t ndim() const { return dims.size(); }
  std::size_t rows() const { return dims.size() == 2 ? dims[0] : 1; }
  std::size_t cols() const { return dims.back(); }

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }

  // quadrature weight of one sample
  double cell() const { return std::pow(spacing, static_cast<double>(ndim())); }

  bool same_shape(const Grid& o) const { return dims == o.dims; }

  void validate() const {
    if (dims.empty() || dims.size() > 2)
      throw Error(Errc::shape, "grid must be 1D or 2D");
    for (auto k : dims)
      if (k == 0) throw Error(Errc::shape, "zero-length dimension");
    if (values.size() != product(dims))
      throw Error(Errc::shape, "value count does not match dims");
    if (!(spacing > 0.0) || !std::isfinite(spacing))
      throw Error(Errc::validation, "spacing must be positive");
    for (double v : values)
      if (!std::isfinite(v)) throw Error(Errc::validation, "non-finite sample");
  }

  bool operator==(const Grid& o) const {
    return dims == o.dims && spacing == o.spacing && values == o.values;
  }
};

inline Grid like(const Grid& g, double fill = 0.0) { return Grid(g.dims, g.spacing, fill); }

inline void require_same_shape(const Grid& a, const Grid& b) {
  if (!a.same_shape(b)) throw Error(Errc::shape, "grid dims differ");
}

template <class F>
Grid map(const Grid& a, F&& f) {
  Grid r = like(a);
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = f(a[i]);
  return r;
}

template <class F>
Grid zip(const Grid& a, const Grid& b, F&& f) {
  require_same_shape(a, b);
  Grid r = like(a);
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = f(a[i], b[i]);
  return r;
}

inline Grid operator+(const Grid& a, const Grid& b) { return zip(a, b, std::plus<>{}); }
inline Grid operator-(const Grid& a, const Grid& b) { return zip(a, b, std::minus<>{}); }
inline Grid operator*(double s, const Grid& a) {
  return map(a, [s](double v) { return s * v; });
}
inline Grid operator+(const Grid& a, double c) {
  return map(a, [c](double v) { return v + c; });
}
inline Grid operator-(const Grid& a, double c) { return a + (-c); }

inline Grid& axpy(Grid& y, double a, const Grid& x) {
  require_same_shape(y, x);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
  return y;
}

inline double sum(const Grid& a) { return std::accumulate(a.values.begin(), a.values.end(), 0.0); }
inline double mean(const Grid& a) { return a.size() ? sum(a) / double(a.size()) : 0.0; }

// L2 inner product with the h^d quadrature weight
inline double dot(const Grid& a, const Grid& b) {
  require_same_shape(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * a.cell();
}
inline double norm2(const Grid& a) { return std::sqrt(dot(a, a)); }
inline double norm1(const Grid& a) {
  double s = 0.0;
  for (double v : a.values) s += std::abs(v);
  return s * a.cell();
}
inline double norm_inf(const Grid& a) {
  double m = 0.0;
  for (double v : a.values) m = std::max(m, std::abs(v));
  return m;
}
inline double max_abs_diff(const Grid& a, const Grid& b) {
  require_same_shape(a, b);
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}
inline double rel_l2(const Grid& a, const Grid& ref) {
  double d = norm2(a - ref), n = norm2(ref);
  return n > 0 ? d / n : d;
}

inline Grid make_1d(std::vector<double> v, double h = 1.0) {
  std::size_t n = v.size();
  return Grid({n}, std::move(v), h);
}

// circular shift by (dr, dc) samples; 1D uses dc only
inline Grid circshift(const Grid& a, long dr, long dc) {
  Grid r = like(a);
  const long R = long(a.rows()), C = long(a.cols());
  for (long i = 0; i < R; ++i)
    for (long j = 0; j < C; ++j) {
      long ii = ((i + dr) % R + R) % R, jj = ((j + dc) % C + C) % C;
      r.values[std::size_t(ii * C + jj)] = a.values[std::size_t(i * C + j)];
    }
  return r;
}

}  // namespace spectv
