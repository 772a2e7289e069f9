#pragma once

#include <spectv/grid_io.hpp>
#include <spectv/tv.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace spectv {

struct PiecewiseConstantEF {
  std::vector<double> breakpoints;  // x_0 < ... < x_n
  std::vector<double> heights;      // h_0 .. h_{n-1}
  double lambda = 1.0;
  bool bounded = false;

  std::vector<double> widths() const {
    std::vector<double> w;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) w.push_back(breakpoints[i + 1] - breakpoints[i]);
    return w;
  }
};

// samples cover [0, samples*spacing); sample i holds the value on [i h, (i+1) h)
struct Domain1d {
  std::size_t samples = 256;
  double spacing = 1.0;
  double length() const { return double(samples) * spacing; }
};

struct EigenGrid {
  Grid grid;
  double lambda = 0.0;
  PiecewiseConstantEF ef;
  bool snapped = false;  // a breakpoint was moved onto the sample lattice
};

namespace detail {

inline long snap(double x, double h, bool& moved) {
  const double q = x / h;
  const long k = std::lround(q);
  if (std::abs(q - double(k)) > 1e-9) moved = true;
  return k;
}

inline void check_increasing(const std::vector<double>& x) {
  if (x.size() < 2) throw Error(Errc::validation, "need at least two breakpoints");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) throw Error(Errc::validation, "breakpoints must be strictly increasing");
}

}  // namespace detail

// heights 2 a_i (-1)^i/(lambda w_i); a_i = 1/2 on the two pieces that touch
// the ends of a bounded domain, 1 elsewhere
inline std::vector<double> chain_heights(double lambda, const std::vector<double>& x, bool bounded) {
  detail::check_increasing(x);
  if (!(lambda > 0)) throw Error(Errc::validation, "lambda must be positive");
  const std::size_t n = x.size() - 1;
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = bounded && (i == 0 || i + 1 == n) ? 0.5 : 1.0;
    h[i] = 2.0 * a * (i % 2 ? -1.0 : 1.0) / (lambda * (x[i + 1] - x[i]));
  }
  return h;
}

inline Grid rasterize(const PiecewiseConstantEF& ef, const Domain1d& dom) {
  Grid g({dom.samples}, dom.spacing);
  for (std::size_t i = 0; i < dom.samples; ++i) {
    const double c = (double(i) + 0.5) * dom.spacing;
    for (std::size_t k = 0; k + 1 < ef.breakpoints.size(); ++k)
      if (c >= ef.breakpoints[k] && c < ef.breakpoints[k + 1]) g[i] = ef.heights[k];
  }
  return g;
}

inline EigenGrid piecewise_ef(double lambda, std::vector<double> x, bool bounded, const Domain1d& dom) {
  detail::check_increasing(x);
  EigenGrid out;
  for (double& v : x) v = double(detail::snap(v, dom.spacing, out.snapped)) * dom.spacing;
  detail::check_increasing(x);
  const double L = dom.length();
  if (x.front() < 0 || x.back() > L * (1 + 1e-12))
    throw Error(Errc::geometry, "breakpoints outside the domain");
  if (bounded && (std::abs(x.front()) > 1e-12 * L || std::abs(x.back() - L) > 1e-9 * L))
    throw Error(Errc::geometry, "bounded chain must start and end at the domain ends");
  out.ef = {x, chain_heights(lambda, x, bounded), lambda, bounded};
  out.lambda = lambda;
  out.grid = rasterize(out.ef, dom);
  return out;
}

// h B_w(x - x0), lambda = 2/(h w); needs zero samples on both sides
inline EigenGrid single_peak(double h, double w, double x0, const Domain1d& dom) {
  if (!(h > 0) || !(w > 0)) throw Error(Errc::validation, "height and width must be positive");
  if (!(x0 > 0) || !(x0 + w < dom.length()))
    throw Error(Errc::geometry, "peak touches the domain boundary; use a bounded chain");
  EigenGrid e = piecewise_ef(2.0 / (h * w), {x0, x0 + w}, false, dom);
  return e;
}

inline double haar_lambda(int n) { return std::pow(2.0, 2.0 + 0.5 * n); }

// psi_{n,k}(x) = 2^{n/2} psi(2^n x - k) on a domain of unit length units;
// as a chain: widths 2^{-(n+1)}, heights +-2^{n/2}
inline EigenGrid haar_atom(int n, long k, const Domain1d& dom) {
  if (n < 0 || k < 0) throw Error(Errc::validation, "haar indices must be >= 0");
  const double w = std::ldexp(1.0, -(n + 1));
  const double x0 = double(k) * 2.0 * w;
  if (x0 + 2 * w > dom.length() * (1 + 1e-12)) throw Error(Errc::geometry, "haar support exceeds domain");
  const double q = w / dom.spacing;
  if (std::abs(q - std::round(q)) > 1e-9 || q < 1)
    throw Error(Errc::geometry, "haar atom not dyadically aligned with the grid");
  return piecewise_ef(haar_lambda(n), {x0, x0 + w, x0 + 2 * w}, false, dom);
}

struct DiskGrid {
  Grid grid;
  double lambda = 0.0;
};

// pixel-centre membership; centre in pixel units (x = col, y = row)
inline DiskGrid disk_indicator(double r, double cx, double cy, std::size_t rows, std::size_t cols,
                               double spacing = 1.0) {
  if (r < 4) throw Error(Errc::geometry, "disk radius must be at least 4 pixels");
  if (cx - r <= 0 || cy - r <= 0 || cx + r >= double(cols) || cy + r >= double(rows))
    throw Error(Errc::geometry, "disk touches the domain boundary");
  DiskGrid d;
  d.grid = Grid({rows, cols}, spacing);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      const double x = double(j) + 0.5 - cx, y = double(i) + 0.5 - cy;
      if (x * x + y * y <= r * r) d.grid.at(i, j) = 1.0;
    }
  d.lambda = 2.0 / (r * spacing);
  return d;
}

enum class ShapeKind { disk, ellipse, stadium, parametric };

// Analytic convex shape. ellipse: semi-axes a >= b. stadium: rectangle of
// length `a` capped by half-disks of radius `b`. parametric: sampled
// curvature with perimeter/area supplied.
struct ShapeSpec {
  ShapeKind kind = ShapeKind::disk;
  double a = 1.0;
  double b = 1.0;
  std::vector<double> curvature;
  double perimeter = 0.0, area = 0.0;
};

struct ShapeCheck {
  bool valid = false;
  double lambda = 0.0;
  double maxCurvature = 0.0;
  std::string reason;
};

inline ShapeSpec disk_shape(double r) { return {ShapeKind::disk, r, r, {}, 0, 0}; }
inline ShapeSpec ellipse_shape(double a, double b) { return {ShapeKind::ellipse, std::max(a, b), std::min(a, b), {}, 0, 0}; }
inline ShapeSpec stadium_shape(double len, double rho) { return {ShapeKind::stadium, len, rho, {}, 0, 0}; }

// calibrable (convex case) iff ess sup curvature <= P/A
inline ShapeCheck convex_shape_check(const ShapeSpec& s) {
  constexpr double pi = std::numbers::pi;
  double P = 0, A = 0, kmax = 0;
  ShapeCheck out;
  switch (s.kind) {
    case ShapeKind::disk:
      if (!(s.a > 0)) throw Error(Errc::validation, "radius must be positive");
      P = 2 * pi * s.a;
      A = pi * s.a * s.a;
      kmax = 1.0 / s.a;
      break;
    case ShapeKind::ellipse: {
      if (!(s.b > 0)) throw Error(Errc::validation, "semi-axes must be positive");
      const double e = std::sqrt(1.0 - (s.b * s.b) / (s.a * s.a));
      P = 4.0 * s.a * std::comp_ellint_2(e);
      A = pi * s.a * s.b;
      kmax = s.a / (s.b * s.b);
      break;
    }
    case ShapeKind::stadium:
      if (!(s.a >= 0) || !(s.b > 0)) throw Error(Errc::validation, "bad stadium dimensions");
      P = 2.0 * s.a + 2.0 * pi * s.b;
      A = 2.0 * s.b * s.a + pi * s.b * s.b;
      kmax = 1.0 / s.b;
      break;
    case ShapeKind::parametric:
      if (s.curvature.empty() || !(s.perimeter > 0) || !(s.area > 0))
        throw Error(Errc::validation, "parametric shape needs curvature samples, P and A");
      P = s.perimeter;
      A = s.area;
      kmax = *std::max_element(s.curvature.begin(), s.curvature.end());
      if (*std::min_element(s.curvature.begin(), s.curvature.end()) < 0) {
        out.lambda = P / A;
        out.maxCurvature = kmax;
        out.reason = "not convex";
        return out;
      }
      break;
  }
  out.lambda = P / A;
  out.maxCurvature = kmax;
  out.valid = kmax <= out.lambda * (1 + 1e-12);
  if (!out.valid) out.reason = "too elongated";
  return out;
}

struct EigenCheck {
  double lambdaEst = 0.0;
  double maxRelDeviation = 0.0;
  int iterations = 0;
  double gap = 0.0;
  bool converged = true;
  std::size_t supportSize = 0;
};

// p = (u - prox(u, tau).u)/tau, ratios p/u on {|u| > 0.1 ||u||_inf}.
// tau <= 0 picks 0.01 ||u||^2/J(u), i.e. 0.01/lambda for an eigenfunction.
inline EigenCheck verify_eigenfunction(const Grid& u, const TvConfig& cfg, double tau = 0.0) {
  const double J = tv_value(u, cfg.mode, cfg.boundary);
  if (J == 0.0) throw Error(Errc::precondition, "u is constant (in the null space)");
  if (!(tau > 0)) tau = 0.01 * dot(u, u) / J;
  ProxResult r = tv_prox(u, tau, cfg);
  const double thr = 0.1 * norm_inf(u);
  std::vector<double> ratio;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (std::abs(u[i]) > thr) ratio.push_back(r.p[i] / u[i]);
  EigenCheck c;
  c.iterations = r.innerIters;
  c.gap = r.gap;
  c.converged = r.converged;
  c.supportSize = ratio.size();
  std::vector<double> s = ratio;
  std::sort(s.begin(), s.end());
  const std::size_t m = s.size();
  c.lambdaEst = m % 2 ? s[m / 2] : 0.5 * (s[m / 2 - 1] + s[m / 2]);
  for (double q : ratio) c.maxRelDeviation = std::max(c.maxRelDeviation, std::abs(q - c.lambdaEst) / std::abs(c.lambdaEst));
  return c;
}

inline double rayleigh_quotient(const Grid& u, TvMode mode = TvMode::isotropic,
                                Boundary b = Boundary::neumann) {
  const double J = tv_value(u, mode, b);
  if (J == 0.0) throw Error(Errc::degenerate_input, "u is in the null space of J");
  return J * J / dot(u, u);
}

inline void write_ef_csv(const PiecewiseConstantEF& ef, const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw Error(Errc::io, "cannot write " + p.string());
  out << "lambda=" << detail::fmt(ef.lambda) << " bounded=" << (ef.bounded ? 1 : 0) << '\n';
  for (double x : ef.breakpoints) out << detail::fmt(x) << '\n';
}

inline PiecewiseConstantEF read_ef_csv(const std::filesystem::path& p) {
  std::istringstream in(detail::read_file(p));
  std::string line;
  PiecewiseConstantEF ef;
  bool header = false;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (!header) {
      std::istringstream hs(line[0] == '#' ? line.substr(1) : line);
      std::string kv;
      bool gotLambda = false;
      while (hs >> kv) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        auto k = kv.substr(0, eq), v = kv.substr(eq + 1);
        if (k == "lambda") {
          ef.lambda = detail::parse_double(v, lineNo);
          gotLambda = true;
        } else if (k == "bounded") {
          ef.bounded = v == "1";
        }
      }
      if (!gotLambda) throw Error(Errc::malformed_input, "line 1: expected 'lambda=<v> bounded=<0|1>'");
      header = true;
      continue;
    }
    ef.breakpoints.push_back(detail::parse_double(line, lineNo));
  }
  ef.heights = chain_heights(ef.lambda, ef.breakpoints, ef.bounded);
  return ef;
}

}  // namespace spectv
