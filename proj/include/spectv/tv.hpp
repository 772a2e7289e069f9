#pragma once

#include <spectv/grid.hpp>

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace spectv {

enum class TvMode { isotropic, anisotropic };

// zero_exterior: the signal continues by 0 outside the grid (models the
// whole line/plane); the solver pads one ring of pixels pinned to 0.
enum class Boundary { neumann, periodic, zero_exterior };

inline std::string to_string(TvMode m) { return m == TvMode::isotropic ? "iso" : "aniso"; }
inline std::string to_string(Boundary b) {
  switch (b) {
    case Boundary::neumann: return "neumann";
    case Boundary::periodic: return "periodic";
    case Boundary::zero_exterior: return "zero";
  }
  return "";
}

// dual_fista: projected gradient on the dual with Nesterov momentum and
// gradient-based restart. primal_dual: Chambolle-Pock with fixed steps.
// accelerated_primal_dual: Chambolle-Pock with the strongly convex step rule.
enum class TvSolver { dual_fista, primal_dual, accelerated_primal_dual };

inline std::string to_string(TvSolver s) {
  switch (s) {
    case TvSolver::dual_fista: return "fista";
    case TvSolver::primal_dual: return "pd";
    case TvSolver::accelerated_primal_dual: return "pd-accel";
  }
  return "";
}

struct TvConfig {
  TvMode mode = TvMode::isotropic;
  Boundary boundary = Boundary::neumann;
  TvSolver solver = TvSolver::dual_fista;
  int maxInnerIters = 20000;
  // bound on ||u - u*||^2 / ||f - kernel(f)||^2 certified by the duality gap
  double gapTol = 1e-8;
  // primal-dual steps; 0 picks 1/L each (fixed) or tau0 = 1 (accelerated)
  double primalStep = 0.0;
  double dualStep = 0.0;
  int checkEvery = 10;
};

// one component per grid axis, each stored on the working grid
struct DualField {
  std::vector<std::size_t> dims;
  std::vector<std::vector<double>> z;
  bool empty() const { return z.empty(); }
};

struct ProxResult {
  Grid u;
  Grid p;
  DualField z;
  int innerIters = 0;
  double gap = 0.0;  // relative duality gap at exit
  bool converged = true;
};

inline double kernel_level(const Grid& f, Boundary b) {
  return b == Boundary::zero_exterior ? 0.0 : mean(f);
}

namespace detail {

// Forward differences on the working grid. Axis 0 of a 2D grid is rows.
class TvOperator {
 public:
  TvOperator(const std::vector<std::size_t>& dims, Boundary b) : bc_(b), dims_(dims) {
    pad_ = b == Boundary::zero_exterior ? 1 : 0;
    for (auto n : dims) wd_.push_back(n + 2 * pad_);
    nd_ = wd_.size();
    R_ = nd_ == 2 ? wd_[0] : 1;
    C_ = wd_.back();
    N_ = R_ * C_;
    periodic_ = b == Boundary::periodic;
  }

  std::size_t ndim() const { return nd_; }
  std::size_t size() const { return N_; }
  const std::vector<std::size_t>& working_dims() const { return wd_; }
  double lipschitz_sq() const { return 4.0 * double(nd_); }

  std::vector<double> embed(const Grid& g) const {
    if (!pad_) return g.values;
    std::vector<double> w(N_, 0.0);
    const std::size_t r0 = nd_ == 2 ? 1 : 0, gc = g.cols();
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < gc; ++j) w[(i + r0) * C_ + j + 1] = g.values[i * gc + j];
    return w;
  }
  Grid extract(const std::vector<double>& w, double h) const {
    Grid g(dims_, h);
    if (!pad_) {
      g.values = w;
      return g;
    }
    const std::size_t r0 = nd_ == 2 ? 1 : 0, gc = g.cols();
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < gc; ++j) g.values[i * gc + j] = w[(i + r0) * C_ + j + 1];
    return g;
  }
  void pin(std::vector<double>& w) const {
    if (!pad_) return;
    if (nd_ == 1) {
      w[0] = w[C_ - 1] = 0.0;
      return;
    }
    for (std::size_t j = 0; j < C_; ++j) w[j] = w[(R_ - 1) * C_ + j] = 0.0;
    for (std::size_t i = 0; i < R_; ++i) {
      w[i * C_] = 0.0;
      w[i * C_ + C_ - 1] = 0.0;
    }
  }

  DualField zeros() const {
    DualField d;
    d.dims = wd_;
    d.z.assign(nd_, std::vector<double>(N_, 0.0));
    return d;
  }

  // g[a] = D_a u; the last axis (cols) is component nd_-1
  void grad(const std::vector<double>& u, std::vector<std::vector<double>>& g) const {
    auto& gc = g[nd_ - 1];
    for (std::size_t i = 0; i < R_; ++i) {
      const double* ur = u.data() + i * C_;
      double* gr = gc.data() + i * C_;
      for (std::size_t j = 0; j + 1 < C_; ++j) gr[j] = ur[j + 1] - ur[j];
      gr[C_ - 1] = periodic_ ? ur[0] - ur[C_ - 1] : 0.0;
    }
    if (nd_ == 2) {
      auto& gr = g[0];
      for (std::size_t i = 0; i + 1 < R_; ++i)
        for (std::size_t j = 0; j < C_; ++j) gr[i * C_ + j] = u[(i + 1) * C_ + j] - u[i * C_ + j];
      for (std::size_t j = 0; j < C_; ++j)
        gr[(R_ - 1) * C_ + j] = periodic_ ? u[j] - u[(R_ - 1) * C_ + j] : 0.0;
    }
  }

  // out = D^T z (negative divergence)
  void grad_t(const std::vector<std::vector<double>>& z, std::vector<double>& out) const {
    const auto& zc = z[nd_ - 1];
    for (std::size_t i = 0; i < R_; ++i) {
      const double* zr = zc.data() + i * C_;
      double* o = out.data() + i * C_;
      if (periodic_) {
        o[0] = zr[C_ - 1] - zr[0];
        for (std::size_t j = 1; j < C_; ++j) o[j] = zr[j - 1] - zr[j];
      } else {
        o[0] = C_ > 1 ? -zr[0] : 0.0;
        for (std::size_t j = 1; j + 1 < C_; ++j) o[j] = zr[j - 1] - zr[j];
        if (C_ > 1) o[C_ - 1] = zr[C_ - 2];
      }
    }
    if (nd_ == 2) {
      const auto& zr = z[0];
      for (std::size_t i = 0; i < R_; ++i) {
        double* o = out.data() + i * C_;
        const double* cur = zr.data() + i * C_;
        if (periodic_) {
          const double* prev = zr.data() + ((i + R_ - 1) % R_) * C_;
          for (std::size_t j = 0; j < C_; ++j) o[j] += prev[j] - cur[j];
        } else {
          const bool last = i + 1 == R_;
          const double* prev = i > 0 ? zr.data() + (i - 1) * C_ : nullptr;
          for (std::size_t j = 0; j < C_; ++j)
            o[j] += (prev ? prev[j] : 0.0) - (last ? 0.0 : cur[j]);
        }
      }
    }
  }

  double tv(const std::vector<std::vector<double>>& g, TvMode mode) const {
    double s = 0.0;
    if (nd_ == 1 || mode == TvMode::anisotropic) {
      for (const auto& c : g)
        for (double v : c) s += std::abs(v);
    } else {
      for (std::size_t i = 0; i < N_; ++i) s += std::hypot(g[0][i], g[1][i]);
    }
    return s;
  }

  void project(std::vector<std::vector<double>>& z, TvMode mode) const {
    if (nd_ == 1 || mode == TvMode::anisotropic) {
      for (auto& c : z)
        for (double& v : c) v = std::clamp(v, -1.0, 1.0);
      return;
    }
    for (std::size_t i = 0; i < N_; ++i) {
      double n2 = z[0][i] * z[0][i] + z[1][i] * z[1][i];
      if (n2 > 1.0) {
        double s = 1.0 / std::sqrt(n2);
        z[0][i] *= s;
        z[1][i] *= s;
      }
    }
  }

 private:
  Boundary bc_;
  std::vector<std::size_t> dims_, wd_;
  std::size_t pad_ = 0, nd_ = 1, R_ = 1, C_ = 1, N_ = 1;
  bool periodic_ = false;
};

inline double dot(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t i = 0; i < a[k].size(); ++i) s += a[k][i] * b[k][i];
  return s;
}

}  // namespace detail

inline double tv_value(const Grid& u, TvMode mode = TvMode::isotropic,
                       Boundary b = Boundary::neumann) {
  detail::TvOperator op(u.dims, b);
  std::vector<std::vector<double>> g(op.ndim(), std::vector<double>(op.size()));
  op.grad(op.embed(u), g);
  return op.tv(g, mode) * std::pow(u.spacing, double(u.ndim()) - 1.0);
}

inline void validate(const TvConfig& c, std::size_t ndim) {
  if (c.maxInnerIters <= 0 || !(c.gapTol > 0) || c.checkEvery <= 0)
    throw Error(Errc::validation, "TvConfig: iteration limits and gapTol must be positive");
  if (c.primalStep < 0 || c.dualStep < 0)
    throw Error(Errc::validation, "TvConfig: step sizes must be positive");
  if (c.primalStep > 0 && c.dualStep > 0 &&
      c.primalStep * c.dualStep * 4.0 * double(ndim) > 1.0 + 1e-12)
    throw Error(Errc::validation, "TvConfig: step product exceeds 1/L^2");
}

// argmin_u J(u) + 1/(2 tau) ||u - f||^2 with duality-gap stopping.
// u is the primal point recovered from the dual, so p = (f - u)/tau = D^T z / h.
inline ProxResult tv_prox(const Grid& f, double tau, const TvConfig& cfg = {},
                          const DualField* warm = nullptr) {
  if (!(tau > 0.0)) throw Error(Errc::validation, "tau must be positive");
  f.validate();
  validate(cfg, f.ndim());
  detail::TvOperator op(f.dims, cfg.boundary);
  const double h = f.spacing;
  const double ts = tau / h;  // unit-grid fidelity weight
  const std::size_t N = op.size();

  ProxResult r;
  r.z = (warm && warm->dims == op.working_dims() && warm->z.size() == op.ndim()) ? *warm : op.zeros();

  const double k0 = kernel_level(f, cfg.boundary);
  double scale = 0.0;
  for (double v : f.values) scale += (v - k0) * (v - k0);
  if (scale == 0.0) {
    r.u = f;
    r.p = like(f);
    r.z = op.zeros();
    return r;
  }

  const std::vector<double> fw = op.embed(f);
  auto& z = r.z.z;
  std::vector<double> dz(N), u(N), uold(N), ub(N);
  std::vector<std::vector<double>> g(op.ndim(), std::vector<double>(N));

  auto primal_from_dual = [&](std::vector<double>& out) {
    op.grad_t(z, dz);
    for (std::size_t i = 0; i < N; ++i) out[i] = fw[i] - ts * dz[i];
    op.pin(out);
  };
  // Certificate: for any primal v and dual z, P(v) - D(z) >= ||w - u*||^2/(2 ts)
  // for w in {v, u_z}. Reported relative to ||f - k||^2.
  std::vector<double> uz(N), dzp(N);
  auto rel_gap = [&](const std::vector<double>& v) {
    for (std::size_t i = 0; i < N; ++i) uz[i] = fw[i] - ts * dz[i];
    op.pin(uz);
    op.grad(uz, g);
    const double gz = op.tv(g, cfg.mode) - detail::dot(g, z);
    op.grad(v, g);
    dzp = dz;
    op.pin(dzp);
    double q = 0.0, fd = 0.0, dd = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      q += (v[i] - fw[i]) * (v[i] - fw[i]);
      fd += fw[i] * dzp[i];
      dd += dzp[i] * dzp[i];
    }
    const double gv = op.tv(g, cfg.mode) + q / (2.0 * ts) - fd + 0.5 * ts * dd;
    return 2.0 * ts * std::max(0.0, std::min(gz, gv)) / scale;
  };

  const double L2 = op.lipschitz_sq();
  const std::size_t K = op.ndim();
  double gap = 0.0;
  int it = 0;
  bool done = false;

  if (cfg.solver == TvSolver::dual_fista) {
    // dual: max <f, D^T z> - ts/2 ||D^T z||^2 over |z| <= 1; its gradient is D u_z
    const double step = 1.0 / (ts * L2);
    std::vector<std::vector<double>> y = z, zold = z;
    double tk = 1.0;
    primal_from_dual(u);
    gap = rel_gap(u);
    done = gap <= cfg.gapTol;
    while (!done && it < cfg.maxInnerIters) {
      ++it;
      op.grad_t(y, dz);
      for (std::size_t i = 0; i < N; ++i) ub[i] = fw[i] - ts * dz[i];
      op.pin(ub);
      op.grad(ub, g);
      zold.swap(z);
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t i = 0; i < N; ++i) z[k][i] = y[k][i] + step * g[k][i];
      op.project(z, cfg.mode);
      double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
      double sAlign = 0.0;
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t i = 0; i < N; ++i) sAlign += (y[k][i] - z[k][i]) * (z[k][i] - zold[k][i]);
      if (sAlign > 0.0) {
        tk = tn = 1.0;
        y = z;
      } else {
        const double beta = (tk - 1.0) / tn;
        for (std::size_t k = 0; k < K; ++k)
          for (std::size_t i = 0; i < N; ++i) y[k][i] = z[k][i] + beta * (z[k][i] - zold[k][i]);
      }
      tk = tn;
      if (it % cfg.checkEvery == 0 || it == cfg.maxInnerIters) {
        op.grad_t(z, dz);
        gap = rel_gap(ub);
        done = gap <= cfg.gapTol;
      }
    }
  } else {
    const bool accel = cfg.solver == TvSolver::accelerated_primal_dual;
    double tp, sg;
    if (accel) {
      tp = cfg.primalStep > 0 ? cfg.primalStep : 1.0;
      sg = cfg.dualStep > 0 ? cfg.dualStep : 1.0 / (L2 * tp);
    } else {
      tp = cfg.primalStep > 0 ? cfg.primalStep : 1.0 / std::sqrt(L2);
      sg = cfg.dualStep > 0 ? cfg.dualStep : 1.0 / std::sqrt(L2);
    }
    primal_from_dual(u);
    ub = u;
    gap = rel_gap(u);
    done = gap <= cfg.gapTol;
    while (!done && it < cfg.maxInnerIters) {
      ++it;
      op.grad(ub, g);
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t i = 0; i < N; ++i) z[k][i] += sg * g[k][i];
      op.project(z, cfg.mode);
      uold.swap(u);
      op.grad_t(z, dz);
      const double a = tp / ts;
      for (std::size_t i = 0; i < N; ++i) u[i] = (uold[i] - tp * dz[i] + a * fw[i]) / (1.0 + a);
      op.pin(u);
      double th = 1.0;
      if (accel) {
        th = 1.0 / std::sqrt(1.0 + 2.0 * tp / ts);
        tp *= th;
        sg /= th;
      }
      for (std::size_t i = 0; i < N; ++i) ub[i] = u[i] + th * (u[i] - uold[i]);
      if (it % cfg.checkEvery == 0 || it == cfg.maxInnerIters) {
        gap = rel_gap(u);
        done = gap <= cfg.gapTol;
      }
    }
  }

  primal_from_dual(u);
  r.u = op.extract(u, h);
  r.p = like(f);
  for (std::size_t i = 0; i < f.size(); ++i) r.p[i] = (f[i] - r.u[i]) / tau;
  r.innerIters = it;
  r.gap = gap;
  r.converged = done;
  return r;
}

// J = TV packaged for the generic flows
struct TvFunctional {
  TvConfig cfg;
  using Warm = DualField;

  double value(const Grid& u) const { return tv_value(u, cfg.mode, cfg.boundary); }
  double kernel_level(const Grid& f) const { return spectv::kernel_level(f, cfg.boundary); }
  ProxResult prox(const Grid& f, double tau, Warm& warm) const {
    ProxResult r = tv_prox(f, tau, cfg, warm.empty() ? nullptr : &warm);
    warm = r.z;
    return r;
  }
};

}  // namespace spectv
