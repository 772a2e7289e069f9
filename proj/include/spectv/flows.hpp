#pragma once

#include <spectv/grid_io.hpp>
#include <spectv/tv.hpp>

#include <concepts>
#include <vector>

namespace spectv {

// Anything with a proximal step, a value and a constant null-space level.
template <class F>
concept ProxFunctional = requires(const F& J, const Grid& g, typename F::Warm& w) {
  { J.value(g) } -> std::convertible_to<double>;
  { J.kernel_level(g) } -> std::convertible_to<double>;
  { J.prox(g, 1.0, w).u } -> std::convertible_to<Grid>;
  { J.prox(g, 1.0, w).p } -> std::convertible_to<Grid>;
};

struct FlowOptions {
  // extinction (or, for ISS, arrival at f) relative to ||f - kernel(f)||
  double extinctTol = 1e-6;
};

struct FlowTrace {
  Method method = Method::gradient_flow;
  double dt = 1.0;
  std::vector<double> t;   // t_n = n dt, n = 0..N
  std::vector<Grid> u, p;  // snapshots, p[0] = 0
  Grid f;
  double kernel = 0.0;
  long totalInnerIters = 0;
  int maxInnerIters = 0;
  double maxGap = 0.0;
  bool converged = true;
  int extinctStep = -1;  // first padded index, -1 if none

  std::size_t steps() const { return u.empty() ? 0 : u.size() - 1; }
  const Grid& terminal() const { return u.back(); }
};

namespace detail {

template <class R>
void account(FlowTrace& tr, const R& r) {
  tr.totalInnerIters += r.innerIters;
  tr.maxInnerIters = std::max(tr.maxInnerIters, r.innerIters);
  tr.maxGap = std::max(tr.maxGap, r.gap);
  tr.converged = tr.converged && r.converged;
}

inline void check_flow_args(double dt, int nSteps, int minSteps) {
  if (!(dt > 0)) throw Error(Errc::validation, "time step must be positive");
  if (nSteps < minSteps)
    throw Error(Errc::validation, "need at least " + std::to_string(minSteps) + " steps");
}

inline FlowTrace start_trace(Method m, const Grid& f, double dt, double k, const Grid& u0) {
  FlowTrace tr;
  tr.method = m;
  tr.dt = dt;
  tr.f = f;
  tr.kernel = k;
  tr.t.push_back(0.0);
  tr.u.push_back(u0);
  tr.p.push_back(like(f));
  return tr;
}

inline void push(FlowTrace& tr, Grid u, Grid p) {
  tr.t.push_back(double(tr.u.size()) * tr.dt);
  tr.u.push_back(std::move(u));
  tr.p.push_back(std::move(p));
}

inline double dist_to(const Grid& u, const Grid& ref) { return norm2(u - ref); }
inline double dist_to(const Grid& u, double c) { return norm2(u - c); }

}  // namespace detail

// Implicit (Moreau-Yosida) steps u_{n+1} = prox_{dt J}(u_n).
template <ProxFunctional F>
FlowTrace gradient_flow(const Grid& f, double dt, int nSteps, const F& J, FlowOptions opt = {}) {
  detail::check_flow_args(dt, nSteps, 2);
  const double k = J.kernel_level(f);
  const double ref = detail::dist_to(f, k);
  FlowTrace tr = detail::start_trace(Method::gradient_flow, f, dt, k, f);
  typename F::Warm warm{};
  for (int n = 0; n < nSteps; ++n) {
    const Grid& un = tr.u.back();
    if (tr.extinctStep >= 0) {
      detail::push(tr, un, like(f));
      continue;
    }
    auto r = J.prox(un, dt, warm);
    detail::account(tr, r);
    Grid next = un;
    axpy(next, -dt, r.p);
    detail::push(tr, std::move(next), std::move(r.p));
    if (detail::dist_to(tr.u.back(), k) <= opt.extinctTol * ref) tr.extinctStep = n + 2;
  }
  return tr;
}

// u(t_n) = prox_{t_n J}(f), each sample solved directly from f.
template <ProxFunctional F>
FlowTrace variational_path(const Grid& f, double dt, int nSteps, const F& J, FlowOptions opt = {}) {
  detail::check_flow_args(dt, nSteps, 2);
  const double k = J.kernel_level(f);
  const double ref = detail::dist_to(f, k);
  FlowTrace tr = detail::start_trace(Method::variational, f, dt, k, f);
  tr.method = Method::variational;
  typename F::Warm warm{};
  for (int n = 1; n <= nSteps; ++n) {
    if (tr.extinctStep >= 0) {
      detail::push(tr, tr.u.back(), tr.p.back());
      continue;
    }
    const double tn = n * dt;
    auto r = J.prox(f, tn, warm);
    detail::account(tr, r);
    detail::push(tr, std::move(r.u), std::move(r.p));
    if (detail::dist_to(tr.u.back(), k) <= opt.extinctTol * ref) tr.extinctStep = n + 1;
  }
  return tr;
}

// Bregman iteration: u_{k+1} = argmin J(u) - <p_k,u> + ds/2 ||u-f||^2,
// p_{k+1} = p_k + ds (f - u_{k+1}). Equivalently u_{k+1} = prox_{J/ds}(f + p_k/ds),
// whose subgradient output is exactly p_{k+1}.
template <ProxFunctional F>
FlowTrace iss_flow(const Grid& f, double ds, int nSteps, const F& J, FlowOptions opt = {}) {
  detail::check_flow_args(ds, nSteps, 1);
  const double k = J.kernel_level(f);
  const double ref = detail::dist_to(f, k);
  FlowTrace tr = detail::start_trace(Method::iss, f, ds, k, like(f, k));
  typename F::Warm warm{};
  for (int n = 0; n < nSteps; ++n) {
    if (tr.extinctStep >= 0 || ref == 0.0) {
      detail::push(tr, tr.u.back(), tr.p.back());
      if (tr.extinctStep < 0) tr.extinctStep = 1;
      continue;
    }
    const Grid& pk = tr.p.back();
    Grid g = f;
    axpy(g, 1.0 / ds, pk);
    auto r = J.prox(g, 1.0 / ds, warm);
    detail::account(tr, r);
    detail::push(tr, std::move(r.u), std::move(r.p));
    if (detail::dist_to(tr.u.back(), f) <= opt.extinctTol * ref) tr.extinctStep = n + 2;
  }
  return tr;
}

inline FlowTrace gradient_flow(const Grid& f, double dt, int nSteps, const TvConfig& cfg, FlowOptions opt = {}) {
  return gradient_flow(f, dt, nSteps, TvFunctional{cfg}, opt);
}
inline FlowTrace variational_path(const Grid& f, double dt, int nSteps, const TvConfig& cfg, FlowOptions opt = {}) {
  return variational_path(f, dt, nSteps, TvFunctional{cfg}, opt);
}
inline FlowTrace iss_flow(const Grid& f, double ds, int nSteps, const TvConfig& cfg, FlowOptions opt = {}) {
  return iss_flow(f, ds, nSteps, TvFunctional{cfg}, opt);
}

// Midpoint weights on a nonuniform grid; end cells copy the neighbouring spacing.
inline std::vector<double> quadrature_weights(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> w(n, 0.0);
  if (n == 1) w[0] = x[0];
  if (n < 2) return w;
  for (std::size_t i = 1; i + 1 < n; ++i) w[i] = 0.5 * (x[i + 1] - x[i - 1]);
  w[0] = x[1] - x[0];
  w[n - 1] = x[n - 1] - x[n - 2];
  return w;
}

// phi(n) = (n/dt)(u_{n-1} + u_{n+1} - 2 u_n), n = 1..N-1; residual = u_N.
inline DecompositionArchive compute_phi(const FlowTrace& tr) {
  if (tr.method == Method::iss) throw Error(Errc::method_mismatch, "compute_phi needs a forward flow");
  if (tr.u.size() < 3) throw Error(Errc::insufficient_trace, "need at least 3 snapshots");
  DecompositionArchive a;
  a.method = tr.method;
  a.domainKind = DomainKind::wavelength;
  a.dt = tr.dt;
  a.mean = tr.kernel;
  a.residualTail = ResidualTail::right;
  const std::size_t N = tr.steps();
  for (std::size_t n = 1; n < N; ++n) {
    const double c = double(n) / tr.dt;
    Grid b = like(tr.f);
    const auto &um = tr.u[n - 1], &u0 = tr.u[n], &up = tr.u[n + 1];
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = c * (um[i] + up[i] - 2.0 * u0[i]);
    a.tGrid.push_back(double(n) * tr.dt);
    a.bands.push_back(std::move(b));
  }
  a.residual = tr.u[N];
  return a;
}

// psi(k) = (u_k - u_{k-1})/ds at s_k = k ds, k = 1..N. The residual keeps
// f - u_N shifted by the mean so reconstruction reads the same as for phi.
inline DecompositionArchive compute_psi(const FlowTrace& tr) {
  if (tr.method != Method::iss) throw Error(Errc::method_mismatch, "compute_psi needs an ISS trace");
  if (tr.u.size() < 2) throw Error(Errc::insufficient_trace, "need at least 2 snapshots");
  DecompositionArchive a;
  a.method = Method::iss;
  a.domainKind = DomainKind::frequency;
  a.dt = tr.dt;
  a.mean = tr.kernel;
  a.residualTail = ResidualTail::right;
  const std::size_t N = tr.steps();
  for (std::size_t k = 1; k <= N; ++k) {
    Grid b = like(tr.f);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = (tr.u[k][i] - tr.u[k - 1][i]) / tr.dt;
    a.tGrid.push_back(double(k) * tr.dt);
    a.bands.push_back(std::move(b));
  }
  a.residual = tr.f - tr.u[N] + tr.kernel;
  return a;
}

// Wavelength <-> frequency (s = 1/t). Bands are rescaled by the ratio of
// quadrature weights so sum_n band_n w_n is preserved bin by bin; this is
// the discrete form of psi(s) = t^2 phi(t), as ds = dt/t^2.
inline DecompositionArchive convert_domain(const DecompositionArchive& a) {
  for (double t : a.tGrid)
    if (t == 0.0) throw Error(Errc::division, "zero in tGrid");
  a.validate();
  const std::size_t N = a.tGrid.size();
  DecompositionArchive b;
  b.method = a.method;
  b.domainKind = a.domainKind == DomainKind::wavelength ? DomainKind::frequency : DomainKind::wavelength;
  b.dt = a.dt;
  b.mean = a.mean;
  b.residual = a.residual;
  b.residualTail = a.residualTail == ResidualTail::right ? ResidualTail::left : ResidualTail::right;
  for (std::size_t m = 0; m < N; ++m) b.tGrid.push_back(1.0 / a.tGrid[N - 1 - m]);
  const auto wa = quadrature_weights(a.tGrid), wb = quadrature_weights(b.tGrid);
  for (std::size_t m = 0; m < N; ++m) {
    const std::size_t n = N - 1 - m;
    b.bands.push_back((wa[n] / wb[m]) * a.bands[n]);
  }
  return b;
}

}  // namespace spectv
