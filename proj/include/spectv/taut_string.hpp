#pragma once

#include <spectv/grid.hpp>

#include <vector>

namespace spectv {

// Exact 1D ROF (Neumann ends): argmin_u sum|u_{k+1}-u_k| + 1/(2 lam) sum (u-y)^2.
// Direct taut-string scan in the form given by Condat (2013).
inline std::vector<double> taut_string_1d(const std::vector<double>& y, double lam) {
  const long n = long(y.size());
  std::vector<double> x(y.size());
  if (n == 0) return x;
  if (lam <= 0) return y;
  long k = 0, k0 = 0, kmin = 0, kplus = 0;
  double vmin = y[0] - lam, vmax = y[0] + lam;
  double umin = lam, umax = -lam;
  for (;;) {
    while (k == n - 1) {
      if (umin < 0.0) {
        do x[k0++] = vmin; while (k0 <= kmin);
        k = kmin = k0;
        vmin = y[k];
        umin = lam;
        umax = vmin + umin - vmax;
      } else if (umax > 0.0) {
        do x[k0++] = vmax; while (k0 <= kplus);
        k = kplus = k0;
        vmax = y[k];
        umax = -lam;
        umin = vmax + umax - vmin;
      } else {
        vmin += umin / double(k - k0 + 1);
        do x[k0++] = vmin; while (k0 <= k);
        return x;
      }
    }
    umin += y[k + 1] - vmin;
    if (umin < -lam) {
      do x[k0++] = vmin; while (k0 <= kmin);
      k = kmin = kplus = k0;
      vmin = y[k];
      vmax = vmin + 2.0 * lam;
      umin = lam;
      umax = -lam;
    } else {
      umax += y[k + 1] - vmax;
      if (umax > lam) {
        do x[k0++] = vmax; while (k0 <= kplus);
        k = kmin = kplus = k0;
        vmax = y[k];
        vmin = vmax - 2.0 * lam;
        umin = lam;
        umax = -lam;
      } else {
        ++k;
        if (umin >= lam) {
          kmin = k;
          vmin += (umin - lam) / double(kmin - k0 + 1);
          umin = lam;
        }
        if (umax <= -lam) {
          kplus = k;
          vmax += (umax + lam) / double(kplus - k0 + 1);
          umax = -lam;
        }
      }
    }
  }
}

// Grid wrapper; tau is the physical fidelity weight, as in tv_prox.
inline Grid taut_string_rof_1d(const Grid& f, double tau) {
  if (f.ndim() != 1) throw Error(Errc::dimensionality, "taut string needs a 1D grid");
  if (!(tau > 0)) throw Error(Errc::validation, "tau must be positive");
  Grid u = like(f);
  u.values = taut_string_1d(f.values, tau / f.spacing);
  return u;
}

}  // namespace spectv
