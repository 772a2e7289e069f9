#pragma once

#include <spectv/grid.hpp>
#include <spectv/spectral.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

namespace spectv {

// Rows of V are the analysis atoms v_i. J(u) = ||V u||_1.
struct OrthoBasis {
  Eigen::MatrixXd V;

  std::size_t size() const { return std::size_t(V.rows()); }
  double orthonormality_error() const {
    return (V * V.transpose() - Eigen::MatrixXd::Identity(V.rows(), V.rows())).cwiseAbs().maxCoeff();
  }
  void validate(double tol = 1e-10) const {
    if (V.rows() != V.cols() || V.rows() == 0) throw Error(Errc::shape, "basis must be square");
    if (orthonormality_error() > tol) throw Error(Errc::validation, "basis is not orthonormal");
  }
};

inline Eigen::VectorXd as_vector(const Grid& g) {
  return Eigen::Map<const Eigen::VectorXd>(g.values.data(), Eigen::Index(g.size()));
}
inline Grid as_grid(const Eigen::VectorXd& v, const Grid& shape) {
  Grid g = like(shape);
  for (Eigen::Index i = 0; i < v.size(); ++i) g[std::size_t(i)] = v[i];
  return g;
}

inline Eigen::VectorXd analyze(const OrthoBasis& B, const Eigen::VectorXd& f) {
  if (f.size() != B.V.cols()) throw Error(Errc::shape, "signal length differs from basis size");
  return B.V * f;
}
inline Eigen::VectorXd synthesize(const OrthoBasis& B, const Eigen::VectorXd& z) {
  if (z.size() != B.V.rows()) throw Error(Errc::shape, "coefficient length differs from basis size");
  return B.V.transpose() * z;
}

inline Eigen::VectorXd soft_threshold(const Eigen::VectorXd& z, double t) {
  Eigen::VectorXd r(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double m = std::abs(z[i]) - t;
    r[i] = m > 0 ? std::copysign(m, z[i]) : 0.0;
  }
  return r;
}

inline Eigen::VectorXd hard_threshold(const Eigen::VectorXd& z, double tc) {
  Eigen::VectorXd r = z;
  for (Eigen::Index i = 0; i < z.size(); ++i)
    if (std::abs(z[i]) < tc) r[i] = 0.0;
  return r;
}

inline int sparsity_count(const Eigen::VectorXd& z, double tol = 1e-12) {
  int c = 0;
  for (Eigen::Index i = 0; i < z.size(); ++i) c += std::abs(z[i]) > tol;
  return c;
}

// u(t) = V^T (sign(zeta) max(|zeta| - t, 0))
inline Grid closed_form_flow(const OrthoBasis& B, const Grid& f, double t) {
  return as_grid(synthesize(B, soft_threshold(analyze(B, as_vector(f)), t)), f);
}

// (Vp)_i = sign(zeta_i) where |zeta_i| >= t, else 0
inline Eigen::VectorXd closed_form_vp(const OrthoBasis& B, const Grid& f, double t) {
  Eigen::VectorXd z = analyze(B, as_vector(f));
  Eigen::VectorXd vp = Eigen::VectorXd::Zero(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i)
    if (z[i] != 0.0 && std::abs(z[i]) >= t) vp[i] = z[i] > 0 ? 1.0 : -1.0;
  return vp;
}
inline Grid closed_form_subgradient(const OrthoBasis& B, const Grid& f, double t) {
  return as_grid(synthesize(B, closed_form_vp(B, f, t)), f);
}

struct DeltaAtom {
  double t = 0.0;     // |zeta_i|
  double coeff = 0.0; // zeta_i
  std::size_t index = 0;
  Eigen::VectorXd atom;  // zeta_i v_i
};

// phi(t) = sum_i zeta_i delta(t - |zeta_i|) v_i, zero coefficients dropped
inline std::vector<DeltaAtom> closed_form_phi(const OrthoBasis& B, const Grid& f) {
  Eigen::VectorXd z = analyze(B, as_vector(f));
  std::vector<DeltaAtom> out;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (z[i] == 0.0) continue;
    out.push_back({std::abs(z[i]), z[i], std::size_t(i), z[i] * B.V.row(i).transpose()});
  }
  std::stable_sort(out.begin(), out.end(), [](const DeltaAtom& a, const DeltaAtom& b) { return a.t < b.t; });
  return out;
}

// delta-list counterpart of apply_filter: sum_i H(|zeta_i|) zeta_i v_i
inline Eigen::VectorXd filter_deltas(const std::vector<DeltaAtom>& d, const TransferFunction& H, Eigen::Index n) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (const auto& a : d) out += H(a.t) * a.atom;
  return out;
}

// Row 0 is the scaling vector, then wavelet levels from coarse to fine.
inline OrthoBasis haar_basis(std::size_t m) {
  if (m == 0 || (m & (m - 1)) != 0) throw Error(Errc::validation, "haar basis size must be a power of two");
  OrthoBasis B;
  B.V = Eigen::MatrixXd::Zero(Eigen::Index(m), Eigen::Index(m));
  B.V.row(0).setConstant(1.0 / std::sqrt(double(m)));
  Eigen::Index row = 1;
  for (std::size_t blocks = 1; blocks < m; blocks *= 2) {
    const std::size_t len = m / blocks, half = len / 2;
    const double a = 1.0 / std::sqrt(double(len));
    for (std::size_t k = 0; k < blocks; ++k, ++row) {
      for (std::size_t j = 0; j < half; ++j) {
        B.V(row, Eigen::Index(k * len + j)) = a;
        B.V(row, Eigen::Index(k * len + half + j)) = -a;
      }
    }
  }
  return B;
}

// number of nonzero wavelet coefficients (scaling row excluded)
inline int haar_wavelet_count(const Grid& f, double tol = 1e-9) {
  OrthoBasis B = haar_basis(f.size());
  Eigen::VectorXd z = analyze(B, as_vector(f));
  return sparsity_count(z.tail(z.size() - 1), tol);
}

struct OrthoProx {
  Grid u, p;
  int innerIters = 0;
  double gap = 0.0;
  bool converged = true;
};

// J(u) = ||V u||_1 on the raw sample vector; prox is exact soft thresholding
// in the coefficient domain. Null space is {0}.
struct OrthoL1Functional {
  OrthoBasis basis;
  struct Warm {};

  double value(const Grid& u) const { return analyze(basis, as_vector(u)).lpNorm<1>(); }
  double kernel_level(const Grid&) const { return 0.0; }
  OrthoProx prox(const Grid& f, double tau, Warm&) const {
    OrthoProx r;
    r.u = as_grid(synthesize(basis, soft_threshold(analyze(basis, as_vector(f)), tau)), f);
    r.p = like(f);
    for (std::size_t i = 0; i < f.size(); ++i) r.p[i] = (f[i] - r.u[i]) / tau;
    return r;
  }
};

inline void write_basis_csv(const OrthoBasis& B, const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw Error(Errc::io, "cannot write " + p.string());
  for (Eigen::Index i = 0; i < B.V.rows(); ++i)
    for (Eigen::Index j = 0; j < B.V.cols(); ++j)
      out << detail::fmt(B.V(i, j)) << (j + 1 == B.V.cols() ? '\n' : ',');
}

}  // namespace spectv
