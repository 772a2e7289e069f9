#pragma once

#include <spectv/error.hpp>

#include <Eigen/Dense>

#include <cmath>

namespace spectv {

// J(u) = ||D u||_1 for a general analysis matrix D
inline double l1_analysis_value(const Eigen::MatrixXd& D, const Eigen::VectorXd& u) {
  if (D.cols() != u.size()) throw Error(Errc::shape, "D and u sizes differ");
  return (D * u).lpNorm<1>();
}

// unique subgradient D^T sign(Du) at points where Du has no zero entry
inline Eigen::VectorXd l1_analysis_subgradient(const Eigen::MatrixXd& D, const Eigen::VectorXd& u,
                                               double zeroTol = 0.0) {
  if (D.cols() != u.size()) throw Error(Errc::shape, "D and u sizes differ");
  Eigen::VectorXd d = D * u;
  Eigen::VectorXd s(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (std::abs(d[i]) <= zeroTol)
      throw Error(Errc::non_smooth_point, "Du has a zero component; subdifferential is set-valued");
    s[i] = d[i] > 0 ? 1.0 : -1.0;
  }
  return D.transpose() * s;
}

// D = [[1, -2 eps], [0, 1/eps]]
inline Eigen::Matrix2d epsilon_matrix(double eps) {
  Eigen::Matrix2d D;
  D << 1.0, -2.0 * eps, 0.0, 1.0 / eps;
  return D;
}

inline double rayleigh_quotient(const Eigen::MatrixXd& D, const Eigen::VectorXd& u) {
  double j = l1_analysis_value(D, u);
  if (j == 0.0) throw Error(Errc::degenerate_input, "u is in the null space of J");
  return j * j / u.squaredNorm();
}

}  // namespace spectv
