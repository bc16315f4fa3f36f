#pragma once

// Reference computations that share no code path with the library.

#include "omni360/trajectory.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace omni360::oracle {

/// Native-time row of d^order/dt^order [1 t t^2 ... t^5].
inline Eigen::Matrix<double, 1, 6> basis_row(double t, int order) {
  Eigen::Matrix<double, 1, 6> row = Eigen::Matrix<double, 1, 6>::Zero();
  for (int k = order; k < 6; ++k) {
    double c = 1.0;
    for (int j = 0; j < order; ++j) c *= k - j;
    row(k) = c * std::pow(t, k - order);
  }
  return row;
}

/// Snap Gram matrix of [1 t ... t^5] on [0, T] via 5-point Gauss-Legendre
/// quadrature (exact for the degree-2 integrand).
inline Eigen::Matrix<double, 6, 6> snap_gram(double T) {
  const double x[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                       0.9061798459386640};
  const double w[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                       0.2369268850561891, 0.2369268850561891};
  Eigen::Matrix<double, 6, 6> q = Eigen::Matrix<double, 6, 6>::Zero();
  for (int i = 0; i < 5; ++i) {
    const double t = 0.5 * T * (x[i] + 1.0);
    const auto r = basis_row(t, 4);
    q += 0.5 * T * w[i] * r.transpose() * r;
  }
  return q;
}

/// Minimum snap cost (summed over axes) from a null-space least-squares
/// solve in native time: a = a_p + N z, z = argmin (a_p + N z)' Q (a_p + N z).
inline double null_space_snap_cost(const std::vector<Waypoint>& wps,
                                   const std::vector<double>& times) {
  const int m = static_cast<int>(times.size());
  const int n = 6 * m;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(5 * m + 1, n);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(5 * m + 1, 3);
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  int r = 0;
  for (int i = 0; i < m; ++i) {
    Q.block<6, 6>(6 * i, 6 * i) = snap_gram(times[i]);
    A.block(r, 6 * i, 1, 6) = basis_row(0.0, 0);
    b.row(r++) = wps[i].transpose();
    A.block(r, 6 * i, 1, 6) = basis_row(times[i], 0);
    b.row(r++) = wps[i + 1].transpose();
  }
  for (int order = 1; order <= 2; ++order) {
    A.block(r++, 0, 1, 6) = basis_row(0.0, order);
    A.block(r++, 6 * (m - 1), 1, 6) = basis_row(times[m - 1], order);
  }
  for (int i = 0; i + 1 < m; ++i) {
    for (int order = 1; order <= 3; ++order) {
      A.block(r, 6 * i, 1, 6) = basis_row(times[i], order);
      A.block(r, 6 * (i + 1), 1, 6) = -basis_row(0.0, order);
      ++r;
    }
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
  const Eigen::MatrixXd particular = cod.solve(b);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const int rank = static_cast<int>(svd.rank());
  const Eigen::MatrixXd N = svd.matrixV().rightCols(n - rank);
  double cost = 0.0;
  for (int axis = 0; axis < 3; ++axis) {
    const Eigen::VectorXd ap = particular.col(axis);
    Eigen::VectorXd a = ap;
    if (N.cols() > 0) {
      const Eigen::MatrixXd H = N.transpose() * Q * N;
      const Eigen::VectorXd z = H.ldlt().solve(-N.transpose() * Q * ap);
      a = ap + N * z;
    }
    cost += a.dot(Q * a);
  }
  return cost;
}

/// The rest-to-rest quintic through 0 -> 1 on [0, 1] by a direct 6x6 solve.
inline Eigen::Matrix<double, 6, 1> unit_quintic() {
  Eigen::Matrix<double, 6, 6> M;
  M << basis_row(0, 0), basis_row(1, 0), basis_row(0, 1), basis_row(1, 1), basis_row(0, 2),
      basis_row(1, 2);
  Eigen::Matrix<double, 6, 1> rhs;
  rhs << 0, 1, 0, 0, 0, 0;
  return M.fullPivLu().solve(rhs);
}

/// Composite Simpson quadrature of f on [a, b] with n (even) panels.
template <typename F>
double simpson(F&& f, double a, double b, int n = 2000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

}  // namespace omni360::oracle
