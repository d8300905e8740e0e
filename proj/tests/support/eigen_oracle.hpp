#pragma once

// Dense eigensolver reference built on Eigen, used only from the tests. The
// library under test sees nothing of this; it receives plain Matrix data.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "triaccel/network.hpp"
#include "triaccel/rng.hpp"

namespace oracle {

inline Eigen::MatrixXd to_eigen(const triaccel::Matrix& m) {
  Eigen::MatrixXd out(m.rows, m.cols);
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) out(r, c) = m(r, c);
  return out;
}

// Full spectrum of a symmetric matrix, sorted by descending magnitude with
// the signed values preserved.
inline std::vector<double> spectrum_by_magnitude(const triaccel::Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(to_eigen(m));
  std::vector<double> vals(solver.eigenvalues().data(),
                           solver.eigenvalues().data() + solver.eigenvalues().size());
  std::stable_sort(vals.begin(), vals.end(),
                   [](double a, double b) { return std::fabs(a) > std::fabs(b); });
  return vals;
}

// Symmetric matrix with a prescribed spectrum: Q diag(evals) Q^T for a random
// orthogonal Q drawn from a QR factorization of Gaussian noise.
inline triaccel::Matrix matrix_with_spectrum(const std::vector<double>& evals, uint64_t seed) {
  const int n = static_cast<int>(evals.size());
  triaccel::Rng rng(seed);
  Eigen::MatrixXd g(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) g(r, c) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd d = Eigen::VectorXd::Map(evals.data(), n);
  Eigen::MatrixXd a = q * d.asDiagonal() * q.transpose();
  // Symmetrize away the last-bit asymmetry from the float products.
  Eigen::MatrixXd sym = 0.5 * (a + a.transpose());

  triaccel::Matrix out(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) out(r, c) = sym(r, c);
  return out;
}

}  // namespace oracle
