#pragma once

// Shared generators and independent oracles for the test suites. Nothing here
// calls into the code paths under test except for types.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "qsgdiag/linalg.hpp"

namespace qsgdiag::testing {

/// Entries uniform in [-scale, scale] (real and imaginary parts), hermitean by
/// construction.
inline HermitianMatrix random_hermitian(int n, std::mt19937_64 &rng, double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    m(i, i) = dist(rng);
    for (int j = i + 1; j < n; ++j) {
      m(i, j) = Complex(dist(rng), dist(rng));
      m(j, i) = std::conj(m(i, j));
    }
  }
  return HermitianMatrix(std::move(m));
}

/// Eigen's hermitean solver as an independent reference spectrum.
inline std::vector<double> reference_eigenvalues(const Matrix &a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
  const auto &v = solver.eigenvalues();
  return {v.data(), v.data() + v.size()};
}

inline Eigen::SelfAdjointEigenSolver<Matrix> reference_solver(const Matrix &a) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(a);
}

/// Q factor of a random complex matrix.
inline Matrix random_unitary(int n, std::mt19937_64 &rng) {
  std::normal_distribution<double> g;
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      m(i, j) = Complex(g(rng), g(rng));
  return Eigen::HouseholderQR<Matrix>(m).householderQ() * Matrix::Identity(n, n);
}

inline Matrix pauli(int j) {
  Matrix m = Matrix::Zero(2, 2);
  switch (j) {
  case 0:
    m(0, 0) = m(1, 1) = 1.0;
    break;
  case 1:
    m(0, 1) = m(1, 0) = 1.0;
    break;
  case 2:
    m(0, 1) = Complex(0, -1);
    m(1, 0) = Complex(0, 1);
    break;
  case 3:
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    break;
  }
  return m;
}

inline Matrix from_rows(std::initializer_list<std::initializer_list<Complex>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix m(n, static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto &row : rows) {
    Eigen::Index j = 0;
    for (const auto &x : row)
      m(i, j++) = x;
    ++i;
  }
  return m;
}

inline double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const auto n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

} // namespace qsgdiag::testing
