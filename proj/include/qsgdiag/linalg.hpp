#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qsgdiag {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Vec3 = Eigen::Vector3d;

/// Raised for malformed or inconsistent caller input (shape, hermiticity,
/// out-of-range parameters). Internal construction failures use
/// std::logic_error instead.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Relative tolerance used to accept a matrix as hermitean.
inline constexpr double kHermiticityTolerance = 1e-12;

/// Largest entry magnitude, 0 for an empty matrix.
double max_abs(const Matrix &m);

/// max |m_ij - conj(m_ji)|.
double hermiticity_defect(const Matrix &m);

/// A validated square complex matrix equal to its conjugate transpose.
///
/// Validation is relative to the largest entry magnitude; inputs that fail it
/// are rejected, never symmetrized.
class HermitianMatrix {
public:
  explicit HermitianMatrix(Matrix entries);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix &entries() const { return entries_; }
  Complex operator()(int i, int j) const { return entries_(i, j); }

private:
  Matrix entries_;
};

/// (A, B) -> max |A_ij - B_ij|.
double max_abs_diff(const Matrix &a, const Matrix &b);

} // namespace qsgdiag
