#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "qsgdiag/linalg.hpp"

namespace qsgdiag {

/// Spin quantum number s (stored as 2s) together with hbar.
///
/// The Hilbert space has dimension N = 2s + 1 and carries the spin-s
/// irreducible representation.
class SpinSystem {
public:
  explicit SpinSystem(int twice_s, double hbar = 1.0);

  static SpinSystem from_dimension(int n, double hbar = 1.0);
  /// Accepts "1/2", "3/2", "1", "2", "2.5" and similar.
  static SpinSystem parse(const std::string &text, double hbar = 1.0);

  int twice_s() const { return twice_s_; }
  double s() const { return 0.5 * twice_s_; }
  int dim() const { return twice_s_ + 1; }
  double hbar() const { return hbar_; }
  /// "1/2", "1", "3/2", ...
  std::string label() const;

  friend bool operator==(const SpinSystem &, const SpinSystem &) = default;

private:
  int twice_s_;
  double hbar_;
};

/// S1, S2, S3 in the S3 eigenbasis, magnetic quantum number descending.
struct SpinOperators {
  Matrix s1, s2, s3;

  /// Axis 1, 2 or 3.
  const Matrix &operator[](int axis) const;
};

SpinOperators spin_operators(const SpinSystem &spin);

/// Average over all orderings of S_{j1} S_{j2} ... S_{ja}. Axes are 1, 2, 3;
/// the empty product is the identity. Rank above 2s is rejected.
Matrix symmetrized_product(const SpinSystem &spin, std::span<const int> axes);

/// nu = (a; j1, ..., ja) with j1 <= ... <= ja.
struct MultipoleIndex {
  int rank = 0;
  std::vector<int> components;

  std::string label() const;
  friend bool operator==(const MultipoleIndex &, const MultipoleIndex &) = default;
};

struct MultipoleElement {
  MultipoleIndex index;
  /// Hermitean, (1/N) Tr[T T] = 1.
  Matrix matrix;
  /// Factor applied to the trace-subtracted symmetrized product (after
  /// removing same-rank elements that precede it) to reach unit norm.
  double scale = 1.0;
};

/// Orthonormal hermitean operator basis {T_nu} for a spin s.
///
/// Ordering is rank-major, then lexicographic in the sorted components of the
/// generating product. T_0 is the identity and (1/N) Tr[T_nu T_nu'] is the
/// Kronecker delta. Immutable once built.
class MultipoleBasis {
public:
  MultipoleBasis(SpinSystem spin, std::vector<MultipoleElement> elements);

  const SpinSystem &spin() const { return spin_; }
  int dim() const { return spin_.dim(); }
  std::size_t size() const { return elements_.size(); }
  const MultipoleElement &operator[](std::size_t nu) const { return elements_[nu]; }
  const std::vector<MultipoleElement> &elements() const { return elements_; }

private:
  SpinSystem spin_;
  std::vector<MultipoleElement> elements_;
};

MultipoleBasis build_basis(const SpinSystem &spin);

/// Process-wide cache of built bases keyed by (2s, hbar). Thread-safe.
std::shared_ptr<const MultipoleBasis> shared_basis(const SpinSystem &spin);

/// (1/N) Tr[X Y], real part.
double trace_inner(const Matrix &x, const Matrix &y);

/// Multipole coefficients a_nu aligned with a basis ordering.
struct CoefficientVector {
  SpinSystem spin;
  std::vector<double> values;
};

/// a_nu = (1/N) Tr[A T_nu].
CoefficientVector decompose(const HermitianMatrix &a, const MultipoleBasis &basis);

/// sum_nu a_nu T_nu.
HermitianMatrix reconstruct(const CoefficientVector &coeffs, const MultipoleBasis &basis);

} // namespace qsgdiag
