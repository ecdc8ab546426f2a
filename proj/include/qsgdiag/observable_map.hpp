#pragma once

#include <memory>

#include "qsgdiag/multipole_basis.hpp"

namespace qsgdiag {

/// g-factor, magneton and hbar; all nonzero. Natural units by default.
struct PhysicalConstants {
  double g = 1.0;
  double mu_b = 1.0;
  double hbar = 1.0;

  void validate() const;
};

/// H_A(S) = sum_nu a_nu T_nu(S): a hermitean matrix read as an observable of
/// a single spin s = (N-1)/2.
struct SpinObservable {
  SpinSystem spin;
  CoefficientVector coeffs;
  PhysicalConstants constants;
  std::shared_ptr<const MultipoleBasis> basis;

  HermitianMatrix matrix() const { return reconstruct(coeffs, *basis); }
};

SpinObservable to_observable(const HermitianMatrix &a, const PhysicalConstants &constants = {});

/// Spin-1/2 field description A = a I - g mu_B B0 . S.
struct SpinHalfField {
  double a;
  Vec3 b0;
};

/// a = a_0 and B0 = -2/(g mu_B hbar) (a_1, a_2, a_3). N = 2 only.
SpinHalfField field_for_spin_half(const SpinObservable &obs);

/// Eigenvalue of A from an eigenvalue E of the traceless part: A = a + E.
constexpr double shift_relation(double e, double a) { return a + e; }

struct EigenvaluePair {
  double plus;
  double minus;
};

/// A_pm = (alpha + gamma +- sqrt((alpha - gamma)^2 + 4 |beta|^2)) / 2.
EigenvaluePair closed_form_2x2(const HermitianMatrix &a);

/// Eigenvalues E_pm = +-(hbar/2) g mu_B |B0| of -g mu_B B0 . S.
EigenvaluePair zeeman_levels(const Vec3 &b0, const PhysicalConstants &constants);

} // namespace qsgdiag
