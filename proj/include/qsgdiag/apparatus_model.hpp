#pragma once

#include <functional>
#include <span>
#include <vector>

#include "qsgdiag/multipole_basis.hpp"
#include "qsgdiag/observable_map.hpp"

namespace qsgdiag {

inline constexpr double kDefaultFiniteDifferenceStep = 1e-3;

/// B(r) = (1 + k.r) B0 + (B0.r) k, with k perpendicular to B0 so that the
/// field is divergence- and curl-free.
class SwiftField {
public:
  /// Rejects |k.B0| > 1e-12 |k| |B0|.
  SwiftField(Vec3 b0, Vec3 k);

  const Vec3 &b0() const { return b0_; }
  const Vec3 &k() const { return k_; }

private:
  Vec3 b0_;
  Vec3 k_;
};

Vec3 swift_field_at(const SwiftField &field, const Vec3 &r);

/// A gradient vector of the given magnitude perpendicular to b0, chosen
/// deterministically (any direction when b0 = 0).
Vec3 perpendicular_gradient(const Vec3 &b0, double magnitude = 1.0);

using FieldEvaluator = std::function<Vec3(const Vec3 &)>;

struct MaxwellReport {
  std::vector<Vec3> sample_points;
  double max_div = 0.0;
  double max_curl = 0.0;
  double step = kDefaultFiniteDifferenceStep;
};

/// Central-difference divergence and curl magnitude at each point.
MaxwellReport check_maxwell(const FieldEvaluator &field, std::span<const Vec3> points,
                            double h = kDefaultFiniteDifferenceStep);

/// Tuned coefficient profiles Phi_nu(r) = a_nu (1 + r_axis): Phi_nu(0) = a_nu
/// and dPhi_nu/dr_axis(0) = a_nu.
class FieldProfileSet {
public:
  /// gradient_axis is 1, 2 or 3.
  FieldProfileSet(SpinSystem spin, std::vector<double> coeffs, int gradient_axis = 1);
  explicit FieldProfileSet(const SpinObservable &obs, int gradient_axis = 1)
      : FieldProfileSet(obs.spin, obs.coeffs.values, gradient_axis) {}

  const SpinSystem &spin() const { return spin_; }
  int gradient_axis() const { return gradient_axis_; }
  std::size_t size() const { return coeffs_.size(); }

  double value(std::size_t nu, const Vec3 &r) const;
  /// Analytic partial derivative along `axis` (1, 2, 3).
  double derivative(std::size_t nu, int axis, const Vec3 &r) const;

private:
  SpinSystem spin_;
  std::vector<double> coeffs_;
  int gradient_axis_;
};

/// H(r, S) = sum_nu Phi_nu(r) T_nu.
HermitianMatrix local_hamiltonian(const FieldProfileSet &profiles, const MultipoleBasis &basis,
                                  const Vec3 &r);

/// -d<psi|H(r,S)|psi>/dr_axis at r = 0 by central difference. For an
/// eigenstate |A_n> of A this is -A_n. Rejects |‖psi‖ - 1| > 1e-10.
double beam_force(const FieldProfileSet &profiles, const MultipoleBasis &basis,
                  const Vector &state, double h = kDefaultFiniteDifferenceStep);

/// E_pm(r) = +-(hbar/2) g mu_B (1 + k.r) |B0|, first order in the gradient.
EigenvaluePair spin_half_levels(const SwiftField &field, const Vec3 &r,
                                const PhysicalConstants &constants);

/// -g mu_B B(r) . S for spin 1/2, without the a I_2 offset.
HermitianMatrix swift_hamiltonian(const SwiftField &field, const Vec3 &r,
                                  const PhysicalConstants &constants);

/// Eigenstate of swift_hamiltonian at r = 0 for E_+ (upper) or E_-.
Vector swift_eigenstate(const SwiftField &field, const PhysicalConstants &constants, bool upper);

/// -grad <psi|H0(r)|psi> at r = 0, central differences along each axis.
Vec3 swift_beam_force(const SwiftField &field, const PhysicalConstants &constants,
                      const Vector &state, double h = kDefaultFiniteDifferenceStep);

} // namespace qsgdiag
