#include "qsgdiag/observable_map.hpp"

#include <cmath>

namespace qsgdiag {

void PhysicalConstants::validate() const {
  for (double c : {g, mu_b, hbar})
    if (!(c != 0.0) || !std::isfinite(c))
      throw ValidationError("physical constants g, mu_B and hbar must be finite and nonzero");
}

SpinObservable to_observable(const HermitianMatrix &a, const PhysicalConstants &constants) {
  constants.validate();
  const auto spin = SpinSystem::from_dimension(a.dim(), constants.hbar);
  auto basis = shared_basis(spin);
  auto coeffs = decompose(a, *basis);
  return {spin, std::move(coeffs), constants, std::move(basis)};
}

SpinHalfField field_for_spin_half(const SpinObservable &obs) {
  if (obs.spin.dim() != 2)
    throw ValidationError("field_for_spin_half needs N = 2, got N = " +
                          std::to_string(obs.spin.dim()) +
                          "; use apparatus field profiles for larger spins");
  const auto &c = obs.constants;
  const auto &a = obs.coeffs.values;
  const double factor = -2.0 / (c.g * c.mu_b * c.hbar);
  // + 0.0 folds -0 into +0 for stable output.
  return {a[0], Vec3(factor * a[1] + 0.0, factor * a[2] + 0.0, factor * a[3] + 0.0)};
}

EigenvaluePair closed_form_2x2(const HermitianMatrix &a) {
  if (a.dim() != 2)
    throw ValidationError("closed_form_2x2 needs a 2x2 matrix, got N = " +
                          std::to_string(a.dim()));
  const double alpha = a(0, 0).real();
  const double gamma = a(1, 1).real();
  const Complex beta = a(1, 0);
  const double root = std::sqrt((alpha - gamma) * (alpha - gamma) + 4.0 * std::norm(beta));
  return {0.5 * (alpha + gamma + root), 0.5 * (alpha + gamma - root)};
}

EigenvaluePair zeeman_levels(const Vec3 &b0, const PhysicalConstants &constants) {
  const double e = 0.5 * std::abs(constants.hbar * constants.g * constants.mu_b) * b0.norm();
  return {e, -e};
}

} // namespace qsgdiag
