#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qsgdiag/measurement_engine.hpp"
#include "qsgdiag/multipole_basis.hpp"

namespace qsgdiag {

/// Ensemble left in subbeam n when every other subbeam is blocked:
/// P_n / Tr[P_n].
DensityMatrix postselect(const Spectrum &spectrum, std::size_t n);

/// Shot count meaning "evaluate Tr[rho T_nu] directly".
inline constexpr std::size_t kExactShots = 0;

struct ExpectationEstimates {
  std::vector<double> values;          // <T_nu>, values[0] == 1
  std::vector<double> standard_errors; // 0 in exact mode
  std::size_t shots_per_multipole = kExactShots;
};

struct TomographyOptions {
  unsigned threads = 1;
};

/// Estimates <T_nu> for every multipole. With shots > 0 each T_nu (nu > 0) is
/// measured projectively `shots` times on fresh copies of rho, drawing from
/// T_nu's own spectral distribution, and the outcomes are averaged.
ExpectationEstimates estimate_expectations(const DensityMatrix &rho, const MultipoleBasis &basis,
                                           std::size_t shots, std::uint64_t seed,
                                           const TomographyOptions &options = {});

struct ReconstructedState {
  /// Hermitean with unit trace; may have small negative eigenvalues at
  /// finite shots (see min_eigenvalue).
  Matrix rho_hat;
  /// Tr[Q P] / m, where P is the oracle projector of rank m and Q projects
  /// onto the top-m eigenspace of rho_hat.
  std::optional<double> fidelity_vs_oracle;
  /// Raw overlap Re Tr[rho_hat P].
  std::optional<double> overlap_vs_oracle;
  /// Top eigenvector of rho_hat, phase fixed so its largest component is
  /// real and positive.
  Vector dominant_vector;
  double dominant_eigenvalue = 0.0;
  double min_eigenvalue = 0.0;
  /// Number of eigenvalues of rho_hat within 1e-6 of the top one; > 1 means
  /// the dominant vector is one arbitrary member of a degenerate eigenspace.
  int dominant_multiplicity = 1;
};

/// rho_hat = (1/N) sum_nu <T_nu> T_nu. With an oracle eigenprojector P the
/// fidelity is |<v|psi>|^2 for a nondegenerate eigenvalue, v the dominant
/// vector; the overlap is <psi|rho_hat|psi>. Both are clamped to [0, 1].
ReconstructedState reconstruct_state(const ExpectationEstimates &estimates,
                                     const MultipoleBasis &basis,
                                     const Matrix *oracle_projector = nullptr);

/// ‖A v - lambda v‖_2 for a unit vector v.
double eigenvector_residual(const HermitianMatrix &a, double lambda, const Vector &v);

} // namespace qsgdiag
