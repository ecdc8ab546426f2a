#include "qsgdiag/tomography.hpp"

#include <algorithm>
#include <cmath>

namespace qsgdiag {

DensityMatrix postselect(const Spectrum &spectrum, std::size_t n) {
  if (n >= spectrum.size())
    throw ValidationError("postselect: eigenspace index " + std::to_string(n) +
                          " out of range (" + std::to_string(spectrum.size()) + " eigenspaces)");
  const Matrix &projector = spectrum.projectors[n];
  return DensityMatrix::trusted(projector / projector.trace().real());
}

ExpectationEstimates estimate_expectations(const DensityMatrix &rho, const MultipoleBasis &basis,
                                           std::size_t shots, std::uint64_t seed,
                                           const TomographyOptions &options) {
  if (rho.dim() != basis.dim())
    throw ValidationError("estimate_expectations: state dimension does not match basis");
  ExpectationEstimates out;
  out.shots_per_multipole = shots;
  out.values.assign(basis.size(), 0.0);
  out.standard_errors.assign(basis.size(), 0.0);
  out.values[0] = 1.0;

  parallel_for(basis.size() - 1, options.threads, [&](std::size_t i) {
    const std::size_t nu = i + 1;
    const Matrix &op = basis[nu].matrix;
    if (shots == kExactShots) {
      out.values[nu] = trace_inner(rho.entries(), op) * basis.dim();
      return;
    }
    // A second apparatus measuring T_nu itself.
    const Spectrum spectrum = oracle_spectrum(HermitianMatrix(op));
    const auto p = outcome_probabilities(rho, spectrum);
    std::vector<double> cumulative(p.size());
    double total = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      total += std::max(p[k], 0.0);
      cumulative[k] = total;
    }
    StreamRng rng(seed, StreamDomain::Tomography, nu);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t shot = 0; shot < shots; ++shot) {
      const double u = rng.uniform() * total;
      const auto k = static_cast<std::size_t>(
          std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
      const double value = spectrum.values[std::min(k, p.size() - 1)];
      sum += value;
      sum_sq += value * value;
    }
    const double count = static_cast<double>(shots);
    const double mean = sum / count;
    out.values[nu] = mean;
    if (shots > 1) {
      const double variance = std::max(0.0, (sum_sq - count * mean * mean) / (count - 1.0));
      out.standard_errors[nu] = std::sqrt(variance / count);
    }
  });
  return out;
}

ReconstructedState reconstruct_state(const ExpectationEstimates &estimates,
                                     const MultipoleBasis &basis, const Matrix *oracle_projector) {
  if (estimates.values.size() != basis.size())
    throw ValidationError("reconstruct_state: " + std::to_string(estimates.values.size()) +
                          " estimates for a basis of " + std::to_string(basis.size()));
  const int n = basis.dim();
  ReconstructedState out;
  out.rho_hat = Matrix::Zero(n, n);
  for (std::size_t nu = 0; nu < basis.size(); ++nu)
    out.rho_hat += estimates.values[nu] * basis[nu].matrix;
  out.rho_hat /= static_cast<double>(n);

  const auto eig = jacobi_eigensolver(out.rho_hat);
  out.min_eigenvalue = eig.values(0);
  out.dominant_eigenvalue = eig.values(n - 1);
  out.dominant_multiplicity = 0;
  for (int k = 0; k < n; ++k)
    if (out.dominant_eigenvalue - eig.values(k) <= 1e-6)
      ++out.dominant_multiplicity;

  Vector v = eig.vectors.col(n - 1);
  Eigen::Index largest = 0;
  v.cwiseAbs().maxCoeff(&largest);
  v *= std::abs(v(largest)) / v(largest);
  v.normalize();
  out.dominant_vector = std::move(v);

  if (oracle_projector != nullptr) {
    if (oracle_projector->rows() != n || oracle_projector->cols() != n)
      throw ValidationError("reconstruct_state: oracle projector has wrong shape");
    const double overlap = (out.rho_hat.cwiseProduct(oracle_projector->transpose())).sum().real();
    out.overlap_vs_oracle = std::clamp(overlap, 0.0, 1.0);
    const int rank = static_cast<int>(std::lround(oracle_projector->trace().real()));
    if (rank < 1 || rank > n)
      throw ValidationError("reconstruct_state: oracle projector has trace outside [1, N]");
    const Matrix top = eig.vectors.rightCols(rank);
    const double captured = (top.adjoint() * (*oracle_projector) * top).trace().real();
    out.fidelity_vs_oracle = std::clamp(captured / rank, 0.0, 1.0);
  }
  return out;
}

double eigenvector_residual(const HermitianMatrix &a, double lambda, const Vector &v) {
  if (v.size() != a.dim())
    throw ValidationError("eigenvector_residual: vector dimension does not match matrix");
  const double norm = v.norm();
  if (norm == 0.0)
    throw ValidationError("eigenvector_residual: zero vector");
  if (std::abs(norm - 1.0) > 1e-10)
    throw ValidationError("eigenvector_residual: vector is not normalized");
  return (a.entries() * v - lambda * v).norm();
}

} // namespace qsgdiag
