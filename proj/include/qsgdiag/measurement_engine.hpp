#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qsgdiag/linalg.hpp"
#include "qsgdiag/sampling.hpp"

namespace qsgdiag {

class ConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct EigenDecomposition {
  Eigen::VectorXd values; // ascending
  Matrix vectors;         // column k belongs to values[k]
  int sweeps = 0;
};

/// Cyclic complex Jacobi diagonalization of a hermitean matrix.
///
/// Throws ConvergenceError if the off-diagonal mass has not vanished after
/// `max_sweeps` full sweeps.
EigenDecomposition jacobi_eigensolver(const Matrix &a, int max_sweeps = 64);

/// Distinct eigenvalues of the apparatus observable with their eigenspaces.
///
/// This is the classical stand-in for nature: the measurement engine draws
/// outcomes from it, and nothing else in a diagonalization run reads its
/// values except verification columns.
struct Spectrum {
  std::vector<double> values; // strictly ascending
  std::vector<Matrix> projectors;
  std::vector<int> multiplicities;
  /// Orthonormal columns spanning each eigenspace.
  std::vector<Matrix> eigenvectors;

  int dim() const { return projectors.empty() ? 0 : static_cast<int>(projectors.front().rows()); }
  std::size_t size() const { return values.size(); }
};

/// Eigenvalues closer than degeneracy_tol * max|A_n| are merged into one
/// eigenspace (mean value, summed projector).
Spectrum oracle_spectrum(const HermitianMatrix &a, double degeneracy_tol = 1e-9);

/// Hermitean, unit-trace, positive semidefinite (to 1e-10).
class DensityMatrix {
public:
  explicit DensityMatrix(Matrix entries);

  static DensityMatrix maximally_mixed(int n);
  /// Skips validation; for states valid by construction.
  static DensityMatrix trusted(Matrix entries);

  const Matrix &entries() const { return entries_; }
  int dim() const { return static_cast<int>(entries_.rows()); }

private:
  struct Unchecked {};
  DensityMatrix(Matrix entries, Unchecked) : entries_(std::move(entries)) {}
  Matrix entries_;
};

/// p_n = Re Tr[rho P_n].
std::vector<double> outcome_probabilities(const DensityMatrix &rho, const Spectrum &spectrum);

struct MeasurementOutcome {
  double eigenvalue;
  std::size_t eigenspace;
  double probability;
  DensityMatrix post_state;
};

/// Projection postulate: outcome n with probability Tr[rho P_n], leaving
/// P_n rho P_n / p_n.
MeasurementOutcome measure_once(const DensityMatrix &rho, const Spectrum &spectrum,
                                StreamRng &rng);

struct StoppingRule {
  double epsilon = 1e-6;
  std::size_t max_runs = 1'000'000;

  /// Smallest N0 with N ((N-1)/N)^N0 <= epsilon, before the max_runs cap.
  std::size_t required_runs(int n) const;
  std::size_t planned_runs(int n) const { return std::min(required_runs(n), max_runs); }
};

/// ((N-1)/N)^N0: chance that one fixed nondegenerate eigenvalue is never
/// drawn from the maximally mixed state in N0 runs.
double missing_probability(int n, std::size_t n0);

struct RecordedOutcome {
  std::size_t run;
  double value;
  std::size_t eigenspace;
};

struct MeasurementRecord {
  std::uint64_t seed = 0;
  std::size_t runs = 0;
  std::vector<RecordedOutcome> outcomes; // run-index order
  std::vector<std::size_t> counts;       // per eigenspace
  bool complete = false;                 // every eigenspace observed
  bool capped = false;                   // max_runs cut the planned run count
};

struct ExperimentOptions {
  /// Additive gaussian readout noise on the reported value; 0 disables it.
  double noise_sigma = 0.0;
  unsigned threads = 1;
};

/// Measures a freshly prepared I/N on every run, planned_runs(N) times.
MeasurementRecord run_experiment(const Spectrum &spectrum, const StoppingRule &rule,
                                 std::uint64_t seed, const ExperimentOptions &options = {});

/// Same as above with an explicit run count.
MeasurementRecord run_experiment_fixed(const Spectrum &spectrum, std::size_t runs,
                                       std::uint64_t seed, const ExperimentOptions &options = {});

struct EigenvalueCluster {
  double estimate;
  std::size_t count;
  double spread; // max - min of the grouped outcomes
  /// Eigenspace that produced most of the cluster's outcomes.
  std::size_t dominant_eigenspace;
  std::vector<std::size_t> eigenspaces;
};

struct Harvest {
  std::vector<EigenvalueCluster> clusters; // ascending estimates
  /// Set when a cluster mixes eigenspaces or an eigenspace is split.
  bool overlap_warning = false;
};

/// Groups sorted outcomes whose neighbour gap is <= cluster_tol. With zero
/// noise and cluster_tol = 0 this is exact grouping.
Harvest harvest_eigenvalues(const MeasurementRecord &record, double cluster_tol = 0.0);

} // namespace qsgdiag
