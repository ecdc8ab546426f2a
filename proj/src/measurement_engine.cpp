#include "qsgdiag/measurement_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qsgdiag {

namespace {

double off_diagonal_norm(const Matrix &a) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j)
        sum += std::norm(a(i, j));
  return std::sqrt(sum);
}

// Annihilates a(p,q) with the unitary U = diag(1, e^{-i phi}) R(theta) acting
// on rows/columns p and q, then accumulates U into v.
void rotate(Matrix &a, Matrix &v, Eigen::Index p, Eigen::Index q) {
  const Complex c = a(p, q);
  const double magnitude = std::abs(c);
  if (magnitude == 0.0)
    return;
  const Complex phase = std::conj(c) / magnitude; // e^{-i phi}
  const double app = a(p, p).real();
  const double aqq = a(q, q).real();
  const double tau = (aqq - app) / (2.0 * magnitude);
  const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
  const double cs = 1.0 / std::sqrt(1.0 + t * t);
  const double sn = t * cs;

  const Complex u_pp = cs;
  const Complex u_pq = sn;
  const Complex u_qp = -sn * phase;
  const Complex u_qq = cs * phase;

  const Eigen::Index n = a.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    const Complex akp = a(k, p);
    const Complex akq = a(k, q);
    a(k, p) = akp * u_pp + akq * u_qp;
    a(k, q) = akp * u_pq + akq * u_qq;
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    const Complex apk = a(p, k);
    const Complex aqk = a(q, k);
    a(p, k) = std::conj(u_pp) * apk + std::conj(u_qp) * aqk;
    a(q, k) = std::conj(u_pq) * apk + std::conj(u_qq) * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  a(p, p) = a(p, p).real();
  a(q, q) = a(q, q).real();

  for (Eigen::Index k = 0; k < n; ++k) {
    const Complex vkp = v(k, p);
    const Complex vkq = v(k, q);
    v(k, p) = vkp * u_pp + vkq * u_qp;
    v(k, q) = vkp * u_pq + vkq * u_qq;
  }
}

} // namespace

EigenDecomposition jacobi_eigensolver(const Matrix &input, int max_sweeps) {
  if (input.rows() != input.cols())
    throw ValidationError("jacobi_eigensolver: matrix is not square");
  const Eigen::Index n = input.rows();
  Matrix a = 0.5 * (input + input.adjoint());
  Matrix v = Matrix::Identity(n, n);
  const double scale = a.norm();
  const double target = 1e-2 * std::numeric_limits<double>::epsilon() * scale;

  int sweeps = 0;
  while (off_diagonal_norm(a) > target) {
    if (sweeps == max_sweeps)
      throw ConvergenceError("jacobi_eigensolver: off-diagonal norm " +
                             std::to_string(off_diagonal_norm(a)) + " after " +
                             std::to_string(max_sweeps) + " sweeps");
    for (Eigen::Index p = 0; p + 1 < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q)
        rotate(a, v, p, q);
    ++sweeps;
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
    return a(x, x).real() < a(y, y).real();
  });
  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = a(order[k], order[k]).real();
    out.vectors.col(k) = v.col(order[k]);
  }
  out.sweeps = sweeps;
  return out;
}

Spectrum oracle_spectrum(const HermitianMatrix &a, double degeneracy_tol) {
  if (!(degeneracy_tol >= 0.0))
    throw ValidationError("degeneracy tolerance must be nonnegative");
  const auto eig = jacobi_eigensolver(a.entries());
  const Eigen::Index n = eig.values.size();
  const double scale = eig.values.cwiseAbs().maxCoeff();
  const double gap = degeneracy_tol * scale;

  Spectrum out;
  Eigen::Index begin = 0;
  while (begin < n) {
    Eigen::Index end = begin + 1;
    while (end < n && eig.values(end) - eig.values(end - 1) <= gap)
      ++end;
    const Eigen::Index m = end - begin;
    double value = eig.values(begin);
    if (m > 1)
      value = eig.values.segment(begin, m).mean();
    Matrix block = eig.vectors.middleCols(begin, m);
    out.values.push_back(value);
    out.multiplicities.push_back(static_cast<int>(m));
    out.projectors.push_back(block * block.adjoint());
    out.eigenvectors.push_back(std::move(block));
    begin = end;
  }
  return out;
}

DensityMatrix::DensityMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() == 0)
    throw ValidationError("density matrix must be square and nonempty");
  if (hermiticity_defect(entries_) > 1e-10)
    throw ValidationError("density matrix is not hermitean");
  const Complex trace = entries_.trace();
  if (std::abs(trace - 1.0) > 1e-10)
    throw ValidationError("density matrix trace " + std::to_string(trace.real()) + " is not 1");
  const auto eig = jacobi_eigensolver(entries_);
  if (eig.values(0) < -1e-10)
    throw ValidationError("density matrix has negative eigenvalue " +
                          std::to_string(eig.values(0)));
}

DensityMatrix DensityMatrix::maximally_mixed(int n) {
  if (n < 1)
    throw ValidationError("density matrix dimension must be positive");
  return DensityMatrix(Matrix::Identity(n, n) / static_cast<double>(n), Unchecked{});
}

DensityMatrix DensityMatrix::trusted(Matrix entries) {
  return DensityMatrix(std::move(entries), Unchecked{});
}

std::vector<double> outcome_probabilities(const DensityMatrix &rho, const Spectrum &spectrum) {
  if (rho.dim() != spectrum.dim())
    throw ValidationError("density matrix dimension " + std::to_string(rho.dim()) +
                          " does not match spectrum dimension " +
                          std::to_string(spectrum.dim()));
  std::vector<double> p;
  p.reserve(spectrum.size());
  for (const auto &projector : spectrum.projectors)
    p.push_back((rho.entries().cwiseProduct(projector.transpose())).sum().real());
  return p;
}

MeasurementOutcome measure_once(const DensityMatrix &rho, const Spectrum &spectrum,
                                StreamRng &rng) {
  auto p = outcome_probabilities(rho, spectrum);
  double total = 0.0;
  for (double &x : p) {
    if (x < 1e-15)
      x = 0.0;
    total += x;
  }
  if (total <= 0.0)
    throw std::logic_error("measure_once: all outcome probabilities vanish");

  const double u = rng.uniform() * total;
  std::size_t n = 0;
  double cumulative = p[0];
  while (n + 1 < p.size() && (u >= cumulative || p[n] == 0.0))
    cumulative += p[++n];
  while (p[n] == 0.0)
    --n;

  const Matrix &projector = spectrum.projectors[n];
  Matrix post = projector * rho.entries() * projector / p[n];
  post = (0.5 * (post + post.adjoint())).eval();
  return {spectrum.values[n], n, p[n] / total, DensityMatrix::trusted(std::move(post))};
}

std::size_t StoppingRule::required_runs(int n) const {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw ValidationError("stopping rule epsilon must lie in (0,1)");
  if (n < 2)
    throw ValidationError("stopping rule needs N >= 2");
  const double ratio = static_cast<double>(n - 1) / n;
  auto bound = [&](std::size_t runs) { return n * std::pow(ratio, static_cast<double>(runs)); };
  auto runs = static_cast<std::size_t>(
      std::max(0.0, std::ceil(std::log(epsilon / n) / std::log(ratio))));
  // Guard the ceil against rounding in either direction.
  while (bound(runs) > epsilon)
    ++runs;
  while (runs > 0 && bound(runs - 1) <= epsilon)
    --runs;
  return runs;
}

double missing_probability(int n, std::size_t n0) {
  if (n < 2)
    throw ValidationError("missing_probability needs N >= 2");
  return std::pow(static_cast<double>(n - 1) / n, static_cast<double>(n0));
}

MeasurementRecord run_experiment_fixed(const Spectrum &spectrum, std::size_t runs,
                                       std::uint64_t seed, const ExperimentOptions &options) {
  if (spectrum.size() == 0)
    throw ValidationError("run_experiment: empty spectrum");
  if (!(options.noise_sigma >= 0.0))
    throw ValidationError("noise sigma must be nonnegative");

  const auto rho = DensityMatrix::maximally_mixed(spectrum.dim());
  MeasurementRecord record;
  record.seed = seed;
  record.runs = runs;
  record.outcomes.resize(runs);
  parallel_for(runs, options.threads, [&](std::size_t run) {
    StreamRng rng(seed, StreamDomain::MeasurementRun, run);
    const auto outcome = measure_once(rho, spectrum, rng);
    double value = outcome.eigenvalue;
    if (options.noise_sigma > 0.0) {
      StreamRng noise(seed, StreamDomain::ReadoutNoise, run);
      value += options.noise_sigma * noise.normal();
    }
    record.outcomes[run] = {run, value, outcome.eigenspace};
  });

  record.counts.assign(spectrum.size(), 0);
  for (const auto &o : record.outcomes)
    ++record.counts[o.eigenspace];
  record.complete = std::all_of(record.counts.begin(), record.counts.end(),
                                [](std::size_t c) { return c > 0; });
  return record;
}

MeasurementRecord run_experiment(const Spectrum &spectrum, const StoppingRule &rule,
                                 std::uint64_t seed, const ExperimentOptions &options) {
  const std::size_t required = rule.required_runs(spectrum.dim());
  auto record = run_experiment_fixed(spectrum, std::min(required, rule.max_runs), seed, options);
  record.capped = required > rule.max_runs;
  return record;
}

Harvest harvest_eigenvalues(const MeasurementRecord &record, double cluster_tol) {
  if (record.outcomes.empty())
    throw ValidationError("harvest_eigenvalues: empty record");
  if (!(cluster_tol >= 0.0))
    throw ValidationError("cluster tolerance must be nonnegative");

  std::vector<RecordedOutcome> sorted = record.outcomes;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto &x, const auto &y) { return x.value < y.value; });

  Harvest harvest;
  std::vector<std::size_t> home; // eigenspace -> first cluster seen in
  std::size_t begin = 0;
  while (begin < sorted.size()) {
    std::size_t end = begin + 1;
    while (end < sorted.size() && sorted[end].value - sorted[end - 1].value <= cluster_tol)
      ++end;
    EigenvalueCluster cluster{};
    cluster.count = end - begin;
    cluster.spread = sorted[end - 1].value - sorted[begin].value;
    std::vector<std::size_t> tally;
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      sum += sorted[i].value;
      const auto e = sorted[i].eigenspace;
      if (tally.size() <= e)
        tally.resize(e + 1, 0);
      ++tally[e];
    }
    cluster.estimate = cluster.spread == 0.0 ? sorted[begin].value
                                             : sum / static_cast<double>(cluster.count);
    for (std::size_t e = 0; e < tally.size(); ++e) {
      if (tally[e] == 0)
        continue;
      cluster.eigenspaces.push_back(e);
      if (tally[e] > tally[cluster.dominant_eigenspace] || tally[cluster.dominant_eigenspace] == 0)
        cluster.dominant_eigenspace = e;
      if (home.size() <= e)
        home.resize(e + 1, SIZE_MAX);
      if (home[e] != SIZE_MAX)
        harvest.overlap_warning = true;
      home[e] = harvest.clusters.size();
    }
    if (cluster.eigenspaces.size() > 1)
      harvest.overlap_warning = true;
    harvest.clusters.push_back(std::move(cluster));
    begin = end;
  }
  return harvest;
}

} // namespace qsgdiag
