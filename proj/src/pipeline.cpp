#include "qsgdiag/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <sstream>

namespace qsgdiag {

using nlohmann::json;

void RunConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw ValidationError("epsilon must lie in (0,1)");
  if (max_runs == 0)
    throw ValidationError("max_runs must be positive");
  if (!(noise_sigma >= 0.0) || !(cluster_tol >= 0.0) || !(degeneracy_tol >= 0.0))
    throw ValidationError("noise sigma and tolerances must be nonnegative");
  if (!(fd_step > 0.0))
    throw ValidationError("finite-difference step must be positive");
  constants.validate();
}

ParseError::ParseError(const std::string &message, std::size_t line, std::size_t column)
    : ValidationError(message), line_(line), column_(column) {}

namespace {

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < std::min(offset, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

Complex parse_entry(const json &entry, std::size_t i, std::size_t j) {
  const auto where = "entry (" + std::to_string(i) + "," + std::to_string(j) + ")";
  if (entry.is_number())
    return {entry.get<double>(), 0.0};
  if (entry.is_array() && entry.size() == 2 && entry[0].is_number() && entry[1].is_number())
    return {entry[0].get<double>(), entry[1].get<double>()};
  throw ValidationError(where + ": expected a number or [re, im], got " + entry.dump());
}

} // namespace

HermitianMatrix parse_matrix_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error &e) {
    // byte is 1-based and points just past the offending character.
    const auto [line, column] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ParseError("matrix JSON parse error at line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + e.what(),
                     line, column);
  }
  if (!doc.is_object() || !doc.contains("matrix"))
    throw ValidationError("matrix JSON must be an object with a \"matrix\" member");
  const json &rows = doc["matrix"];
  if (!rows.is_array() || rows.empty())
    throw ValidationError("\"matrix\" must be a nonempty array of rows");
  const std::size_t n = rows.size();
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!rows[i].is_array())
      throw ValidationError("row " + std::to_string(i) + " is not an array");
    if (rows[i].size() != n)
      throw ValidationError("matrix is not square: " + std::to_string(n) + " rows but row " +
                            std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                            " entries");
    for (std::size_t j = 0; j < n; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = parse_entry(rows[i][j], i, j);
  }
  return HermitianMatrix(std::move(m));
}

HermitianMatrix load_matrix(const std::string &source) {
  const auto first = source.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && source[first] == '{')
    return parse_matrix_json(source);
  std::string text;
  if (source == "-") {
    text.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  } else {
    std::ifstream in(source, std::ios::binary);
    if (!in)
      throw ValidationError("cannot read matrix file '" + source + "'");
    text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  return parse_matrix_json(text);
}

std::string matrix_digest(const HermitianMatrix &a) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto feed = [&hash](std::uint64_t word) {
    for (int b = 0; b < 8; ++b) {
      hash ^= (word >> (8 * b)) & 0xffU;
      hash *= 0x100000001b3ULL;
    }
  };
  auto feed_double = [&feed](double x) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &x, sizeof bits);
    feed(bits);
  };
  feed(static_cast<std::uint64_t>(a.dim()));
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) {
      feed_double(a(i, j).real());
      feed_double(a(i, j).imag());
    }
  std::ostringstream os;
  os << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << hash;
  return os.str();
}

std::vector<double> DiagonalizationReport::eigenvalue_estimates() const {
  std::vector<double> out;
  out.reserve(eigenvalues.size());
  for (const auto &e : eigenvalues)
    out.push_back(e.estimate);
  return out;
}

namespace {

constexpr std::size_t kMaxwellSamplePoints = 32;

SpinHalfReport spin_half_path(const SpinObservable &obs, const RunConfig &config,
                              std::optional<MaxwellReport> &maxwell) {
  const auto field = field_for_spin_half(obs);
  SpinHalfReport out{};
  out.a = field.a;
  out.b0 = field.b0;
  out.k = perpendicular_gradient(field.b0, 1.0);
  const SwiftField swift(out.b0, out.k);
  const auto &c = config.constants;

  const auto levels = zeeman_levels(out.b0, c);
  out.e_plus = levels.plus;
  out.e_minus = levels.minus;
  out.field_eigenvalues = {shift_relation(levels.minus, out.a), shift_relation(levels.plus, out.a)};

  // A traditional Stern-Gerlach run on H0 = -g mu_B B0.S, then A = a + E.
  const auto h0 = swift_hamiltonian(swift, Vec3::Zero(), c);
  const auto spectrum = oracle_spectrum(h0, config.degeneracy_tol);
  const auto record = run_experiment(
      spectrum, StoppingRule{config.epsilon, config.max_runs},
      substream_seed(config.seed, StreamDomain::SpinHalfRun, 0), ExperimentOptions{0.0, 1});
  out.measured_complete = record.complete;
  for (const auto &cluster : harvest_eigenvalues(record).clusters)
    out.measured_eigenvalues.push_back(shift_relation(cluster.estimate, out.a));

  out.force_plus = swift_beam_force(swift, c, swift_eigenstate(swift, c, true), config.fd_step);
  out.force_minus = swift_beam_force(swift, c, swift_eigenstate(swift, c, false), config.fd_step);
  out.expected_force_magnitude =
      0.5 * std::abs(c.hbar * c.g * c.mu_b) * out.b0.norm() * out.k.norm();

  if (config.check_maxwell) {
    StreamRng rng(config.seed, StreamDomain::MaxwellPoints, 0);
    std::vector<Vec3> points;
    for (std::size_t i = 0; i < kMaxwellSamplePoints; ++i)
      points.emplace_back(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0,
                          2.0 * rng.uniform() - 1.0);
    maxwell = check_maxwell([&swift](const Vec3 &r) { return swift_field_at(swift, r); }, points,
                            config.fd_step);
  }
  return out;
}

bool matches_oracle(double estimate, double oracle, const RunConfig &config) {
  if (config.noise_sigma == 0.0)
    return estimate == oracle;
  return std::abs(estimate - oracle) <= std::max(config.cluster_tol, 6.0 * config.noise_sigma);
}

} // namespace

DiagonalizationReport diagonalize_quantum(const HermitianMatrix &a, const RunConfig &config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  DiagonalizationReport report;
  report.input_digest = matrix_digest(a);
  report.config = config;

  // Step 1 and 2: multipole coefficients and the spin observable H_A(S).
  const auto obs = to_observable(a, config.constants);
  const MultipoleBasis &basis = *obs.basis;
  report.spin = obs.spin;
  report.coefficients = obs.coeffs.values;
  for (const auto &element : basis.elements())
    report.indices.push_back(element.index);
  report.reconstruction_defect = max_abs_diff(obs.matrix().entries(), a.entries());
  if (obs.spin.dim() == 2)
    report.spin_half = spin_half_path(obs, config, report.maxwell);

  // Step 3: tuned apparatus. Its center Hamiltonian is what nature diagonalizes.
  const FieldProfileSet profiles(obs);
  const auto center = local_hamiltonian(profiles, basis, Vec3::Zero());
  report.center_defect = max_abs_diff(center.entries(), a.entries());
  const Spectrum spectrum = oracle_spectrum(center, config.degeneracy_tol);
  report.oracle_eigenvalues = spectrum.values;
  for (std::size_t n = 0; n < spectrum.size(); ++n) {
    const Matrix &vectors = spectrum.eigenvectors[n];
    for (Eigen::Index col = 0; col < vectors.cols(); ++col) {
      const Vector v = vectors.col(col).normalized();
      const double force = beam_force(profiles, basis, v, config.fd_step);
      const double expected = -spectrum.values[n];
      report.force_checks.push_back({spectrum.values[n], force, expected, std::abs(force - expected)});
    }
  }

  // Step 4: projective measurements on I/N.
  const StoppingRule rule{config.epsilon, config.max_runs};
  report.required_runs = rule.required_runs(obs.spin.dim());
  const auto record = run_experiment(spectrum, rule, config.seed,
                                     ExperimentOptions{config.noise_sigma, config.threads});
  report.runs = record.runs;
  report.capped = record.capped;
  report.complete = record.complete;
  report.miss_bound = obs.spin.dim() * missing_probability(obs.spin.dim(), record.runs);
  report.counts_per_eigenspace = record.counts;
  const auto harvest = harvest_eigenvalues(record, config.cluster_tol);
  report.overlap_warning = harvest.overlap_warning;

  // Step 5: block all other subbeams, then reconstruct the surviving state.
  for (const auto &cluster : harvest.clusters) {
    const std::size_t n = cluster.dominant_eigenspace;
    report.eigenvalues.push_back({cluster.estimate, cluster.count, cluster.spread,
                                  matches_oracle(cluster.estimate, spectrum.values[n], config),
                                  spectrum.values[n], spectrum.multiplicities[n]});

    const auto rho = postselect(spectrum, n);
    const auto estimates =
        estimate_expectations(rho, basis, config.tomography_shots,
                              substream_seed(config.seed, StreamDomain::Tomography, n),
                              TomographyOptions{config.threads});
    const auto state = reconstruct_state(estimates, basis, &spectrum.projectors[n]);
    report.states.push_back({cluster.estimate, n, spectrum.multiplicities[n],
                             state.fidelity_vs_oracle, state.overlap_vs_oracle,
                             eigenvector_residual(a, cluster.estimate, state.dominant_vector),
                             state.min_eigenvalue, state.dominant_multiplicity > 1,
                             state.dominant_vector, estimates.values, estimates.standard_errors});
  }

  report.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

ReportFormat parse_report_format(const std::string &name) {
  if (name == "text")
    return ReportFormat::Text;
  if (name == "json")
    return ReportFormat::Json;
  throw ValidationError("unknown report format '" + name + "' (expected text or json)");
}

namespace {

json vec3_json(const Vec3 &v) { return json::array({v(0), v(1), v(2)}); }

json complex_vector_json(const Vector &v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out.push_back(json::array({v(i).real(), v(i).imag()}));
  return out;
}

json matrix_json(const Matrix &m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

json index_json(const MultipoleIndex &index) {
  return {{"label", index.label()}, {"rank", index.rank}, {"components", index.components}};
}

json maxwell_json(const MaxwellReport &m) {
  json points = json::array();
  for (const auto &p : m.sample_points)
    points.push_back(vec3_json(p));
  return {{"sample_points", points}, {"max_div", m.max_div}, {"max_curl", m.max_curl},
          {"step", m.step}};
}

json optional_json(const std::optional<double> &x) { return x ? json(*x) : json(nullptr); }

} // namespace

json report_to_json(const DiagonalizationReport &r) {
  const auto &c = r.config;
  json config = {
      {"seed", c.seed},
      {"epsilon", c.epsilon},
      {"max_runs", c.max_runs},
      {"tomography_shots", c.tomography_shots == kExactShots ? json("exact") : json(c.tomography_shots)},
      {"noise_sigma", c.noise_sigma},
      {"cluster_tol", c.cluster_tol},
      {"degeneracy_tol", c.degeneracy_tol},
      {"constants", {{"g", c.constants.g}, {"mu_B", c.constants.mu_b}, {"hbar", c.constants.hbar}}},
      {"fd_step", c.fd_step},
      {"check_maxwell", c.check_maxwell},
  };

  json coefficients = json::array();
  for (std::size_t nu = 0; nu < r.coefficients.size(); ++nu)
    coefficients.push_back({{"index", index_json(r.indices[nu])}, {"value", r.coefficients[nu]}});

  json step2 = {{"reconstruction_defect", r.reconstruction_defect}, {"spin_half", nullptr}};
  json step3 = {{"profile", "linear: Phi_nu(r) = a_nu (1 + r_1)"},
                {"gradient_axis", 1},
                {"center_defect", r.center_defect},
                {"maxwell", r.maxwell ? maxwell_json(*r.maxwell) : json(nullptr)},
                {"swift_forces", nullptr}};
  json spin_half_eigs = nullptr;
  if (r.spin_half) {
    const auto &s = *r.spin_half;
    step2["spin_half"] = {{"a", s.a}, {"B0", vec3_json(s.b0)}, {"E_plus", s.e_plus},
                          {"E_minus", s.e_minus}};
    step3["swift_forces"] = {{"k", vec3_json(s.k)},
                             {"F_plus", vec3_json(s.force_plus)},
                             {"F_minus", vec3_json(s.force_minus)},
                             {"expected_magnitude", s.expected_force_magnitude}};
    spin_half_eigs = {{"field_eigenvalues", s.field_eigenvalues},
                      {"measured_eigenvalues", s.measured_eigenvalues},
                      {"measured_complete", s.measured_complete}};
  }
  json forces = json::array();
  for (const auto &f : r.force_checks)
    forces.push_back({{"oracle_eigenvalue", f.oracle_eigenvalue}, {"force", f.force},
                      {"expected", f.expected}, {"abs_error", f.abs_error}});
  step3["force_checks"] = forces;

  json harvest = json::array();
  for (const auto &e : r.eigenvalues)
    harvest.push_back({{"estimate", e.estimate}, {"count", e.count}, {"spread", e.spread},
                       {"oracle_match", e.oracle_match}, {"oracle_value", e.oracle_value},
                       {"multiplicity", e.multiplicity}});

  json states = json::array();
  for (const auto &s : r.states)
    states.push_back({{"eigenvalue", s.eigenvalue},
                      {"eigenspace", s.eigenspace},
                      {"multiplicity", s.multiplicity},
                      {"fidelity", optional_json(s.fidelity)},
                      {"overlap", optional_json(s.overlap)},
                      {"residual", s.residual},
                      {"min_eigenvalue", s.min_eigenvalue},
                      {"degenerate_dominant", s.degenerate_dominant},
                      {"dominant_vector", complex_vector_json(s.dominant_vector)},
                      {"expectations", s.expectations},
                      {"standard_errors", s.standard_errors}});

  return {
      {"schema", kReportSchema},
      {"input_digest", r.input_digest},
      {"spin", {{"s", r.spin.label()}, {"twice_s", r.spin.twice_s()}, {"N", r.spin.dim()}}},
      {"config", config},
      {"eigenvalues", r.eigenvalue_estimates()},
      {"complete", r.complete},
      {"steps",
       {{"step1_standard_form", {{"coefficients", coefficients}}},
        {"step2_observable", step2},
        {"step3_apparatus", step3},
        {"step4_eigenvalues",
         {{"stopping_rule",
           {{"epsilon", c.epsilon},
            {"max_runs", c.max_runs},
            {"required_runs", r.required_runs},
            {"runs", r.runs},
            {"miss_bound", r.miss_bound},
            {"capped", r.capped}}},
          {"harvest", harvest},
          {"counts_per_eigenspace", r.counts_per_eigenspace},
          {"overlap_warning", r.overlap_warning},
          {"oracle_eigenvalues", r.oracle_eigenvalues},
          {"spin_half_path", spin_half_eigs}}},
        {"step5_eigenstates", {{"states", states}}}}},
      {"timing", {{"elapsed_ms", r.elapsed_ms}}},
  };
}

namespace {

std::string render_text(const DiagonalizationReport &r) {
  std::ostringstream os;
  os << std::setprecision(12);
  os << "qsgdiag report (" << kReportSchema << ")\n";
  os << "input " << r.input_digest << ", N = " << r.spin.dim() << ", spin s = " << r.spin.label()
     << "\n\n";

  os << "Step 1: standard form (multipole coefficients)\n";
  for (std::size_t nu = 0; nu < r.coefficients.size(); ++nu)
    os << "  a" << r.indices[nu].label() << " = " << r.coefficients[nu] << "\n";
  os << "  reconstruction defect " << r.reconstruction_defect << "\n\n";

  os << "Step 2: observable H_A(S) for spin " << r.spin.label() << "\n";
  if (r.spin_half) {
    const auto &s = *r.spin_half;
    os << "  a = " << s.a << ", B0 = (" << s.b0(0) << ", " << s.b0(1) << ", " << s.b0(2) << ")\n";
    os << "  Zeeman levels E+ = " << s.e_plus << ", E- = " << s.e_minus << "\n";
  } else {
    os << "  " << r.coefficients.size() << " multipole terms\n";
  }
  os << "\n";

  os << "Step 3: apparatus (profiles Phi_nu = a_nu (1 + r_1))\n";
  os << "  center defect |H(0) - A| = " << r.center_defect << "\n";
  for (const auto &f : r.force_checks)
    os << "  A_n = " << f.oracle_eigenvalue << "  F_1 = " << f.force << "  (-A_n, error "
       << f.abs_error << ")\n";
  if (r.spin_half) {
    const auto &s = *r.spin_half;
    os << "  Swift field k = (" << s.k(0) << ", " << s.k(1) << ", " << s.k(2) << "), |F+-| = "
       << s.force_plus.norm() << ", " << s.force_minus.norm() << " (expected "
       << s.expected_force_magnitude << ")\n";
  }
  if (r.maxwell)
    os << "  Maxwell check: max |div B| = " << r.maxwell->max_div << ", max |curl B| = "
       << r.maxwell->max_curl << " over " << r.maxwell->sample_points.size() << " points\n";
  else if (r.config.check_maxwell)
    os << "  Maxwell check: only modelled for the spin-1/2 field\n";
  os << "\n";

  os << "Step 4: eigenvalues from " << r.runs << " runs on I/N (required " << r.required_runs
     << ", miss bound " << r.miss_bound << (r.capped ? ", capped" : "") << ")\n";
  for (const auto &e : r.eigenvalues)
    os << "  A = " << e.estimate << "  count " << e.count
       << (e.oracle_match ? "  [oracle match]" : "  [oracle MISMATCH]") << "\n";
  os << "  harvest " << (r.complete ? "complete" : "INCOMPLETE")
     << (r.overlap_warning ? " (overlapping clusters)" : "") << "\n\n";

  os << "Step 5: eigenstates ("
     << (r.config.tomography_shots == kExactShots ? std::string("exact")
                                                  : std::to_string(r.config.tomography_shots) +
                                                        " shots per multipole")
     << ")\n";
  for (const auto &s : r.states) {
    os << "  A = " << s.eigenvalue << "  residual " << s.residual;
    if (s.fidelity)
      os << "  fidelity " << *s.fidelity;
    if (s.overlap)
      os << "  overlap " << *s.overlap;
    if (s.multiplicity > 1)
      os << "  (degenerate, multiplicity " << s.multiplicity << ")";
    os << "\n    v = [";
    for (Eigen::Index i = 0; i < s.dominant_vector.size(); ++i)
      os << (i ? ", " : "") << s.dominant_vector(i).real() << (s.dominant_vector(i).imag() < 0 ? "-" : "+")
         << std::abs(s.dominant_vector(i).imag()) << "i";
    os << "]\n";
  }
  os << "\nelapsed " << std::setprecision(4) << r.elapsed_ms << " ms\n";
  return os.str();
}

} // namespace

std::string render_report(const DiagonalizationReport &report, ReportFormat format) {
  if (format == ReportFormat::Json)
    return report_to_json(report).dump(2) + "\n";
  return render_text(report);
}

void emit_report(const DiagonalizationReport &report, ReportFormat format,
                 const std::string &destination) {
  const std::string text = render_report(report, format);
  if (destination.empty() || destination == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(destination, std::ios::binary | std::ios::trunc);
  if (!out)
    throw std::runtime_error("cannot open '" + destination + "' for writing");
  out << text;
  out.flush();
  if (!out)
    throw std::runtime_error("failed writing '" + destination + "'");
}

json basis_to_json(const MultipoleBasis &basis) {
  json elements = json::array();
  for (const auto &e : basis.elements())
    elements.push_back({{"index", index_json(e.index)}, {"scale", e.scale},
                        {"matrix", matrix_json(e.matrix)}});
  return {{"schema", kReportSchema},
          {"spin", {{"s", basis.spin().label()}, {"twice_s", basis.spin().twice_s()},
                    {"N", basis.dim()}, {"hbar", basis.spin().hbar()}}},
          {"ordering", "rank-major, then lexicographic sorted components"},
          {"elements", elements}};
}

} // namespace qsgdiag
