#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "qsgdiag/apparatus_model.hpp"
#include "qsgdiag/measurement_engine.hpp"
#include "qsgdiag/multipole_basis.hpp"
#include "qsgdiag/observable_map.hpp"
#include "qsgdiag/tomography.hpp"

namespace qsgdiag {

inline constexpr const char *kReportSchema = "qsgdiag/1";

struct RunConfig {
  std::uint64_t seed = 1;
  double epsilon = 1e-6;
  std::size_t max_runs = 1'000'000;
  std::size_t tomography_shots = kExactShots;
  double noise_sigma = 0.0;
  double cluster_tol = 0.0;
  double degeneracy_tol = 1e-9;
  PhysicalConstants constants;
  double fd_step = kDefaultFiniteDifferenceStep;
  bool check_maxwell = false;
  /// Worker threads for the measurement and tomography shot loops. Results
  /// do not depend on it.
  unsigned threads = 1;

  void validate() const;
};

/// Input text that is not valid JSON; carries a 1-based position.
class ParseError : public ValidationError {
public:
  ParseError(const std::string &message, std::size_t line, std::size_t column);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

/// {"matrix": [[entry, ...], ...]} where an entry is [re, im] or a plain real
/// number.
HermitianMatrix parse_matrix_json(std::string_view text);

/// `source` is a file path, "-" for stdin, or inline JSON text (starting with
/// '{').
HermitianMatrix load_matrix(const std::string &source);

/// FNV-1a 64 over N and the IEEE bit patterns of the entries, row-major.
std::string matrix_digest(const HermitianMatrix &a);

struct EigenvalueReport {
  double estimate;
  std::size_t count;
  double spread;
  bool oracle_match;
  double oracle_value;
  int multiplicity;
};

struct ForceCheck {
  double oracle_eigenvalue;
  double force;
  double expected; // -A_n
  double abs_error;
};

struct StateReport {
  double eigenvalue; // harvested estimate
  std::size_t eigenspace;
  int multiplicity;
  std::optional<double> fidelity;
  std::optional<double> overlap;
  double residual;
  double min_eigenvalue;
  bool degenerate_dominant;
  Vector dominant_vector;
  std::vector<double> expectations;
  std::vector<double> standard_errors;
};

struct SpinHalfReport {
  double a;
  Vec3 b0;
  Vec3 k;
  double e_plus;
  double e_minus;
  /// a + E_pm from the closed-form Zeeman levels.
  std::vector<double> field_eigenvalues;
  /// a + E harvested from a simulated Stern-Gerlach run on -g mu_B B0.S.
  std::vector<double> measured_eigenvalues;
  bool measured_complete;
  Vec3 force_plus;
  Vec3 force_minus;
  double expected_force_magnitude; // (hbar/2) |g mu_B| |B0| |k|
};

struct DiagonalizationReport {
  std::string input_digest;
  SpinSystem spin{1};
  RunConfig config;

  // step 1 and 2
  std::vector<MultipoleIndex> indices;
  std::vector<double> coefficients;
  double reconstruction_defect = 0.0;
  std::optional<SpinHalfReport> spin_half;

  // step 3
  double center_defect = 0.0;
  std::vector<ForceCheck> force_checks;
  std::optional<MaxwellReport> maxwell;

  // step 4
  std::size_t required_runs = 0;
  std::size_t runs = 0;
  double miss_bound = 0.0;
  bool capped = false;
  bool complete = false;
  bool overlap_warning = false;
  std::vector<std::size_t> counts_per_eigenspace;
  std::vector<EigenvalueReport> eigenvalues;
  std::vector<double> oracle_eigenvalues;

  // step 5
  std::vector<StateReport> states;

  double elapsed_ms = 0.0;

  /// 0 complete, 2 incomplete harvest.
  int exit_code() const { return complete ? 0 : 2; }
  std::vector<double> eigenvalue_estimates() const;
};

/// Runs the five steps: multipole decomposition, observable identification,
/// apparatus tuning with force checks, eigenvalue sampling from I/N, and
/// post-selected tomography of each eigenstate.
DiagonalizationReport diagonalize_quantum(const HermitianMatrix &a, const RunConfig &config);

enum class ReportFormat { Text, Json };

ReportFormat parse_report_format(const std::string &name);

/// Keys are sorted, so equal reports serialize to identical bytes. Timing
/// lives under "timing" only.
nlohmann::json report_to_json(const DiagonalizationReport &report);
std::string render_report(const DiagonalizationReport &report, ReportFormat format);

/// destination "" or "-" writes to stdout. Throws std::runtime_error when the
/// file cannot be written.
void emit_report(const DiagonalizationReport &report, ReportFormat format,
                 const std::string &destination);

nlohmann::json basis_to_json(const MultipoleBasis &basis);

} // namespace qsgdiag
