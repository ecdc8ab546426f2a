// qsgdiag: diagonalize a hermitean matrix by simulated generalized
// Stern-Gerlach measurements.
//
// Exit status: 0 complete harvest, 2 incomplete harvest, 1 input or
// validation error.

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "qsgdiag/pipeline.hpp"

namespace {

constexpr int kExitInputError = 1;

std::uint64_t parse_seed(const std::string &text, const char *origin) {
  try {
    std::size_t used = 0;
    const auto value = std::stoull(text, &used, 0);
    if (used != text.size())
      throw std::invalid_argument("");
    return value;
  } catch (const std::exception &) {
    throw qsgdiag::ValidationError(std::string(origin) + " is not an unsigned 64-bit integer: '" +
                                   text + "'");
  }
}

std::size_t parse_shots(const std::string &text) {
  if (text == "exact")
    return qsgdiag::kExactShots;
  try {
    std::size_t used = 0;
    const auto value = std::stoull(text, &used);
    if (used != text.size() || value == 0)
      throw std::invalid_argument("");
    return value;
  } catch (const std::exception &) {
    throw qsgdiag::ValidationError("--shots expects a positive integer or 'exact', got '" + text +
                                   "'");
  }
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Quantum diagonalization of hermitean matrices by simulated Stern-Gerlach "
               "measurements"};
  app.require_subcommand(1);

  qsgdiag::RunConfig config;
  std::string input;
  std::string seed_text;
  std::string shots_text = "exact";
  std::string format = "text";
  std::string output = "-";

  auto *diag = app.add_subcommand("diagonalize", "Run the five-step quantum diagonalization");
  diag->add_option("--input", input, "Matrix JSON file, '-' for stdin, or inline JSON")->required();
  diag->add_option("--seed", seed_text, "Master seed (falls back to $QSGDIAG_SEED, then 1)");
  diag->add_option("--epsilon", config.epsilon, "Bound on the chance of missing any eigenvalue")
      ->capture_default_str();
  diag->add_option("--max-runs", config.max_runs, "Hard cap on measurement runs")
      ->capture_default_str();
  diag->add_option("--shots", shots_text, "Tomography shots per multipole, or 'exact'")
      ->capture_default_str();
  diag->add_option("--noise-sigma", config.noise_sigma, "Gaussian readout noise")
      ->capture_default_str();
  diag->add_option("--cluster-tol", config.cluster_tol, "Outcome grouping tolerance")
      ->capture_default_str();
  diag->add_option("--degeneracy-tol", config.degeneracy_tol,
                   "Relative gap below which eigenvalues share an eigenspace")
      ->capture_default_str();
  diag->add_option("--fd-step", config.fd_step, "Central-difference step")->capture_default_str();
  diag->add_option("--threads", config.threads, "Worker threads for shot loops")
      ->capture_default_str();
  diag->add_option("--format", format, "text or json")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  diag->add_option("--output", output, "Report destination ('-' for stdout)");
  diag->add_flag("--check-maxwell", config.check_maxwell,
                 "Check div/curl of the spin-1/2 Swift field");

  std::string spin_text;
  std::string basis_format = "json";
  auto *basis_cmd = app.add_subcommand("basis", "Dump the multipole basis for a spin");
  basis_cmd->add_option("--spin", spin_text, "Spin quantum number, e.g. 1/2, 1, 3/2")->required();
  basis_cmd->add_option("--format", basis_format, "json")
      ->check(CLI::IsMember({"json"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInputError;
  }

  try {
    if (*basis_cmd) {
      const auto basis = qsgdiag::build_basis(qsgdiag::SpinSystem::parse(spin_text));
      std::cout << qsgdiag::basis_to_json(basis).dump(2) << "\n";
      return 0;
    }

    if (!seed_text.empty()) {
      config.seed = parse_seed(seed_text, "--seed");
    } else if (const char *env = std::getenv("QSGDIAG_SEED"); env != nullptr && *env != '\0') {
      config.seed = parse_seed(env, "QSGDIAG_SEED");
    }
    config.tomography_shots = parse_shots(shots_text);

    const auto matrix = qsgdiag::load_matrix(input);
    const auto report = qsgdiag::diagonalize_quantum(matrix, config);
    qsgdiag::emit_report(report, qsgdiag::parse_report_format(format), output);
    if (!report.complete)
      std::cerr << "qsgdiag: harvest incomplete after " << report.runs << " runs\n";
    return report.exit_code();
  } catch (const qsgdiag::ValidationError &e) {
    std::cerr << "qsgdiag: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception &e) {
    std::cerr << "qsgdiag: " << e.what() << "\n";
    return kExitInputError;
  }
}
