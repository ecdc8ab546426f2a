#include "qsgdiag/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qsgdiag {

double max_abs(const Matrix &m) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      best = std::max(best, std::abs(m(i, j)));
  return best;
}

double hermiticity_defect(const Matrix &m) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i; j < m.cols(); ++j)
      worst = std::max(worst, std::abs(m(i, j) - std::conj(m(j, i))));
  return worst;
}

HermitianMatrix::HermitianMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols())
    throw ValidationError("matrix is not square: " +
                          std::to_string(entries_.rows()) + "x" +
                          std::to_string(entries_.cols()));
  if (entries_.rows() == 0)
    throw ValidationError("matrix is empty");
  for (Eigen::Index j = 0; j < entries_.cols(); ++j)
    for (Eigen::Index i = 0; i < entries_.rows(); ++i)
      if (!std::isfinite(entries_(i, j).real()) ||
          !std::isfinite(entries_(i, j).imag()))
        throw ValidationError("matrix has non-finite entry at (" +
                              std::to_string(i) + "," + std::to_string(j) +
                              ")");
  const double scale = max_abs(entries_);
  const double defect = hermiticity_defect(entries_);
  if (defect > kHermiticityTolerance * scale) {
    std::ostringstream os;
    os << "matrix is not hermitean: max |A_ij - conj(A_ji)| = " << defect << " exceeds "
       << kHermiticityTolerance << " relative to max |A_ij| = " << scale;
    throw ValidationError(os.str());
  }
}

double max_abs_diff(const Matrix &a, const Matrix &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ValidationError("max_abs_diff: shape mismatch");
  return max_abs(a - b);
}

} // namespace qsgdiag
