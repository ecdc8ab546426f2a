#include "qsgdiag/multipole_basis.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

namespace qsgdiag {

SpinSystem::SpinSystem(int twice_s, double hbar) : twice_s_(twice_s), hbar_(hbar) {
  if (twice_s_ < 1)
    throw ValidationError("spin must satisfy N = 2s+1 >= 2, got 2s = " +
                          std::to_string(twice_s_));
  if (!(hbar_ != 0.0) || !std::isfinite(hbar_))
    throw ValidationError("hbar must be finite and nonzero");
}

SpinSystem SpinSystem::from_dimension(int n, double hbar) {
  if (n < 2)
    throw ValidationError("dimension must be >= 2, got " + std::to_string(n));
  return SpinSystem(n - 1, hbar);
}

SpinSystem SpinSystem::parse(const std::string &text, double hbar) {
  const auto slash = text.find('/');
  try {
    std::size_t used = 0;
    if (slash != std::string::npos) {
      const int num = std::stoi(text.substr(0, slash), &used);
      if (used != slash || text.substr(slash + 1) != "2")
        throw ValidationError("");
      return SpinSystem(num, hbar);
    }
    const double value = std::stod(text, &used);
    if (used != text.size())
      throw ValidationError("");
    const double twice = 2.0 * value;
    if (twice != std::round(twice))
      throw ValidationError("");
    return SpinSystem(static_cast<int>(std::lround(twice)), hbar);
  } catch (const ValidationError &e) {
    if (std::string(e.what()).empty())
      throw ValidationError("not a half-integer spin: '" + text + "'");
    throw;
  } catch (const std::logic_error &) {
    throw ValidationError("not a half-integer spin: '" + text + "'");
  }
}

std::string SpinSystem::label() const {
  if (twice_s_ % 2 == 0)
    return std::to_string(twice_s_ / 2);
  return std::to_string(twice_s_) + "/2";
}

const Matrix &SpinOperators::operator[](int axis) const {
  switch (axis) {
  case 1:
    return s1;
  case 2:
    return s2;
  case 3:
    return s3;
  default:
    throw ValidationError("spin axis must be 1, 2 or 3, got " + std::to_string(axis));
  }
}

SpinOperators spin_operators(const SpinSystem &spin) {
  const int n = spin.dim();
  const double s = spin.s();
  const double hbar = spin.hbar();
  // Row i holds m = s - i.
  Matrix raise = Matrix::Zero(n, n);
  Matrix s3 = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double m = s - i;
    s3(i, i) = hbar * m;
    if (i > 0)
      raise(i - 1, i) = hbar * std::sqrt(s * (s + 1) - m * (m + 1));
  }
  const Matrix lower = raise.adjoint();
  const Complex half_i(0.0, 0.5);
  SpinOperators ops;
  ops.s1 = 0.5 * (raise + lower);
  ops.s2 = -half_i * (raise - lower);
  ops.s3 = std::move(s3);
  return ops;
}

namespace {

using Counts = std::array<int, 3>;

// Sum over all distinct words with the given letter counts; splitting by the
// first letter gives W(n) = sum_j S_j W(n - e_j).
const Matrix &word_sum(const SpinOperators &ops, const Counts &counts,
                       std::map<Counts, Matrix> &memo) {
  if (auto it = memo.find(counts); it != memo.end())
    return it->second;
  const auto n = ops.s1.rows();
  Matrix total = Matrix::Zero(n, n);
  if (counts[0] + counts[1] + counts[2] == 0) {
    total = Matrix::Identity(n, n);
  } else {
    for (int j = 0; j < 3; ++j) {
      if (counts[j] == 0)
        continue;
      Counts rest = counts;
      --rest[j];
      total += ops[j + 1] * word_sum(ops, rest, memo);
    }
  }
  return memo.emplace(counts, std::move(total)).first->second;
}

double multinomial(const Counts &counts) {
  double result = 1.0;
  int k = 0;
  for (int c : counts)
    for (int i = 1; i <= c; ++i)
      result = result * (++k) / i;
  return result;
}

void make_exactly_hermitean(Matrix &m) { m = (0.5 * (m + m.adjoint())).eval(); }

double trace_norm(const Matrix &m) { return std::sqrt(std::max(trace_inner(m, m), 0.0)); }

// Removes the components of x along orthonormal elements [begin, end).
void project_out(Matrix &x, const std::vector<MultipoleElement> &elements,
                 std::size_t begin, std::size_t end) {
  for (int pass = 0; pass < 2; ++pass)
    for (std::size_t nu = begin; nu < end; ++nu)
      x -= trace_inner(elements[nu].matrix, x) * elements[nu].matrix;
}

// Sorted multisets of {1,2,3} of size `rank`, lexicographic.
std::vector<std::vector<int>> sorted_multisets(int rank) {
  std::vector<std::vector<int>> out;
  std::vector<int> current;
  auto rec = [&](auto &&self, int lowest) -> void {
    if (static_cast<int>(current.size()) == rank) {
      out.push_back(current);
      return;
    }
    for (int j = lowest; j <= 3; ++j) {
      current.push_back(j);
      self(self, j);
      current.pop_back();
    }
  };
  rec(rec, 1);
  return out;
}

} // namespace

Matrix symmetrized_product(const SpinSystem &spin, std::span<const int> axes) {
  if (static_cast<int>(axes.size()) > spin.twice_s())
    throw ValidationError("symmetrized product of rank " + std::to_string(axes.size()) +
                          " exceeds 2s = " + std::to_string(spin.twice_s()));
  Counts counts{0, 0, 0};
  for (int axis : axes) {
    if (axis < 1 || axis > 3)
      throw ValidationError("spin axis must be 1, 2 or 3, got " + std::to_string(axis));
    ++counts[axis - 1];
  }
  const auto ops = spin_operators(spin);
  std::map<Counts, Matrix> memo;
  return word_sum(ops, counts, memo) / multinomial(counts);
}

std::string MultipoleIndex::label() const {
  std::ostringstream os;
  os << '(' << rank;
  for (std::size_t i = 0; i < components.size(); ++i)
    os << (i == 0 ? ';' : ',') << components[i];
  os << ')';
  return os.str();
}

MultipoleBasis::MultipoleBasis(SpinSystem spin, std::vector<MultipoleElement> elements)
    : spin_(spin), elements_(std::move(elements)) {
  const auto n = static_cast<std::size_t>(spin_.dim());
  if (elements_.size() != n * n)
    throw ValidationError("multipole basis for N = " + std::to_string(n) + " needs " +
                          std::to_string(n * n) + " elements, got " +
                          std::to_string(elements_.size()));
  for (const auto &e : elements_)
    if (e.matrix.rows() != static_cast<Eigen::Index>(n) ||
        e.matrix.cols() != static_cast<Eigen::Index>(n))
      throw ValidationError("multipole element " + e.index.label() + " has wrong shape");
}

double trace_inner(const Matrix &x, const Matrix &y) {
  // Tr[XY] = sum_ij X_ij Y_ji
  return (x.cwiseProduct(y.transpose())).sum().real() / static_cast<double>(x.rows());
}

MultipoleBasis build_basis(const SpinSystem &spin) {
  const int n = spin.dim();
  const auto ops = spin_operators(spin);

  std::vector<MultipoleElement> elements;
  elements.reserve(static_cast<std::size_t>(n) * n);
  elements.push_back({MultipoleIndex{0, {}}, Matrix::Identity(n, n), 1.0});

  // Trace-subtracted (rank-projected) symmetrized products of the previous
  // rank, keyed by sorted components. The rank-a part of Sym(j, rest) equals
  // the rank-a part of {S_j, P_{a-1} Sym(rest)}/2, since the two differ by
  // commutators of lower degree.
  std::map<std::vector<int>, Matrix> previous;
  previous.emplace(std::vector<int>{}, Matrix::Identity(n, n));

  for (int rank = 1; rank <= spin.twice_s(); ++rank) {
    const std::size_t lower_end = elements.size();
    std::map<std::vector<int>, Matrix> current;
    for (const auto &components : sorted_multisets(rank)) {
      const std::vector<int> rest(components.begin() + 1, components.end());
      const Matrix &tail = previous.at(rest);
      const Matrix &head = ops[components.front()];
      Matrix raw = 0.5 * (head * tail + tail * head);
      project_out(raw, elements, 0, lower_end);
      make_exactly_hermitean(raw);

      Matrix candidate = raw;
      project_out(candidate, elements, lower_end, elements.size());
      const double raw_norm = trace_norm(raw);
      const double norm = trace_norm(candidate);
      if (raw_norm > 0.0 && norm > 1e-8 * raw_norm) {
        candidate /= norm;
        make_exactly_hermitean(candidate);
        elements.push_back({MultipoleIndex{rank, components}, std::move(candidate), 1.0 / norm});
      }
      current.emplace(components, std::move(raw));
    }
    const auto found = elements.size() - lower_end;
    if (found != static_cast<std::size_t>(2 * rank + 1))
      throw std::logic_error("multipole rank " + std::to_string(rank) + " for spin " +
                             spin.label() + " produced " + std::to_string(found) +
                             " independent elements, expected " +
                             std::to_string(2 * rank + 1));
    previous = std::move(current);
  }
  return MultipoleBasis(spin, std::move(elements));
}

std::shared_ptr<const MultipoleBasis> shared_basis(const SpinSystem &spin) {
  static std::mutex mutex;
  static std::map<std::pair<int, double>, std::shared_ptr<const MultipoleBasis>> cache;
  const std::pair key{spin.twice_s(), spin.hbar()};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end())
      return it->second;
  }
  auto built = std::make_shared<const MultipoleBasis>(build_basis(spin));
  std::lock_guard lock(mutex);
  return cache.emplace(key, std::move(built)).first->second;
}

CoefficientVector decompose(const HermitianMatrix &a, const MultipoleBasis &basis) {
  if (a.dim() != basis.dim())
    throw ValidationError("decompose: matrix dimension " + std::to_string(a.dim()) +
                          " does not match basis dimension " + std::to_string(basis.dim()));
  const double n = basis.dim();
  const double tolerance = 1e-10 * std::max(1.0, max_abs(a.entries()));
  CoefficientVector out{basis.spin(), {}};
  out.values.reserve(basis.size());
  for (const auto &element : basis.elements()) {
    const Complex value = (a.entries().cwiseProduct(element.matrix.transpose())).sum() / n;
    if (std::abs(value.imag()) > tolerance)
      throw ValidationError("decompose: coefficient " + element.index.label() +
                            " has imaginary part " + std::to_string(value.imag()));
    out.values.push_back(value.real());
  }
  return out;
}

HermitianMatrix reconstruct(const CoefficientVector &coeffs, const MultipoleBasis &basis) {
  if (coeffs.values.size() != basis.size())
    throw ValidationError("reconstruct: " + std::to_string(coeffs.values.size()) +
                          " coefficients for a basis of " + std::to_string(basis.size()));
  const int n = basis.dim();
  Matrix sum = Matrix::Zero(n, n);
  for (std::size_t nu = 0; nu < basis.size(); ++nu)
    sum += coeffs.values[nu] * basis[nu].matrix;
  return HermitianMatrix(std::move(sum));
}

} // namespace qsgdiag
