#include "qsgdiag/apparatus_model.hpp"

#include <algorithm>
#include <cmath>

#include "qsgdiag/measurement_engine.hpp"

namespace qsgdiag {

namespace {

void require_step(double h) {
  if (!(h > 0.0) || !std::isfinite(h))
    throw ValidationError("finite-difference step must be positive, got " + std::to_string(h));
}

double expectation(const Matrix &op, const Vector &state) {
  return state.dot(op * state).real(); // dot conjugates the left operand
}

void require_normalized(const Vector &state) {
  const double norm = state.norm();
  if (norm == 0.0)
    throw ValidationError("state vector is zero");
  if (std::abs(norm - 1.0) > 1e-10)
    throw ValidationError("state vector is not normalized: |psi| = " + std::to_string(norm));
}

} // namespace

SwiftField::SwiftField(Vec3 b0, Vec3 k) : b0_(std::move(b0)), k_(std::move(k)) {
  if (!b0_.allFinite() || !k_.allFinite())
    throw ValidationError("Swift field vectors must be finite");
  const double dot = k_.dot(b0_);
  if (std::abs(dot) > 1e-12 * k_.norm() * b0_.norm())
    throw ValidationError("Swift field needs k perpendicular to B0 (div B = 2 k.B0 = " +
                          std::to_string(2.0 * dot) + ")");
}

Vec3 swift_field_at(const SwiftField &field, const Vec3 &r) {
  return (1.0 + field.k().dot(r)) * field.b0() + field.b0().dot(r) * field.k();
}

Vec3 perpendicular_gradient(const Vec3 &b0, double magnitude) {
  if (b0.norm() == 0.0)
    return Vec3(magnitude, 0.0, 0.0);
  // Cross with the coordinate axis least aligned with b0.
  Eigen::Index axis = 0;
  b0.cwiseAbs().minCoeff(&axis);
  Vec3 e = Vec3::Zero();
  e(axis) = 1.0;
  Vec3 k = b0.cross(e);
  k *= magnitude / k.norm();
  // Remove residual rounding along b0.
  k -= (k.dot(b0) / b0.squaredNorm()) * b0;
  return k + Vec3::Zero(); // -0 -> +0
}

MaxwellReport check_maxwell(const FieldEvaluator &field, std::span<const Vec3> points, double h) {
  require_step(h);
  MaxwellReport report;
  report.step = h;
  report.sample_points.assign(points.begin(), points.end());
  for (const Vec3 &r : points) {
    // jacobian(i, j) = dB_i / dr_j
    Eigen::Matrix3d jacobian;
    for (int j = 0; j < 3; ++j) {
      Vec3 forward = r;
      Vec3 backward = r;
      forward(j) += h;
      backward(j) -= h;
      jacobian.col(j) = (field(forward) - field(backward)) / (2.0 * h);
    }
    const double div = jacobian.trace();
    const Vec3 curl(jacobian(2, 1) - jacobian(1, 2), jacobian(0, 2) - jacobian(2, 0),
                    jacobian(1, 0) - jacobian(0, 1));
    report.max_div = std::max(report.max_div, std::abs(div));
    report.max_curl = std::max(report.max_curl, curl.norm());
  }
  return report;
}

FieldProfileSet::FieldProfileSet(SpinSystem spin, std::vector<double> coeffs, int gradient_axis)
    : spin_(spin), coeffs_(std::move(coeffs)), gradient_axis_(gradient_axis) {
  const auto n = static_cast<std::size_t>(spin_.dim());
  if (coeffs_.size() != n * n)
    throw ValidationError("field profiles need " + std::to_string(n * n) + " coefficients, got " +
                          std::to_string(coeffs_.size()));
  if (gradient_axis_ < 1 || gradient_axis_ > 3)
    throw ValidationError("gradient axis must be 1, 2 or 3");
}

double FieldProfileSet::value(std::size_t nu, const Vec3 &r) const {
  return coeffs_.at(nu) * (1.0 + r(gradient_axis_ - 1));
}

double FieldProfileSet::derivative(std::size_t nu, int axis, const Vec3 &) const {
  return axis == gradient_axis_ ? coeffs_.at(nu) : 0.0;
}

HermitianMatrix local_hamiltonian(const FieldProfileSet &profiles, const MultipoleBasis &basis,
                                  const Vec3 &r) {
  if (profiles.size() != basis.size())
    throw ValidationError("local_hamiltonian: " + std::to_string(profiles.size()) +
                          " profiles for a basis of " + std::to_string(basis.size()));
  const int n = basis.dim();
  Matrix h = Matrix::Zero(n, n);
  for (std::size_t nu = 0; nu < basis.size(); ++nu)
    h += profiles.value(nu, r) * basis[nu].matrix;
  return HermitianMatrix(std::move(h));
}

double beam_force(const FieldProfileSet &profiles, const MultipoleBasis &basis,
                  const Vector &state, double h) {
  require_step(h);
  require_normalized(state);
  if (state.size() != basis.dim())
    throw ValidationError("beam_force: state dimension does not match basis");
  Vec3 forward = Vec3::Zero();
  Vec3 backward = Vec3::Zero();
  forward(profiles.gradient_axis() - 1) = h;
  backward(profiles.gradient_axis() - 1) = -h;
  const double up = expectation(local_hamiltonian(profiles, basis, forward).entries(), state);
  const double down = expectation(local_hamiltonian(profiles, basis, backward).entries(), state);
  return -(up - down) / (2.0 * h);
}

EigenvaluePair spin_half_levels(const SwiftField &field, const Vec3 &r,
                                const PhysicalConstants &constants) {
  const double e = 0.5 * std::abs(constants.hbar * constants.g * constants.mu_b) *
                   (1.0 + field.k().dot(r)) * field.b0().norm();
  return {e, -e};
}

HermitianMatrix swift_hamiltonian(const SwiftField &field, const Vec3 &r,
                                  const PhysicalConstants &constants) {
  const auto ops = spin_operators(SpinSystem(1, constants.hbar));
  const Vec3 b = swift_field_at(field, r);
  const double coupling = -constants.g * constants.mu_b;
  return HermitianMatrix(coupling * (b(0) * ops.s1 + b(1) * ops.s2 + b(2) * ops.s3));
}

Vector swift_eigenstate(const SwiftField &field, const PhysicalConstants &constants, bool upper) {
  const auto eig = jacobi_eigensolver(swift_hamiltonian(field, Vec3::Zero(), constants).entries());
  return eig.vectors.col(upper ? 1 : 0);
}

Vec3 swift_beam_force(const SwiftField &field, const PhysicalConstants &constants,
                      const Vector &state, double h) {
  require_step(h);
  require_normalized(state);
  if (state.size() != 2)
    throw ValidationError("swift_beam_force: spin-1/2 state must have 2 components");
  Vec3 force;
  for (int j = 0; j < 3; ++j) {
    Vec3 forward = Vec3::Zero();
    Vec3 backward = Vec3::Zero();
    forward(j) = h;
    backward(j) = -h;
    const double up = expectation(swift_hamiltonian(field, forward, constants).entries(), state);
    const double down = expectation(swift_hamiltonian(field, backward, constants).entries(), state);
    force(j) = -(up - down) / (2.0 * h);
  }
  return force;
}

} // namespace qsgdiag
