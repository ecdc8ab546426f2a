#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qsgdiag/tomography.hpp"
#include "test_support.hpp"

using namespace qsgdiag;
using qsgdiag::testing::from_rows;
using qsgdiag::testing::pauli;
using qsgdiag::testing::random_hermitian;
using qsgdiag::testing::reference_solver;

TEST(Postselect, ProjectorOverTrace) {
  const auto s = oracle_spectrum(HermitianMatrix(from_rows({{2.0, 1.0}, {1.0, 2.0}})));
  const auto rho = postselect(s, 1);
  EXPECT_LT(max_abs_diff(rho.entries(), from_rows({{0.5, 0.5}, {0.5, 0.5}})), 1e-14);

  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 2.0, 2.0, 5.0;
  const auto degenerate = postselect(oracle_spectrum(HermitianMatrix(d)), 0);
  Matrix expected = Matrix::Zero(3, 3);
  expected(0, 0) = expected(1, 1) = 0.5;
  EXPECT_LT(max_abs_diff(degenerate.entries(), expected), 1e-15);
  EXPECT_THROW(postselect(oracle_spectrum(HermitianMatrix(d)), 2), ValidationError);
}

TEST(EstimateExpectations, ExactModeIsTraceWithState) {
  std::mt19937_64 rng(1);
  for (int n = 2; n <= 5; ++n) {
    const auto a = random_hermitian(n, rng);
    const auto s = oracle_spectrum(a);
    const auto rho = postselect(s, 0);
    const auto &basis = shared_basis(SpinSystem::from_dimension(n));
    const auto est = estimate_expectations(rho, *basis, kExactShots, 1);
    EXPECT_EQ(est.shots_per_multipole, kExactShots);
    ASSERT_EQ(est.values.size(), static_cast<std::size_t>(n * n));
    EXPECT_NEAR(est.values[0], 1.0, 1e-14);
    for (std::size_t nu = 0; nu < est.values.size(); ++nu) {
      EXPECT_NEAR(est.values[nu], (rho.entries() * (*basis)[nu].matrix).trace().real(), 1e-14);
      EXPECT_EQ(est.standard_errors[nu], 0.0);
    }
    const auto state = reconstruct_state(est, *basis, &s.projectors[0]);
    EXPECT_LT(max_abs_diff(state.rho_hat, rho.entries()), 1e-12);
    ASSERT_TRUE(state.fidelity_vs_oracle.has_value());
    EXPECT_NEAR(*state.fidelity_vs_oracle, 1.0, 1e-12);
  }
}

TEST(EstimateExpectations, MaximallyMixedStateHasNoMultipoles) {
  for (int n = 2; n <= 6; ++n) {
    const auto &basis = shared_basis(SpinSystem::from_dimension(n));
    const auto est = estimate_expectations(DensityMatrix::maximally_mixed(n), *basis, kExactShots, 1);
    EXPECT_EQ(est.values[0], 1.0);
    for (std::size_t nu = 1; nu < est.values.size(); ++nu)
      EXPECT_NEAR(est.values[nu], 0.0, 1e-15);
  }
}

TEST(EstimateExpectations, SampledUpperStateOfSymmetricMatrix) {
  const auto s = oracle_spectrum(HermitianMatrix(from_rows({{2.0, 1.0}, {1.0, 2.0}})));
  const auto rho = postselect(s, 1);
  const auto &basis = shared_basis(SpinSystem(1));
  const auto est = estimate_expectations(rho, *basis, 100000, 7);
  // The state is an eigenvector of sigma_1, so every shot returns +1.
  EXPECT_NEAR(est.values[1], 1.0, 1e-12);
  EXPECT_NEAR(est.values[2], 0.0, 0.02);
  EXPECT_NEAR(est.values[3], 0.0, 0.02);
  EXPECT_EQ(est.values[0], 1.0);
  EXPECT_EQ(est.standard_errors[0], 0.0);
  EXPECT_NEAR(est.standard_errors[2], 1.0 / std::sqrt(100000.0), 1e-4);
}

TEST(EstimateExpectations, IsDeterministicInSeedAndThreadCount) {
  std::mt19937_64 rng(2);
  const auto s = oracle_spectrum(random_hermitian(4, rng));
  const auto rho = postselect(s, 2);
  const auto &basis = shared_basis(SpinSystem(3));
  const auto e1 = estimate_expectations(rho, *basis, 2000, 5, {1});
  const auto e4 = estimate_expectations(rho, *basis, 2000, 5, {4});
  EXPECT_EQ(e1.values, e4.values);
  EXPECT_EQ(e1.standard_errors, e4.standard_errors);
  const auto other = estimate_expectations(rho, *basis, 2000, 6, {1});
  EXPECT_NE(e1.values, other.values);
}

TEST(EstimateExpectations, RejectsDimensionMismatch) {
  const auto &basis = shared_basis(SpinSystem(1));
  EXPECT_THROW(estimate_expectations(DensityMatrix::maximally_mixed(3), *basis, kExactShots, 1),
               ValidationError);
}

TEST(ReconstructState, SampledFidelityIsHighForSmallSystems) {
  std::mt19937_64 rng(3);
  for (int n = 2; n <= 4; ++n) {
    const auto a = random_hermitian(n, rng);
    const auto s = oracle_spectrum(a);
    const auto &basis = shared_basis(SpinSystem::from_dimension(n));
    for (std::size_t k = 0; k < s.size(); ++k) {
      const auto est = estimate_expectations(postselect(s, k), *basis, 100000, 10 + k);
      const auto state = reconstruct_state(est, *basis, &s.projectors[k]);
      ASSERT_TRUE(state.fidelity_vs_oracle.has_value());
      EXPECT_GE(*state.fidelity_vs_oracle, 0.99) << n << " " << k;
      EXPECT_NEAR(state.rho_hat.trace().real(), 1.0, 1e-12);
      EXPECT_LT(max_abs_diff(state.rho_hat, state.rho_hat.adjoint()), 1e-14);
      EXPECT_NEAR(state.dominant_vector.norm(), 1.0, 1e-12);
      EXPECT_LT(eigenvector_residual(a, s.values[k], state.dominant_vector), 0.1 * (1 + a.entries().norm()));
    }
  }
}

TEST(ReconstructState, DegenerateEigenspaceIsFlagged) {
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 2.0, 2.0, 5.0;
  const auto s = oracle_spectrum(HermitianMatrix(d));
  const auto &basis = shared_basis(SpinSystem(2));
  const auto est = estimate_expectations(postselect(s, 0), *basis, kExactShots, 1);
  const auto state = reconstruct_state(est, *basis);
  EXPECT_EQ(state.dominant_multiplicity, 2);
  EXPECT_FALSE(state.fidelity_vs_oracle.has_value());
  EXPECT_NEAR(state.dominant_eigenvalue, 0.5, 1e-14);
  EXPECT_NEAR(state.min_eigenvalue, 0.0, 1e-14);
}

TEST(EigenvectorResidual, Cases) {
  const HermitianMatrix a(from_rows({{2.0, 1.0}, {1.0, 2.0}}));
  Vector v(2);
  v << 1.0, 1.0;
  v /= std::sqrt(2.0);
  EXPECT_NEAR(eigenvector_residual(a, 3.0, v), 0.0, 1e-15);
  // Wrong eigenvalue by one: ||(A - (lambda+1)) v|| = ||v|| = 1.
  EXPECT_GE(eigenvector_residual(a, 4.0, v), 1.0 - 1e-15);
  Vector w(2);
  w << 1.0, 0.0;
  EXPECT_NEAR(eigenvector_residual(a, 2.0, w), 1.0, 1e-15);
  EXPECT_THROW(eigenvector_residual(a, 3.0, Vector::Zero(2)), ValidationError);
  EXPECT_THROW(eigenvector_residual(a, 3.0, 2.0 * v), ValidationError);
  EXPECT_THROW(eigenvector_residual(a, 3.0, Vector::Ones(3).normalized()), ValidationError);
}

TEST(EigenvectorResidual, AgreesWithReferenceEigenpairs) {
  std::mt19937_64 rng(4);
  for (int n = 2; n <= 8; ++n) {
    const auto a = random_hermitian(n, rng);
    const auto ref = reference_solver(a.entries());
    for (int k = 0; k < n; ++k)
      EXPECT_LT(eigenvector_residual(a, ref.eigenvalues()(k), ref.eigenvectors().col(k)), 1e-12);
  }
}

TEST(ReconstructState, FidelityAgainstDegenerateAndWrongProjectors) {
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 2.0, 2.0, 5.0;
  const auto s = oracle_spectrum(HermitianMatrix(d));
  const auto &basis = shared_basis(SpinSystem(2));
  const auto est = estimate_expectations(postselect(s, 0), *basis, kExactShots, 1);
  const auto right = reconstruct_state(est, *basis, &s.projectors[0]);
  EXPECT_NEAR(*right.fidelity_vs_oracle, 1.0, 1e-12);
  // Overlap of P/2 with P is Tr[P]/2 = 1.
  EXPECT_NEAR(*right.overlap_vs_oracle, 1.0, 1e-12);
  const auto wrong = reconstruct_state(est, *basis, &s.projectors[1]);
  EXPECT_NEAR(*wrong.fidelity_vs_oracle, 0.0, 1e-12);
  EXPECT_NEAR(*wrong.overlap_vs_oracle, 0.0, 1e-12);
}

TEST(ReconstructState, SpinHalfFidelityIsEigenvectorOverlap) {
  std::mt19937_64 rng(5);
  const auto a = random_hermitian(2, rng);
  const auto s = oracle_spectrum(a);
  const auto ref = reference_solver(a.entries());
  const auto &basis = shared_basis(SpinSystem(1));
  const auto est = estimate_expectations(postselect(s, 1), *basis, 4000, 3);
  const auto state = reconstruct_state(est, *basis, &s.projectors[1]);
  const Vector psi = ref.eigenvectors().col(1);
  EXPECT_NEAR(*state.fidelity_vs_oracle, std::norm(psi.dot(state.dominant_vector)), 1e-12);
  EXPECT_NEAR(*state.overlap_vs_oracle,
              std::min(1.0, (psi.adjoint() * state.rho_hat * psi)(0, 0).real()), 1e-12);
}
