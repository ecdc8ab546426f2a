#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qsgdiag/observable_map.hpp"
#include "test_support.hpp"

using namespace qsgdiag;
using qsgdiag::testing::from_rows;
using qsgdiag::testing::pauli;
using qsgdiag::testing::random_hermitian;
using qsgdiag::testing::reference_eigenvalues;

namespace {
const Matrix kExample = from_rows({{1.0, Complex(0, -2)}, {Complex(0, 2), 3.0}});
}

TEST(ToObservable, PauliZIsABasisElement) {
  const auto obs = to_observable(HermitianMatrix(pauli(3)));
  EXPECT_EQ(obs.spin.dim(), 2);
  EXPECT_EQ(obs.coeffs.values, (std::vector<double>{0, 0, 0, 1}));
}

TEST(ToObservable, WorkedExampleCoefficients) {
  const auto obs = to_observable(HermitianMatrix(kExample));
  EXPECT_EQ(obs.coeffs.values, (std::vector<double>{2, 0, 2, -1}));
}

TEST(ToObservable, FiveByFiveIsSpinTwo) {
  std::mt19937_64 rng(5);
  const auto a = random_hermitian(5, rng);
  const auto obs = to_observable(a);
  EXPECT_EQ(obs.spin.label(), "2");
  EXPECT_EQ(obs.coeffs.values.size(), 25u);
  EXPECT_LT(max_abs_diff(obs.matrix().entries(), a.entries()), 1e-10);
}

TEST(ToObservable, RejectsZeroConstants) {
  EXPECT_THROW(to_observable(HermitianMatrix(pauli(1)), PhysicalConstants{0.0, 1.0, 1.0}),
               ValidationError);
}

TEST(ToObservable, ScalarMatricesOnlyHaveMonopole) {
  for (int n = 2; n <= 6; ++n) {
    const auto obs = to_observable(HermitianMatrix(-1.5 * Matrix::Identity(n, n)));
    EXPECT_DOUBLE_EQ(obs.coeffs.values[0], -1.5);
    for (std::size_t nu = 1; nu < obs.coeffs.values.size(); ++nu)
      EXPECT_NEAR(obs.coeffs.values[nu], 0.0, 1e-14);
  }
}

TEST(ToObservable, DistinctMatricesGiveDistinctCoefficients) {
  // Orthonormality makes ‖Δa‖_2 = sqrt((1/N) Tr[ΔA^2]) >= ‖ΔA‖_F / N.
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 5;
    const auto a = random_hermitian(n, rng);
    const auto b = random_hermitian(n, rng);
    const auto ca = to_observable(a).coeffs.values;
    const auto cb = to_observable(b).coeffs.values;
    double diff = 0.0;
    for (std::size_t i = 0; i < ca.size(); ++i)
      diff += (ca[i] - cb[i]) * (ca[i] - cb[i]);
    EXPECT_GE(std::sqrt(diff), (a.entries() - b.entries()).norm() / n - 1e-12);
  }
}

TEST(FieldForSpinHalf, PauliZ) {
  const auto f = field_for_spin_half(to_observable(HermitianMatrix(pauli(3))));
  EXPECT_EQ(f.a, 0.0);
  EXPECT_EQ(f.b0, Vec3(0, 0, -2));
}

TEST(FieldForSpinHalf, IdentityHasNoField) {
  const auto f = field_for_spin_half(to_observable(HermitianMatrix(Matrix::Identity(2, 2))));
  EXPECT_EQ(f.a, 1.0);
  EXPECT_EQ(f.b0, Vec3::Zero());
}

TEST(FieldForSpinHalf, WorkedExample) {
  const auto f = field_for_spin_half(to_observable(HermitianMatrix(kExample)));
  EXPECT_EQ(f.a, 2.0);
  EXPECT_EQ(f.b0, Vec3(0, -4, 2));
}

TEST(FieldForSpinHalf, ReproducesMatrixWithNonUnitConstants) {
  const PhysicalConstants c{2.0, 0.5788, 0.3};
  const auto obs = to_observable(HermitianMatrix(kExample), c);
  const auto f = field_for_spin_half(obs);
  // A = a I - g mu_B B0 . S with S = hbar sigma / 2.
  Matrix rebuilt = f.a * pauli(0);
  for (int j = 1; j <= 3; ++j)
    rebuilt -= c.g * c.mu_b * f.b0(j - 1) * 0.5 * c.hbar * pauli(j);
  EXPECT_LT(max_abs_diff(rebuilt, kExample), 1e-14);
}

TEST(FieldForSpinHalf, RejectsLargerSpins) {
  EXPECT_THROW(field_for_spin_half(to_observable(HermitianMatrix(Matrix::Identity(3, 3)))),
               ValidationError);
}

TEST(ShiftRelation, AddsOffset) {
  EXPECT_EQ(shift_relation(1.0, 2.0), 3.0);
  EXPECT_DOUBLE_EQ(shift_relation(-std::sqrt(5.0), 2.0), 2.0 - std::sqrt(5.0));
  EXPECT_EQ(shift_relation(0.0, 0.75), 0.75);
}

TEST(ClosedForm2x2, Examples) {
  const auto sym = closed_form_2x2(HermitianMatrix(from_rows({{2.0, 1.0}, {1.0, 2.0}})));
  EXPECT_EQ(sym.plus, 3.0);
  EXPECT_EQ(sym.minus, 1.0);
  const auto ex = closed_form_2x2(HermitianMatrix(kExample));
  EXPECT_NEAR(ex.plus, 4.23606797749979, 1e-14);
  EXPECT_NEAR(ex.minus, -0.2360679774997898, 1e-14);
  const auto scalar = closed_form_2x2(HermitianMatrix(from_rows({{0.4, 0.0}, {0.0, 0.4}})));
  EXPECT_EQ(scalar.plus, 0.4);
  EXPECT_EQ(scalar.minus, 0.4);
  EXPECT_THROW(closed_form_2x2(HermitianMatrix(Matrix::Identity(3, 3))), ValidationError);
}

TEST(ClosedForm2x2, AgreesWithZeemanLevelsAndReference) {
  std::mt19937_64 rng(23);
  for (const PhysicalConstants c : {PhysicalConstants{}, PhysicalConstants{2.0023, 0.5, 1.7}}) {
    for (int trial = 0; trial < 200; ++trial) {
      const auto a = random_hermitian(2, rng, 3.0);
      const auto closed = closed_form_2x2(a);
      const auto f = field_for_spin_half(to_observable(a, c));
      const auto levels = zeeman_levels(f.b0, c);
      EXPECT_NEAR(closed.plus, shift_relation(levels.plus, f.a), 1e-12);
      EXPECT_NEAR(closed.minus, shift_relation(levels.minus, f.a), 1e-12);
      const auto ref = reference_eigenvalues(a.entries());
      EXPECT_NEAR(closed.minus, ref[0], 1e-12);
      EXPECT_NEAR(closed.plus, ref[1], 1e-12);
    }
  }
}
