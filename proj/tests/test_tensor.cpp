#include "vie/tensor.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace vie;
using testutil::outer3;
using testutil::random_matrix;
using testutil::random_tensor;
using testutil::rel_diff;

TEST(FrobeniusNorm, AllOnes) {
  Tensor3 t = Tensor3::constant(2, 2, 2, 1.0);
  EXPECT_NEAR(frobenius_norm(t), std::sqrt(8.0), 1e-15);
}

TEST(FrobeniusNorm, ZeroTensor) {
  EXPECT_EQ(frobenius_norm(Tensor3(5, 3, 2)), 0.0);
}

TEST(FrobeniusNorm, SingleComplexEntry) {
  Tensor3 t(3, 2, 2);
  t(1, 0, 1) = cplx(3.0, 4.0);
  EXPECT_NEAR(frobenius_norm(t), 5.0, 1e-15);
}

TEST(Unfold, Mode1Shape) {
  Tensor3 t = random_tensor(2, 3, 4, 1);
  Eigen::MatrixXcd m = unfold(t, 1);
  EXPECT_EQ(m.rows(), 2);
  EXPECT_EQ(m.cols(), 12);
}

TEST(Unfold, FoldRoundTripAllModes) {
  Tensor3 t = random_tensor(3, 3, 3, 2);
  for (int mode = 1; mode <= 3; ++mode) {
    Tensor3 back = fold(unfold(t, mode), mode, t.dims());
    EXPECT_EQ(back.flat(), t.flat()) << "mode " << mode;
  }
}

// Hand-enumerated index map for a 2x2x2 tensor: mode-1 column is j + n2*k.
TEST(Unfold, ExplicitEntries2x2x2) {
  Tensor3 t(2, 2, 2);
  for (Index k = 0; k < 2; ++k)
    for (Index j = 0; j < 2; ++j)
      for (Index i = 0; i < 2; ++i) t(i, j, k) = cplx(100.0 * i + 10.0 * j + k, 0.0);

  Eigen::MatrixXcd m1 = unfold(t, 1);
  for (Index k = 0; k < 2; ++k)
    for (Index j = 0; j < 2; ++j)
      for (Index i = 0; i < 2; ++i) EXPECT_EQ(m1(i, j + 2 * k), t(i, j, k));

  Eigen::MatrixXcd m2 = unfold(t, 2);
  for (Index k = 0; k < 2; ++k)
    for (Index j = 0; j < 2; ++j)
      for (Index i = 0; i < 2; ++i) EXPECT_EQ(m2(j, i + 2 * k), t(i, j, k));

  Eigen::MatrixXcd m3 = unfold(t, 3);
  for (Index k = 0; k < 2; ++k)
    for (Index j = 0; j < 2; ++j)
      for (Index i = 0; i < 2; ++i) EXPECT_EQ(m3(k, i + 2 * j), t(i, j, k));
}

TEST(Unfold, InvalidModeThrows) {
  Tensor3 t(2, 2, 2);
  EXPECT_THROW(unfold(t, 0), std::invalid_argument);
  EXPECT_THROW(unfold(t, 4), std::invalid_argument);
}

TEST(Unfold, NormMatchesTensorNorm) {
  Tensor3 t = random_tensor(4, 5, 3, 3);
  const double tn = frobenius_norm(t);
  for (int mode = 1; mode <= 3; ++mode)
    EXPECT_NEAR(unfold(t, mode).norm() / tn, 1.0, 1e-14);
}

TEST(NModeProduct, IdentityLeavesTensorUnchanged) {
  Tensor3 t = random_tensor(3, 4, 2, 4);
  for (int mode = 1; mode <= 3; ++mode) {
    FactorMatrix id = FactorMatrix::Identity(t.dim(mode - 1), t.dim(mode - 1));
    Tensor3 out = n_mode_product(t, id, mode);
    EXPECT_LT(rel_diff(t, out), 1e-15) << "mode " << mode;
  }
}

TEST(NModeProduct, ZeroMatrixGivesZero) {
  Tensor3 t = random_tensor(3, 3, 3, 5);
  FactorMatrix z = FactorMatrix::Zero(2, 3);
  EXPECT_EQ(frobenius_norm(n_mode_product(t, z, 2)), 0.0);
}

TEST(NModeProduct, RowSumMatrixMode1) {
  Tensor3 t = random_tensor(2, 2, 2, 6);
  FactorMatrix ones(1, 2);
  ones << 1.0, 1.0;
  Tensor3 out = n_mode_product(t, ones, 1);
  ASSERT_EQ(out.dim(0), 1);
  for (Index k = 0; k < 2; ++k)
    for (Index j = 0; j < 2; ++j) {
      cplx expect = t(0, j, k) + t(1, j, k);
      EXPECT_NEAR(std::abs(out(0, j, k) - expect), 0.0, 1e-14);
    }
}

TEST(NModeProduct, DimensionMismatchThrows) {
  Tensor3 t(3, 3, 3);
  FactorMatrix m(2, 4);
  EXPECT_THROW(n_mode_product(t, m, 1), std::invalid_argument);
}

TEST(NModeProduct, DistinctModesCommute) {
  Tensor3 t = random_tensor(4, 3, 5, 7);
  FactorMatrix u = random_matrix(2, 4, 8);
  FactorMatrix v = random_matrix(6, 3, 9);
  Tensor3 a = n_mode_product(n_mode_product(t, u, 1), v, 2);
  Tensor3 b = n_mode_product(n_mode_product(t, v, 2), u, 1);
  EXPECT_LT(rel_diff(a, b), 1e-14);
}

// Brute-force triple sum oracle for the Tucker reconstruction.
static Tensor3 tucker_brute(const Tensor3& core, const FactorMatrix& u1, const FactorMatrix& u2,
                            const FactorMatrix& u3) {
  Tensor3 out(u1.rows(), u2.rows(), u3.rows());
  for (Index k = 0; k < out.dim(2); ++k)
    for (Index j = 0; j < out.dim(1); ++j)
      for (Index i = 0; i < out.dim(0); ++i) {
        cplx s = 0.0;
        for (Index c = 0; c < core.dim(2); ++c)
          for (Index b = 0; b < core.dim(1); ++b)
            for (Index a = 0; a < core.dim(0); ++a)
              s += core(a, b, c) * u1(i, a) * u2(j, b) * u3(k, c);
        out(i, j, k) = s;
      }
  return out;
}

TEST(TuckerReconstruct, RankOneOuterProduct) {
  Eigen::VectorXcd u = random_matrix(3, 1, 10).col(0);
  Eigen::VectorXcd v = random_matrix(4, 1, 11).col(0);
  Eigen::VectorXcd w = random_matrix(2, 1, 12).col(0);
  Tensor3 core = Tensor3::constant(1, 1, 1, cplx(2.0, -1.0));
  Tensor3 rec = tucker_reconstruct(core, u, v, w);
  Tensor3 expect = outer3(u, v, w);
  expect.flat() *= cplx(2.0, -1.0);
  EXPECT_LT(rel_diff(expect, rec), 1e-14);
}

TEST(TuckerReconstruct, IdentityFactorsReturnCore) {
  Tensor3 core = random_tensor(3, 4, 2, 13);
  Tensor3 rec = tucker_reconstruct(core, FactorMatrix::Identity(3, 3),
                                    FactorMatrix::Identity(4, 4), FactorMatrix::Identity(2, 2));
  EXPECT_LT(rel_diff(core, rec), 1e-15);
}

TEST(TuckerReconstruct, MatchesBruteForceTripleSum) {
  Tensor3 core = random_tensor(2, 2, 2, 14);
  FactorMatrix u1 = random_matrix(3, 2, 15);
  FactorMatrix u2 = random_matrix(3, 2, 16);
  FactorMatrix u3 = random_matrix(3, 2, 17);
  EXPECT_LT(rel_diff(tucker_brute(core, u1, u2, u3), tucker_reconstruct(core, u1, u2, u3)),
            1e-13);
}

TEST(TuckerReconstruct, BruteForceSweepSmallSizes) {
  for (Index n = 2; n <= 4; ++n)
    for (Index r = 1; r <= 3; ++r) {
      Tensor3 core = random_tensor(r, r, r, 100 + 10 * n + r);
      FactorMatrix u1 = random_matrix(n, r, 200 + n + r);
      FactorMatrix u2 = random_matrix(n, r, 300 + n + r);
      FactorMatrix u3 = random_matrix(n, r, 400 + n + r);
      EXPECT_LT(rel_diff(tucker_brute(core, u1, u2, u3), tucker_reconstruct(core, u1, u2, u3)),
                1e-13)
          << "n=" << n << " r=" << r;
    }
}

TEST(CpReconstruct, SingleOuterProduct) {
  FactorMatrix v1 = random_matrix(3, 1, 20);
  FactorMatrix v2 = random_matrix(4, 1, 21);
  FactorMatrix v3 = random_matrix(2, 1, 22);
  Tensor3 expect = outer3(v1.col(0), v2.col(0), v3.col(0));
  EXPECT_LT(rel_diff(expect, cp_reconstruct(v1, v2, v3)), 1e-14);
}

TEST(CpReconstruct, RankZeroIsZeroTensor) {
  Tensor3 t = cp_reconstruct(FactorMatrix(3, 0), FactorMatrix(4, 0), FactorMatrix(2, 0));
  EXPECT_EQ(frobenius_norm(t), 0.0);
  EXPECT_EQ(t.dim(0), 3);
}

TEST(CpReconstruct, RankTwoMatchesElementwiseSum) {
  FactorMatrix v1 = random_matrix(3, 2, 23);
  FactorMatrix v2 = random_matrix(3, 2, 24);
  FactorMatrix v3 = random_matrix(3, 2, 25);
  Tensor3 expect = outer3(v1.col(0), v2.col(0), v3.col(0));
  Tensor3 second = outer3(v1.col(1), v2.col(1), v3.col(1));
  expect.flat() += second.flat();
  EXPECT_LT(rel_diff(expect, cp_reconstruct(v1, v2, v3)), 1e-13);
}

TEST(CpReconstruct, RankMismatchThrows) {
  EXPECT_THROW(cp_reconstruct(FactorMatrix(3, 2), FactorMatrix(3, 1), FactorMatrix(3, 2)),
               std::invalid_argument);
}

TEST(Hadamard, OnesIsIdentity) {
  Tensor3 t = random_tensor(2, 3, 2, 26);
  EXPECT_LT(rel_diff(t, hadamard(t, Tensor3::constant(2, 3, 2, 1.0))), 1e-16);
}

TEST(Hadamard, ZerosGiveZero) {
  Tensor3 t = random_tensor(2, 3, 2, 27);
  EXPECT_EQ(frobenius_norm(hadamard(t, Tensor3(2, 3, 2))), 0.0);
}

TEST(Hadamard, DirectArithmetic) {
  Tensor3 a(2, 1, 1), b(2, 1, 1);
  a(0, 0, 0) = 1.0;
  a(1, 0, 0) = cplx(0.0, 2.0);
  b(0, 0, 0) = 3.0;
  b(1, 0, 0) = 4.0;
  Tensor3 c = hadamard(a, b);
  EXPECT_EQ(c(0, 0, 0), cplx(3.0, 0.0));
  EXPECT_EQ(c(1, 0, 0), cplx(0.0, 8.0));
}

TEST(Hadamard, DimMismatchThrows) {
  EXPECT_THROW(hadamard(Tensor3(2, 2, 2), Tensor3(2, 2, 3)), std::invalid_argument);
}
