#include "vie/decomp.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace vie;
using testutil::outer3;
using testutil::random_matrix;
using testutil::random_orthonormal;
using testutil::random_tensor;
using testutil::rel_diff;

namespace {

Tensor3 planted_low_rank(std::array<Index, 3> dims, std::array<Index, 3> ranks,
                         std::uint64_t seed, double noise = 0.0) {
  Tensor3 core = random_tensor(ranks[0], ranks[1], ranks[2], seed);
  Tensor3 t = tucker_reconstruct(core, random_orthonormal(dims[0], ranks[0], seed + 1),
                                 random_orthonormal(dims[1], ranks[1], seed + 2),
                                 random_orthonormal(dims[2], ranks[2], seed + 3));
  if (noise > 0.0) {
    Tensor3 n = random_tensor(dims[0], dims[1], dims[2], seed + 4);
    t.flat() += noise * frobenius_norm(t) / frobenius_norm(n) * n.flat();
  }
  return t;
}

}  // namespace

TEST(TruncatedSvd, RankOneMatrix) {
  FactorMatrix u = random_matrix(6, 1, 1);
  FactorMatrix v = random_matrix(5, 1, 2);
  FactorMatrix m = u * v.transpose();
  for (double tol : {1e-1, 1e-6, 0.5}) {
    TruncatedSvd s = truncated_svd(m, tol, TruncationRule::Energy);
    EXPECT_EQ(s.rank, 1) << "tol " << tol;
  }
}

TEST(TruncatedSvd, IdentityZeroTolKeepsAll) {
  FactorMatrix m = FactorMatrix::Identity(4, 4);
  EXPECT_EQ(truncated_svd(m, 0.0, TruncationRule::SigmaMax).rank, 4);
  EXPECT_EQ(truncated_svd(m, 0.0, TruncationRule::Energy).rank, 4);
}

// sigma = (1, 1e-3, 1e-9), tol 1e-6: threshold (1e-6/sqrt(3)) ~ 5.77e-7 keeps
// the first two values only.
TEST(TruncatedSvd, SigmaMaxRuleThreshold) {
  Eigen::VectorXd d(3);
  d << 1.0, 1e-3, 1e-9;
  FactorMatrix m = d.asDiagonal().toDenseMatrix().cast<cplx>();
  TruncatedSvd s = truncated_svd(m, 1e-6, TruncationRule::SigmaMax);
  EXPECT_EQ(s.rank, 2);
}

TEST(TruncatedSvd, ErrorsOnBadInput) {
  EXPECT_THROW(truncated_svd(FactorMatrix(), 1e-3, TruncationRule::Energy),
               std::invalid_argument);
  EXPECT_THROW(truncated_svd(FactorMatrix::Identity(2, 2), -1.0, TruncationRule::Energy),
               std::invalid_argument);
}

TEST(TruncatedSvd, WideMatrixMatchesSquarePath) {
  FactorMatrix m = random_matrix(4, 40, 3);
  TruncatedSvd s = truncated_svd(m, 0.0, TruncationRule::Energy);
  Eigen::JacobiSVD<FactorMatrix> ref(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  ASSERT_EQ(s.rank, 4);
  for (Index j = 0; j < 4; ++j)
    EXPECT_NEAR(s.singular_values[j], ref.singularValues()[j], 1e-12);
  FactorMatrix rec = s.u * s.singular_values.cast<cplx>().asDiagonal() * s.v.adjoint();
  EXPECT_LT((rec - m).norm() / m.norm(), 1e-12);
}

TEST(Hosvd, RankOneTensor) {
  Tensor3 t = outer3(random_matrix(5, 1, 4).col(0), random_matrix(6, 1, 5).col(0),
                     random_matrix(4, 1, 6).col(0));
  TuckerForm f = hosvd(t, 1e-10);
  EXPECT_EQ(f.ranks, (std::array<Index, 3>{1, 1, 1}));
  EXPECT_LT(rel_diff(t, f.reconstruct()), 1e-13);
}

TEST(Hosvd, FullRankZeroTolExact) {
  Tensor3 t = random_tensor(6, 6, 6, 7);
  TuckerForm f = hosvd(t, 0.0);
  EXPECT_EQ(f.ranks, (std::array<Index, 3>{6, 6, 6}));
  EXPECT_LT(rel_diff(t, f.reconstruct()), 1e-13);
}

TEST(Hosvd, SumOfTwoSeparableTensorsHasRankTwo) {
  Tensor3 a = outer3(random_matrix(5, 1, 8).col(0), random_matrix(5, 1, 9).col(0),
                     random_matrix(5, 1, 10).col(0));
  Tensor3 b = outer3(random_matrix(5, 1, 11).col(0), random_matrix(5, 1, 12).col(0),
                     random_matrix(5, 1, 13).col(0));
  a.flat() += b.flat();
  TuckerForm f = hosvd(a, 1e-10);
  for (int q = 0; q < 3; ++q) EXPECT_LE(f.ranks[q], 2);
  // SVD oracle on the unfoldings agrees
  for (int mode = 1; mode <= 3; ++mode) {
    Eigen::JacobiSVD<FactorMatrix> svd(unfold(a, mode));
    Index numeric_rank = 0;
    for (Index j = 0; j < svd.singularValues().size(); ++j)
      if (svd.singularValues()[j] > 1e-10 * svd.singularValues()[0]) ++numeric_rank;
    EXPECT_EQ(f.ranks[mode - 1], numeric_rank);
  }
}

TEST(Hosvd, DegenerateDimsThrow) {
  EXPECT_THROW(hosvd(Tensor3(0, 2, 2), 1e-6), std::invalid_argument);
}

TEST(Hosvd, EnergyRuleHonorsBoundOnRandomNoisyTensors) {
  for (int trial = 0; trial < 25; ++trial) {
    Tensor3 t = planted_low_rank({8, 7, 9}, {3, 2, 4}, 1000 + 7 * trial, 1e-5);
    const double tn = frobenius_norm(t);
    for (double tol : {1e-2, 1e-4, 1e-8}) {
      TuckerForm f = hosvd(t, tol);
      Tensor3 rec = f.reconstruct();
      rec.flat() -= t.flat();
      EXPECT_LE(frobenius_norm(rec), tol * tn * (1.0 + 1e-12))
          << "trial " << trial << " tol " << tol;
    }
  }
}

TEST(Hosvd, FactorsOrthonormal) {
  Tensor3 t = planted_low_rank({9, 8, 7}, {4, 3, 5}, 42, 1e-3);
  TuckerForm f = hosvd(t, 1e-4);
  for (int q = 0; q < 3; ++q) {
    const FactorMatrix& u = f.factors[q];
    double dev = (u.adjoint() * u - FactorMatrix::Identity(u.cols(), u.cols())).norm();
    EXPECT_LT(dev, 1e-12);
  }
}

// An orthogonally decomposable tensor: its best rank-(r,r,r) approximation is
// the truncation of the construction, so the quasi-optimality factor of the
// truncated HOSVD can be checked against the known best error.
TEST(Hosvd, QuasiOptimalityOnOdecoTensors) {
  const Index n = 8, full = 5, keep = 2;
  Eigen::VectorXd weights(full);
  weights << 1.0, 0.5, 1e-3, 5e-4, 1e-4;
  FactorMatrix u1 = random_orthonormal(n, full, 50);
  FactorMatrix u2 = random_orthonormal(n, full, 51);
  FactorMatrix u3 = random_orthonormal(n, full, 52);
  Tensor3 core(full, full, full);
  for (Index a = 0; a < full; ++a) core(a, a, a) = weights[a];
  Tensor3 t = tucker_reconstruct(core, u1, u2, u3);

  double best_err = 0.0;
  for (Index a = keep; a < full; ++a) best_err += weights[a] * weights[a];
  best_err = std::sqrt(best_err);

  // pick the sigma-max tolerance between sigma_keep and sigma_keep+1
  const double tol = std::sqrt(3.0) * 0.5 * (weights[keep - 1] + weights[keep]) / weights[0];
  TuckerForm f = hosvd(t, tol, TruncationRule::SigmaMax);
  EXPECT_EQ(f.ranks, (std::array<Index, 3>{keep, keep, keep}));
  Tensor3 rec = f.reconstruct();
  rec.flat() -= t.flat();
  EXPECT_LE(frobenius_norm(rec), std::sqrt(3.0) * best_err * (1.0 + 1e-10));
}

TEST(MultilinearRank, ZeroTensor) {
  EXPECT_EQ(multilinear_rank(Tensor3(4, 4, 4), 1e-8), (std::array<Index, 3>{0, 0, 0}));
}

TEST(MultilinearRank, RankOne) {
  Tensor3 t = outer3(random_matrix(4, 1, 60).col(0), random_matrix(5, 1, 61).col(0),
                     random_matrix(6, 1, 62).col(0));
  EXPECT_EQ(multilinear_rank(t, 1e-10), (std::array<Index, 3>{1, 1, 1}));
}

TEST(CpAls, ExactRankOne) {
  Tensor3 t = outer3(random_matrix(5, 1, 70).col(0), random_matrix(4, 1, 71).col(0),
                     random_matrix(6, 1, 72).col(0));
  CpAlsResult res = cp_als(t, 1, 10);
  EXPECT_LE(res.rel_error_trace.back(), 1e-10);
}

TEST(CpAls, ExactRankTwoWellSeparated) {
  FactorMatrix v1 = random_orthonormal(6, 2, 80);
  FactorMatrix v2 = random_orthonormal(6, 2, 81);
  FactorMatrix v3 = random_orthonormal(6, 2, 82);
  v3.col(0) *= 3.0;  // separate the component magnitudes
  Tensor3 t = cp_reconstruct(v1, v2, v3);
  CpAlsResult res = cp_als(t, 2, 200, 1e-15);
  EXPECT_LE(res.rel_error_trace.back(), 1e-8);
}

TEST(CpAls, RankDeficitErrorBoundedBelowAndMonotone) {
  FactorMatrix v1 = random_orthonormal(2, 2, 90);
  FactorMatrix v2 = random_orthonormal(2, 2, 91);
  FactorMatrix v3 = random_orthonormal(2, 2, 92);
  v3.col(0) *= 2.0;
  Tensor3 t = cp_reconstruct(v1, v2, v3);
  const double tnorm = frobenius_norm(t);

  // A rank-1 tensor unfolds to a rank-1 matrix, so the best rank-1 error is
  // bounded below by the unfolding tail in every mode.
  double lower = 0.0;
  for (int mode = 1; mode <= 3; ++mode) {
    Eigen::JacobiSVD<FactorMatrix> svd(unfold(t, mode));
    double tail = 0.0;
    for (Index j = 1; j < svd.singularValues().size(); ++j)
      tail += svd.singularValues()[j] * svd.singularValues()[j];
    lower = std::max(lower, std::sqrt(tail) / tnorm);
  }
  ASSERT_GT(lower, 0.0);

  CpAlsResult res = cp_als(t, 1, 50, 1e-15);
  EXPECT_GE(res.rel_error_trace.back(), lower * (1.0 - 1e-10));
  for (std::size_t s = 1; s < res.rel_error_trace.size(); ++s)
    EXPECT_LE(res.rel_error_trace[s], res.rel_error_trace[s - 1] + 1e-12);
}

TEST(CpAls, MonotoneOnRandomTensor) {
  Tensor3 t = random_tensor(5, 5, 5, 95);
  CpAlsResult res = cp_als(t, 3, 60, 1e-15);
  for (std::size_t s = 1; s < res.rel_error_trace.size(); ++s)
    EXPECT_LE(res.rel_error_trace[s], res.rel_error_trace[s - 1] + 1e-12);
}

TEST(CpAls, IllPosedRankFlagged) {
  Tensor3 t = random_tensor(3, 3, 3, 96);
  CpAlsResult res = cp_als(t, 10, 3);
  EXPECT_TRUE(res.ill_posed_rank);
  // still produces a usable decomposition
  EXPECT_EQ(res.form.factors[0].cols(), 10);
}

TEST(TuckerCp, RankOneTensor) {
  Tensor3 t = outer3(random_matrix(5, 1, 100).col(0), random_matrix(5, 1, 101).col(0),
                     random_matrix(5, 1, 102).col(0));
  TuckerCpResult res = tucker_cp(t, 1e-10, 50);
  EXPECT_EQ(res.form.rank, 1);
  EXPECT_LE(res.stats.achieved_relative_error, 1e-10);
}

TEST(TuckerCp, NearHosvdErrorOnNoisyLowRank) {
  // planted multilinear rank (2,2,2) + 1e-6 noise; at tol 1e-4 both pipelines
  // bottom out at the noise floor
  Tensor3 t = planted_low_rank({5, 5, 5}, {2, 2, 2}, 110, 1e-6);
  TuckerCpResult res = tucker_cp(t, 1e-4, 400);
  EXPECT_GT(res.hosvd_relative_error, 0.0);
  EXPECT_LE(res.stats.achieved_relative_error, 10.0 * res.hosvd_relative_error);
}

// The Tucker residual is orthogonal to the subspace the CP error lives in, so
// the total reconstruction error decomposes exactly.
TEST(TuckerCp, ErrorDecomposition) {
  Tensor3 t = planted_low_rank({6, 6, 6}, {3, 3, 3}, 120, 1e-4);
  TuckerCpResult res = tucker_cp(t, 1e-2, 200);
  // ||core|| / ||t|| = sqrt(1 - hosvd_rel^2) since the truncation residual is
  // orthogonal to the retained subspace
  const double h = res.hosvd_relative_error;
  const double core_scale = std::sqrt(std::max(0.0, 1.0 - h * h));
  const double combined = std::hypot(h, res.core_cp_relative_error * core_scale);
  EXPECT_NEAR(res.stats.achieved_relative_error, combined, 1e-10);
  EXPECT_GE(res.stats.achieved_relative_error, h - 1e-13);
}

TEST(TuckerCp, ReconstructMatchesCpOfMergedFactors) {
  Tensor3 t = planted_low_rank({5, 4, 6}, {2, 2, 2}, 130, 1e-5);
  TuckerCpResult res = tucker_cp(t, 1e-3, 200);
  Tensor3 a = res.form.reconstruct();
  Tensor3 b = cp_reconstruct(res.form.factors[0], res.form.factors[1], res.form.factors[2]);
  EXPECT_LT(rel_diff(a, b), 1e-15);
}

TEST(CompressionStats, RankOneOnLargeGrid) {
  TuckerForm f;
  f.ranks = {1, 1, 1};
  CompressionStats s = compression_stats(f, {100, 100, 100});
  EXPECT_EQ(s.original_elements, 1000000);
  EXPECT_EQ(s.compressed_elements, 1 + 300);
  EXPECT_NEAR(s.compression_factor, 1e6 / 301.0, 1e-9);
}

TEST(CompressionStats, FullRankReportsExpansion) {
  TuckerForm f;
  f.ranks = {4, 4, 4};
  CompressionStats s = compression_stats(f, {4, 4, 4});
  EXPECT_LT(s.compression_factor, 1.0);
}
