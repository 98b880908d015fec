#pragma once

#include "vie/tensor.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace vie {

/// Singular-value truncation rules.
///
/// SigmaMax keeps sigma_j >= (tol/sqrt(3)) * sigma_max (the literal per-mode
/// threshold used when the unfoldings are truncated).  Energy keeps the
/// smallest rank whose discarded tail satisfies
/// sqrt(sum_{j>r} sigma_j^2) <= (tol/sqrt(3)) * ||m||_F, which yields the
/// a-priori bound ||A - A~||_F <= tol * ||A||_F for the full decomposition.
enum class TruncationRule { SigmaMax, Energy };

inline const char* to_string(TruncationRule r) {
  return r == TruncationRule::SigmaMax ? "sigma_max" : "energy";
}

struct TruncatedSvd {
  Eigen::MatrixXcd u;               // rows x rank
  Eigen::VectorXd singular_values;  // rank
  Eigen::MatrixXcd v;               // cols x rank
  Index rank = 0;
};

namespace detail {

// Thin SVD that first shrinks the long dimension with a Householder QR so the
// Jacobi SVD only ever sees a square matrix of the short size.
inline void thin_svd(const Eigen::MatrixXcd& m, Eigen::MatrixXcd& u, Eigen::VectorXd& s,
                     Eigen::MatrixXcd& v) {
  const Index rows = m.rows(), cols = m.cols();
  if (rows == 0 || cols == 0) throw std::invalid_argument("truncated_svd: empty matrix");
  if (cols > 2 * rows) {
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m.adjoint());
    Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(cols, rows);
    Eigen::MatrixXcd r_small =
        qr.matrixQR().topRows(rows).triangularView<Eigen::Upper>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(r_small.adjoint(),
                                           Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = svd.matrixU();
    s = svd.singularValues();
    v = q * svd.matrixV();
  } else if (rows > 2 * cols) {
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
    Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(rows, cols);
    Eigen::MatrixXcd r_small =
        qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(r_small,
                                           Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = q * svd.matrixU();
    s = svd.singularValues();
    v = svd.matrixV();
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = svd.matrixU();
    s = svd.singularValues();
    v = svd.matrixV();
  }
}

inline Index truncation_rank(const Eigen::VectorXd& s, double tol, TruncationRule rule) {
  const Index n = s.size();
  if (n == 0) return 0;
  const double smax = s[0];
  if (smax <= 0.0) return 0;
  if (rule == TruncationRule::SigmaMax) {
    const double threshold = (tol / std::sqrt(3.0)) * smax;
    Index r = 0;
    for (Index j = 0; j < n; ++j) {
      // keep the boundary value on near-exact ties, deterministically
      if (s[j] > 0.0 && s[j] >= threshold - 1e-14 * smax) r = j + 1;
    }
    return r;
  }
  // Energy rule: smallest r with tail energy below the budget.
  double total = 0.0;
  for (Index j = 0; j < n; ++j) total += s[j] * s[j];
  const double budget = (tol / std::sqrt(3.0)) * std::sqrt(total);
  const double budget2 = budget * budget;
  double tail = 0.0;
  Index r = n;
  while (r > 0) {
    const double cand = tail + s[r - 1] * s[r - 1];
    if (cand <= budget2 || s[r - 1] == 0.0) {
      tail = cand;
      --r;
    } else {
      break;
    }
  }
  return r;
}

}  // namespace detail

/// Rank-truncated SVD of a complex matrix under the given rule.
inline TruncatedSvd truncated_svd(const Eigen::MatrixXcd& m, double tol, TruncationRule rule) {
  if (tol < 0.0) throw std::invalid_argument("truncated_svd: tol must be >= 0");
  Eigen::MatrixXcd u, v;
  Eigen::VectorXd s;
  detail::thin_svd(m, u, s, v);
  TruncatedSvd out;
  out.rank = detail::truncation_rank(s, tol, rule);
  out.u = u.leftCols(out.rank);
  out.singular_values = s.head(out.rank);
  out.v = v.leftCols(out.rank);
  return out;
}

/// Tucker decomposition: core (r1 x r2 x r3) plus one orthonormal factor per
/// mode (n_q x r_q).
struct TuckerForm {
  Tensor3 core;
  std::array<FactorMatrix, 3> factors;
  std::array<Index, 3> ranks{0, 0, 0};
  TruncationRule rule = TruncationRule::Energy;
  double tol = 0.0;

  Tensor3 reconstruct() const {
    return tucker_reconstruct(core, factors[0], factors[1], factors[2]);
  }
};

struct CPForm {
  std::array<FactorMatrix, 3> factors;
  Index rank = 0;

  Tensor3 reconstruct() const { return cp_reconstruct(factors[0], factors[1], factors[2]); }
};

/// Merged Tucker+CP factors W^i = U^i V^i.
struct TuckerCPForm {
  std::array<FactorMatrix, 3> factors;
  Index rank = 0;

  Tensor3 reconstruct() const { return cp_reconstruct(factors[0], factors[1], factors[2]); }
};

struct CompressionStats {
  std::int64_t original_elements = 0;
  std::int64_t compressed_elements = 0;
  double compression_factor = 0.0;
  double achieved_relative_error = std::numeric_limits<double>::quiet_NaN();
  std::array<Index, 3> ranks{0, 0, 0};
};

/// Truncated higher-order SVD. With the Energy rule the reconstruction error
/// satisfies ||t - t~||_F <= tol * ||t||_F.
inline TuckerForm hosvd(const Tensor3& t, double tol, TruncationRule rule = TruncationRule::Energy) {
  if (t.dim(0) == 0 || t.dim(1) == 0 || t.dim(2) == 0)
    throw std::invalid_argument("hosvd: degenerate tensor dimensions");
  TuckerForm form;
  form.rule = rule;
  form.tol = tol;
  for (int q = 0; q < 3; ++q) {
    TruncatedSvd svd = truncated_svd(unfold(t, q + 1), tol, rule);
    form.factors[static_cast<std::size_t>(q)] = svd.u;
    form.ranks[static_cast<std::size_t>(q)] = svd.rank;
  }
  Tensor3 core = t;
  for (int q = 0; q < 3; ++q)
    core = n_mode_product(core, form.factors[static_cast<std::size_t>(q)].adjoint(), q + 1);
  form.core = std::move(core);
  return form;
}

/// Multilinear rank triplet (unfolding ranks) under the chosen rule.
inline std::array<Index, 3> multilinear_rank(const Tensor3& t, double tol,
                                             TruncationRule rule = TruncationRule::Energy) {
  std::array<Index, 3> ranks{0, 0, 0};
  for (int q = 0; q < 3; ++q) {
    Eigen::MatrixXcd u, v;
    Eigen::VectorXd s;
    detail::thin_svd(unfold(t, q + 1), u, s, v);
    ranks[static_cast<std::size_t>(q)] = detail::truncation_rank(s, tol, rule);
  }
  return ranks;
}

struct CpAlsResult {
  CPForm form;
  std::vector<double> rel_error_trace;  // one entry per completed sweep
  bool converged = false;
  bool ill_posed_rank = false;  // r exceeds the product of the two smallest dims
};

namespace detail {

// Least-squares update for one CP factor: minimizes ||a_unf - v * z^T||_F over
// v, where z is the Khatri-Rao product of the other two factors.  Solved via
// the r x r normal equations with an SVD pseudo-inverse (relative cutoff
// 1e-12) so collinear columns do not blow up.
inline FactorMatrix cp_ls_update(const Eigen::MatrixXcd& a_unf, const FactorMatrix& b,
                                 const FactorMatrix& c) {
  const Eigen::MatrixXcd z = khatri_rao(c, b);  // (nc*nb) x r, b fastest
  const Eigen::MatrixXcd rhs = a_unf * z.conjugate();
  const Eigen::MatrixXcd gram =
      (b.adjoint() * b).array() * (c.adjoint() * c).array();  // z^H z
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(gram, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd s = svd.singularValues();
  const double cutoff = (s.size() ? s[0] : 0.0) * 1e-12;
  Eigen::VectorXcd sinv = Eigen::VectorXcd::Zero(s.size());
  for (Index j = 0; j < s.size(); ++j)
    if (s[j] > cutoff) sinv[j] = 1.0 / s[j];
  // v = rhs * pinv(gram^T); gram is Hermitian so pinv(gram^T) = conj(pinv(gram))
  Eigen::MatrixXcd pinv = svd.matrixV() * sinv.asDiagonal() * svd.matrixU().adjoint();
  return rhs * pinv.conjugate();
}

inline void cp_normalize_columns(std::array<FactorMatrix, 3>& f) {
  for (Index l = 0; l < f[0].cols(); ++l) {
    double n0 = f[0].col(l).norm(), n1 = f[1].col(l).norm(), n2 = f[2].col(l).norm();
    const double mag = std::cbrt(n0 * n1 * n2);
    if (n0 > 0) f[0].col(l) *= mag / n0;
    if (n1 > 0) f[1].col(l) *= mag / n1;
    if (n2 > 0) f[2].col(l) *= mag / n2;
  }
}

}  // namespace detail

/// Canonical polyadic decomposition at fixed rank r via alternating least
/// squares. Factors are initialized from the leading left singular vectors of
/// the unfoldings (padded with seeded random columns when r exceeds what the
/// unfolding provides), so the run is deterministic.
inline CpAlsResult cp_als(const Tensor3& t, Index r, int max_iters = 100,
                          double stall_tol = 1e-12, std::uint64_t seed = 0x5eed) {
  if (r < 0) throw std::invalid_argument("cp_als: rank must be >= 0");
  if (max_iters < 1) throw std::invalid_argument("cp_als: max_iters must be >= 1");
  CpAlsResult res;
  res.form.rank = r;
  const double tnorm = frobenius_norm(t);

  std::array<Index, 3> dims = t.dims();
  std::array<Index, 3> sorted = dims;
  std::sort(sorted.begin(), sorted.end());
  res.ill_posed_rank = r > sorted[0] * sorted[1];

  if (r == 0 || tnorm == 0.0) {
    for (int q = 0; q < 3; ++q)
      res.form.factors[static_cast<std::size_t>(q)] =
          FactorMatrix::Zero(dims[static_cast<std::size_t>(q)], r);
    res.rel_error_trace.push_back(tnorm == 0.0 ? 0.0 : 1.0);
    res.converged = tnorm == 0.0;
    return res;
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::array<Eigen::MatrixXcd, 3> unf;
  for (int q = 0; q < 3; ++q) {
    unf[static_cast<std::size_t>(q)] = unfold(t, q + 1);
    Eigen::MatrixXcd u, v;
    Eigen::VectorXd s;
    detail::thin_svd(unf[static_cast<std::size_t>(q)], u, s, v);
    const Index have = std::min<Index>(u.cols(), r);
    FactorMatrix f(dims[static_cast<std::size_t>(q)], r);
    f.leftCols(have) = u.leftCols(have);
    for (Index l = have; l < r; ++l) {
      for (Index i = 0; i < f.rows(); ++i) f(i, l) = cplx(gauss(rng), gauss(rng));
      f.col(l).normalize();
    }
    res.form.factors[static_cast<std::size_t>(q)] = std::move(f);
  }

  double prev_err = std::numeric_limits<double>::infinity();
  for (int sweep = 0; sweep < max_iters; ++sweep) {
    auto& f = res.form.factors;
    f[0] = detail::cp_ls_update(unf[0], f[1], f[2]);
    f[1] = detail::cp_ls_update(unf[1], f[0], f[2]);
    f[2] = detail::cp_ls_update(unf[2], f[0], f[1]);
    detail::cp_normalize_columns(f);
    const double err = frobenius_norm(
        // reconstruction residual via the mode-1 unfolding
        [&] {
          Tensor3 rec = cp_reconstruct(f[0], f[1], f[2]);
          rec.flat() -= t.flat();
          return rec;
        }()) / tnorm;
    res.rel_error_trace.push_back(err);
    if (prev_err - err < stall_tol) {
      res.converged = err <= prev_err + stall_tol;
      break;
    }
    prev_err = err;
  }
  return res;
}

struct TuckerCpResult {
  TuckerCPForm form;
  CompressionStats stats;
  double hosvd_relative_error = 0.0;  // ||t - tucker~|| / ||t||
  double core_cp_relative_error = 0.0;
  std::vector<double> cp_error_trace;
};

/// Element counts of the stored representation.
inline CompressionStats compression_stats(const TuckerForm& form,
                                          const std::array<Index, 3>& original_dims) {
  CompressionStats s;
  s.original_elements = original_dims[0] * original_dims[1] * original_dims[2];
  s.ranks = form.ranks;
  s.compressed_elements = form.ranks[0] * form.ranks[1] * form.ranks[2];
  for (int q = 0; q < 3; ++q)
    s.compressed_elements += original_dims[static_cast<std::size_t>(q)] *
                             form.ranks[static_cast<std::size_t>(q)];
  s.compression_factor = static_cast<double>(s.original_elements) /
                         static_cast<double>(std::max<std::int64_t>(s.compressed_elements, 1));
  return s;
}

inline CompressionStats compression_stats(const TuckerCPForm& form,
                                          const std::array<Index, 3>& original_dims) {
  CompressionStats s;
  s.original_elements = original_dims[0] * original_dims[1] * original_dims[2];
  s.ranks = {form.rank, form.rank, form.rank};
  s.compressed_elements =
      form.rank * (original_dims[0] + original_dims[1] + original_dims[2]);
  s.compression_factor = static_cast<double>(s.original_elements) /
                         static_cast<double>(std::max<std::int64_t>(s.compressed_elements, 1));
  return s;
}

/// Tucker+CP: truncated HOSVD, CP-ALS on the small core, factors merged as
/// W^i = U^i V^i. The CP target rank defaults to min(r1, r2, r3) of the core.
inline TuckerCpResult tucker_cp(const Tensor3& t, double tol, int cp_iters = 1000,
                                TruncationRule rule = TruncationRule::Energy,
                                Index cp_rank = -1, double stall_tol = 0.0) {
  TuckerForm tucker = hosvd(t, tol, rule);
  const double tnorm = frobenius_norm(t);

  TuckerCpResult res;
  {
    Tensor3 diff = tucker.reconstruct();
    diff.flat() -= t.flat();
    res.hosvd_relative_error = tnorm > 0 ? frobenius_norm(diff) / tnorm : 0.0;
  }

  const Index r = cp_rank >= 0
                      ? cp_rank
                      : std::min({tucker.ranks[0], tucker.ranks[1], tucker.ranks[2]});
  CpAlsResult cp = cp_als(tucker.core, r, cp_iters, stall_tol);
  res.core_cp_relative_error =
      cp.rel_error_trace.empty() ? 0.0 : cp.rel_error_trace.back();
  res.cp_error_trace = cp.rel_error_trace;

  res.form.rank = r;
  for (int q = 0; q < 3; ++q)
    res.form.factors[static_cast<std::size_t>(q)] =
        tucker.factors[static_cast<std::size_t>(q)] * cp.form.factors[static_cast<std::size_t>(q)];

  res.stats = compression_stats(res.form, t.dims());
  if (tnorm > 0) {
    Tensor3 diff = res.form.reconstruct();
    diff.flat() -= t.flat();
    res.stats.achieved_relative_error = frobenius_norm(diff) / tnorm;
  } else {
    res.stats.achieved_relative_error = 0.0;
  }
  return res;
}

}  // namespace vie
