#pragma once

#include "vie/components.hpp"
#include "vie/decomp.hpp"
#include "vie/fft.hpp"
#include "vie/grid.hpp"
#include "vie/tensor.hpp"

#include <algorithm>
#include <chrono>
#include <optional>
#include <stdexcept>
#include <vector>

namespace vie {

enum class MatvecStrategy { Dense, HosvdDecompress, HosvdLoop, TuckerCpDecompress, TuckerCpLoop };

inline const char* to_string(MatvecStrategy s) {
  switch (s) {
    case MatvecStrategy::Dense: return "dense";
    case MatvecStrategy::HosvdDecompress: return "hosvd_decompress";
    case MatvecStrategy::HosvdLoop: return "hosvd_loop";
    case MatvecStrategy::TuckerCpDecompress: return "tuckercp_decompress";
    default: return "tuckercp_loop";
  }
}

inline bool is_decompress_strategy(MatvecStrategy s) {
  return s == MatvecStrategy::HosvdDecompress || s == MatvecStrategy::TuckerCpDecompress;
}

enum class ScratchPolicy { WithBuffer, NoBuffer };

/// Zero-padded circulant embedding of a Toeplitz-defining tensor. Each axis
/// of the result has exactly doubled size: indices [0, n) hold the stored
/// offsets, index n is the zero pad plane, and indices (n, 2n) hold the
/// reflected offsets multiplied by the per-axis parity signs.
inline Tensor3 circulant_embed(const Tensor3& t, const Parity& parity) {
  const Index n1 = t.dim(0), n2 = t.dim(1), n3 = t.dim(2);
  Tensor3 e(2 * n1, 2 * n2, 2 * n3);
  for (Index k = 0; k < 2 * n3; ++k) {
    if (k == n3) continue;
    const Index ok = k < n3 ? k : 2 * n3 - k;
    const double sk = k < n3 ? 1.0 : parity.sign[2];
    for (Index j = 0; j < 2 * n2; ++j) {
      if (j == n2) continue;
      const Index oj = j < n2 ? j : 2 * n2 - j;
      const double sj = j < n2 ? 1.0 : parity.sign[1];
      for (Index i = 0; i < 2 * n1; ++i) {
        if (i == n1) continue;
        const Index oi = i < n1 ? i : 2 * n1 - i;
        const double si = i < n1 ? 1.0 : parity.sign[0];
        e(i, j, k) = si * sj * sk * t(oi, oj, ok);
      }
    }
  }
  return e;
}

namespace detail {

/// Embed one grid-sized factor column to length 2n with parity reflection.
inline Eigen::VectorXcd embed_column(const Eigen::VectorXcd& u, int parity_sign) {
  const Index n = u.size();
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(2 * n);
  e.head(n) = u;
  for (Index m = n + 1; m < 2 * n; ++m) e[m] = static_cast<double>(parity_sign) * u[2 * n - m];
  return e;
}

}  // namespace detail

/// Embedding + 1D DFT of every factor column; the core is untouched, so the
/// multilinear ranks are preserved exactly.
inline TuckerForm transform_factors(const TuckerForm& form, const Parity& parity,
                                    DftService& dft) {
  TuckerForm out = form;
  for (int q = 0; q < 3; ++q) {
    const FactorMatrix& u = form.factors[q];
    FactorMatrix t(2 * u.rows(), u.cols());
    for (Index c = 0; c < u.cols(); ++c) {
      Eigen::VectorXcd col = detail::embed_column(u.col(c), parity.sign[q]);
      dft.forward1(col);
      t.col(c) = col;
    }
    out.factors[q] = std::move(t);
  }
  return out;
}

inline TuckerCPForm transform_factors(const TuckerCPForm& form, const Parity& parity,
                                      DftService& dft) {
  TuckerCPForm out = form;
  for (int q = 0; q < 3; ++q) {
    const FactorMatrix& w = form.factors[q];
    FactorMatrix t(2 * w.rows(), w.cols());
    for (Index c = 0; c < w.cols(); ++c) {
      Eigen::VectorXcd col = detail::embed_column(w.col(c), parity.sign[q]);
      dft.forward1(col);
      t.col(c) = col;
    }
    out.factors[q] = std::move(t);
  }
  return out;
}

/// One operator component held in the Fourier domain, in whichever
/// representations were requested at build time.
struct ComponentSpectrum {
  KernelComponent comp;
  Parity parity;
  std::optional<Tensor3> dense;         // DFT of the circulant embedding
  std::optional<TuckerForm> tucker;     // factors embedded + transformed
  std::optional<TuckerCPForm> tucker_cp;
};

/// Fourier-domain operator: the unique components of one kernel family on a
/// common grid. Immutable after construction; safe to share across threads.
struct EmbeddedSpectrum {
  OperatorKind kind = OperatorKind::N;
  std::array<Index, 3> grid_dims{0, 0, 0};
  std::array<Index, 3> embedded_dims{0, 0, 0};
  std::vector<ComponentSpectrum> comps;

  Index embedded_size() const {
    return embedded_dims[0] * embedded_dims[1] * embedded_dims[2];
  }
};

struct SpectrumBuildOptions {
  bool dense = true;
  bool tucker = false;
  bool tucker_cp = false;
  double tol = 1e-8;
  TruncationRule rule = TruncationRule::Energy;
  int cp_iters = 1000;
  Index cp_rank = -1;  // default min(r1,r2,r3)
};

/// Builds the Fourier-domain operator from assembled defining tensors.
/// Compression (when requested) happens on the spatial tensors; the factor
/// transforms then move the compressed forms to the Fourier domain.
inline EmbeddedSpectrum build_operator_spectra(
    OperatorKind kind, const std::vector<std::pair<KernelComponent, Tensor3>>& tensors,
    const SpectrumBuildOptions& opts, DftService& dft) {
  if (tensors.empty()) throw std::invalid_argument("build_operator_spectra: no components");
  EmbeddedSpectrum op;
  op.kind = kind;
  op.grid_dims = tensors.front().second.dims();
  op.embedded_dims = {2 * op.grid_dims[0], 2 * op.grid_dims[1], 2 * op.grid_dims[2]};
  for (const auto& [comp, tensor] : tensors) {
    if (tensor.dims() != op.grid_dims)
      throw std::invalid_argument("build_operator_spectra: inconsistent component dims");
    ComponentSpectrum cs;
    cs.comp = comp;
    cs.parity = component_parity(comp);
    if (opts.dense) {
      Tensor3 e = circulant_embed(tensor, cs.parity);
      dft.forward3(e);
      cs.dense = std::move(e);
    }
    if (opts.tucker) {
      TuckerForm form = hosvd(tensor, opts.tol, opts.rule);
      cs.tucker = transform_factors(form, cs.parity, dft);
    }
    if (opts.tucker_cp) {
      TuckerCpResult r = tucker_cp(tensor, opts.tol, opts.cp_iters, opts.rule, opts.cp_rank);
      cs.tucker_cp = transform_factors(r.form, cs.parity, dft);
    }
    op.comps.push_back(std::move(cs));
  }
  std::sort(op.comps.begin(), op.comps.end(), [](const auto& a, const auto& b) {
    return std::pair{a.comp.row_axis, a.comp.col_axis} < std::pair{b.comp.row_axis, b.comp.col_axis};
  });
  return op;
}

/// Caller-owned scratch for the decompress strategies: one embedded-grid-sized
/// buffer plus rank-sized staging temporaries.
struct ApplyWorkspace {
  Tensor3 buffer;

  ApplyWorkspace() = default;
  explicit ApplyWorkspace(const std::array<Index, 3>& embedded_dims)
      : buffer(embedded_dims[0], embedded_dims[1], embedded_dims[2]) {}
};

struct ApplyTimings {
  double fft_ms = 0.0;
  double product_ms = 0.0;
};

namespace detail {

inline double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

/// (target axis, source axis, coefficient) triplets for one stored component.
/// The FFT path computes sum_{m'} T(m - m') x(m'); the Galerkin matrix needs
/// T(m' - m), and T(-o) = prod(parity) * T(o), so the reflection sign joins
/// the block coefficient (+1 for the symmetric N pairs, antisymmetric for K).
inline std::vector<std::tuple<int, int, double>> component_targets(const ComponentSpectrum& cs) {
  const double sigma = cs.parity.product();
  const int a = cs.comp.row_axis, b = cs.comp.col_axis;
  std::vector<std::tuple<int, int, double>> out;
  if (cs.comp.op == OperatorKind::K) {
    out.emplace_back(a, b, sigma);
    out.emplace_back(b, a, -sigma);
  } else if (a == b) {
    out.emplace_back(a, a, sigma);
  } else {
    out.emplace_back(a, b, sigma);
    out.emplace_back(b, a, sigma);
  }
  return out;
}

/// Decompress a Fourier-domain Tucker component into dst (embedded size).
/// Rank-sized intermediates only; the final mode-3 contraction streams
/// directly into dst.
inline void decompress_tucker(const TuckerForm& f, const std::array<Index, 3>& edims,
                              Tensor3& dst) {
  const Index m1 = edims[0], m2 = edims[1], m3 = edims[2];
  const Index r1 = f.ranks[0], r2 = f.ranks[1], r3 = f.ranks[2];
  if (r1 == 0 || r2 == 0 || r3 == 0) {
    dst.flat().setZero();
    return;
  }
  // c1 = core x_1 U1 : m1 x r2 x r3
  Eigen::MatrixXcd c1 = f.factors[0] * Eigen::Map<const Eigen::MatrixXcd>(
                                           f.core.data(), r1, r2 * r3);
  // c2 = c1 x_2 U2 : (m1 x r2 x r3) -> (m1 x m2 x r3), slab by slab over r3
  Eigen::MatrixXcd c2(m1 * m2, r3);
  for (Index g = 0; g < r3; ++g) {
    Eigen::Map<const Eigen::MatrixXcd> slab(c1.data() + m1 * r2 * g, m1, r2);
    Eigen::Map<Eigen::MatrixXcd>(c2.data() + m1 * m2 * g, m1, m2) =
        slab * f.factors[1].transpose();
  }
  // mode-3 contraction into dst
  Eigen::Map<Eigen::MatrixXcd>(dst.data(), m1 * m2, m3) = c2 * f.factors[2].transpose();
}

/// Decompress a Fourier-domain Tucker+CP component into dst via per-slab
/// GEMMs: slab_k = W1 diag(W3(k,:)) W2^T.
inline void decompress_cp(const TuckerCPForm& f, const std::array<Index, 3>& edims,
                          Tensor3& dst) {
  const Index m1 = edims[0], m2 = edims[1], m3 = edims[2];
  if (f.rank == 0) {
    dst.flat().setZero();
    return;
  }
  Eigen::MatrixXcd w1s(m1, f.rank);
  for (Index k = 0; k < m3; ++k) {
    w1s = f.factors[0] * f.factors[2].row(k).asDiagonal();
    Eigen::Map<Eigen::MatrixXcd>(dst.data() + m1 * m2 * k, m1, m2).noalias() =
        w1s * f.factors[1].transpose();
  }
}

inline void mac_elementwise(Tensor3& y, const Tensor3& s, const Tensor3& x, double coeff) {
  y.flat().array() += coeff * s.flat().array() * x.flat().array();
}

}  // namespace detail

/// y = A x for the BTTB operator represented by `op`, via forward 3D DFTs of
/// the field components, per-component Fourier multiply-accumulate under the
/// chosen strategy, inverse DFTs and cropping. All strategies agree up to the
/// compression error of the forms they read.
inline CurrentField apply_operator(const EmbeddedSpectrum& op, const CurrentField& x,
                                   MatvecStrategy strategy, ScratchPolicy policy,
                                   ApplyWorkspace* ws, DftService& dft,
                                   ApplyTimings* timings = nullptr) {
  if (x.dims() != op.grid_dims) throw std::invalid_argument("apply_operator: dim mismatch");
  if (is_decompress_strategy(strategy)) {
    if (policy == ScratchPolicy::NoBuffer)
      throw std::invalid_argument(
          "apply_operator: decompress strategies need ScratchPolicy::WithBuffer");
    if (ws == nullptr || ws->buffer.dims() != op.embedded_dims)
      throw std::invalid_argument("apply_operator: workspace buffer missing or mis-sized");
  }
  const auto& gd = op.grid_dims;
  const auto& ed = op.embedded_dims;

  auto t0 = std::chrono::steady_clock::now();
  std::array<Tensor3, 3> xhat;
  for (int q = 0; q < 3; ++q) {
    Tensor3 padded(ed[0], ed[1], ed[2]);
    for (Index k = 0; k < gd[2]; ++k)
      for (Index j = 0; j < gd[1]; ++j)
        for (Index i = 0; i < gd[0]; ++i) padded(i, j, k) = x.comp[q](i, j, k);
    dft.forward3(padded);
    xhat[q] = std::move(padded);
  }
  std::array<Tensor3, 3> yhat{Tensor3(ed[0], ed[1], ed[2]), Tensor3(ed[0], ed[1], ed[2]),
                              Tensor3(ed[0], ed[1], ed[2])};
  double fft_ms = detail::ms_since(t0);

  t0 = std::chrono::steady_clock::now();
  for (const ComponentSpectrum& cs : op.comps) {
    const auto targets = detail::component_targets(cs);
    switch (strategy) {
      case MatvecStrategy::Dense: {
        if (!cs.dense) throw std::invalid_argument("apply_operator: dense spectrum absent");
        for (auto [tq, sq, c] : targets)
          detail::mac_elementwise(yhat[tq], *cs.dense, xhat[sq], c);
        break;
      }
      case MatvecStrategy::HosvdDecompress: {
        if (!cs.tucker) throw std::invalid_argument("apply_operator: tucker spectrum absent");
        detail::decompress_tucker(*cs.tucker, ed, ws->buffer);
        for (auto [tq, sq, c] : targets)
          detail::mac_elementwise(yhat[tq], ws->buffer, xhat[sq], c);
        break;
      }
      case MatvecStrategy::TuckerCpDecompress: {
        if (!cs.tucker_cp)
          throw std::invalid_argument("apply_operator: tucker_cp spectrum absent");
        detail::decompress_cp(*cs.tucker_cp, ed, ws->buffer);
        for (auto [tq, sq, c] : targets)
          detail::mac_elementwise(yhat[tq], ws->buffer, xhat[sq], c);
        break;
      }
      case MatvecStrategy::HosvdLoop: {
        if (!cs.tucker) throw std::invalid_argument("apply_operator: tucker spectrum absent");
        const TuckerForm& f = *cs.tucker;
        const Index r1 = f.ranks[0], r2 = f.ranks[1], r3 = f.ranks[2];
        const FactorMatrix& u1 = f.factors[0];
        const FactorMatrix& u2 = f.factors[1];
        const FactorMatrix& u3 = f.factors[2];
        for (Index k = 0; k < ed[2]; ++k)
          for (Index j = 0; j < ed[1]; ++j)
            for (Index i = 0; i < ed[0]; ++i) {
              cplx s = 0.0;
              for (Index g = 0; g < r3; ++g)
                for (Index b = 0; b < r2; ++b)
                  for (Index a = 0; a < r1; ++a)
                    s += f.core(a, b, g) * u1(i, a) * u2(j, b) * u3(k, g);
              for (auto [tq, sq, c] : targets) yhat[tq](i, j, k) += c * s * xhat[sq](i, j, k);
            }
        break;
      }
      case MatvecStrategy::TuckerCpLoop: {
        if (!cs.tucker_cp)
          throw std::invalid_argument("apply_operator: tucker_cp spectrum absent");
        const TuckerCPForm& f = *cs.tucker_cp;
        const Index r = f.rank;
        Eigen::VectorXcd w23(r);
        for (Index k = 0; k < ed[2]; ++k)
          for (Index j = 0; j < ed[1]; ++j) {
            for (Index l = 0; l < r; ++l) w23[l] = f.factors[1](j, l) * f.factors[2](k, l);
            for (Index i = 0; i < ed[0]; ++i) {
              cplx s = 0.0;
              for (Index l = 0; l < r; ++l) s += f.factors[0](i, l) * w23[l];
              for (auto [tq, sq, c] : targets) yhat[tq](i, j, k) += c * s * xhat[sq](i, j, k);
            }
          }
        break;
      }
    }
  }
  const double product_ms = detail::ms_since(t0);

  t0 = std::chrono::steady_clock::now();
  CurrentField y(gd);
  for (int q = 0; q < 3; ++q) {
    dft.inverse3(yhat[q]);
    for (Index k = 0; k < gd[2]; ++k)
      for (Index j = 0; j < gd[1]; ++j)
        for (Index i = 0; i < gd[0]; ++i) y.comp[q](i, j, k) = yhat[q](i, j, k);
  }
  fft_ms += detail::ms_since(t0);

  if (timings) {
    timings->fft_ms = fft_ms;
    timings->product_ms = product_ms;
  }
  return y;
}

/// Explicit dense matrix of the BTTB operator, expanded entry by entry from
/// the defining tensors: block (q,q') row m column m' holds the extended
/// tensor value at offset m' - m. Vector layout matches
/// CurrentField::to_vector (component-major). Exercise-sized grids only.
inline Eigen::MatrixXcd dense_bttb_matrix(
    OperatorKind kind, const std::vector<std::pair<KernelComponent, Tensor3>>& tensors) {
  if (tensors.empty()) throw std::invalid_argument("dense_bttb_matrix: no components");
  const auto dims = tensors.front().second.dims();
  const Index nv = dims[0] * dims[1] * dims[2];

  auto extended = [&](const Tensor3& t, const Parity& p, Index oi, Index oj, Index ok) {
    double sign = 1.0;
    if (oi < 0) { oi = -oi; sign *= p.sign[0]; }
    if (oj < 0) { oj = -oj; sign *= p.sign[1]; }
    if (ok < 0) { ok = -ok; sign *= p.sign[2]; }
    return sign * t(oi, oj, ok);
  };

  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(3 * nv, 3 * nv);
  for (const auto& [comp, tensor] : tensors) {
    const Parity p = component_parity(comp);
    std::vector<std::pair<int, int>> blocks;  // (row block q, col block q'), with sign
    std::vector<double> signs;
    if (kind == OperatorKind::K) {
      blocks = {{comp.row_axis, comp.col_axis}, {comp.col_axis, comp.row_axis}};
      signs = {1.0, -1.0};
    } else if (comp.row_axis == comp.col_axis) {
      blocks = {{comp.row_axis, comp.col_axis}};
      signs = {1.0};
    } else {
      blocks = {{comp.row_axis, comp.col_axis}, {comp.col_axis, comp.row_axis}};
      signs = {1.0, 1.0};
    }
    for (std::size_t bidx = 0; bidx < blocks.size(); ++bidx) {
      const auto [q, qp] = blocks[bidx];
      for (Index k = 0; k < dims[2]; ++k)
        for (Index j = 0; j < dims[1]; ++j)
          for (Index i = 0; i < dims[0]; ++i) {
            const Index row = i + dims[0] * (j + dims[1] * k);
            for (Index kp = 0; kp < dims[2]; ++kp)
              for (Index jp = 0; jp < dims[1]; ++jp)
                for (Index ip = 0; ip < dims[0]; ++ip) {
                  const Index col = ip + dims[0] * (jp + dims[1] * kp);
                  a(q * nv + row, qp * nv + col) +=
                      signs[bidx] * extended(tensor, p, ip - i, jp - j, kp - k);
                }
          }
    }
  }
  return a;
}

/// Timing record of one strategy on one operator. The first run is discarded
/// as warm-up; `median_ms` is the median of `repetitions` full applies and the
/// product/FFT columns are medians of the internal phase timings.
struct MatvecBenchResult {
  MatvecStrategy strategy = MatvecStrategy::Dense;
  std::array<Index, 3> embedded_dims{0, 0, 0};
  std::array<Index, 3> ranks{0, 0, 0};
  double median_ms = 0.0;
  double product_ms = 0.0;      // median over repetitions
  double product_min_ms = 0.0;  // minimum; the noise-robust choice for fits
  double fft_ms = 0.0;
  double flops_est = 0.0;
  int repetitions = 0;
};

inline MatvecBenchResult matvec_bench(const EmbeddedSpectrum& op, const CurrentField& x,
                                      MatvecStrategy strategy, int repetitions,
                                      DftService& dft) {
  if (repetitions < 1) throw std::invalid_argument("matvec_bench: repetitions must be >= 1");
  ApplyWorkspace ws(op.embedded_dims);
  MatvecBenchResult r;
  r.strategy = strategy;
  r.embedded_dims = op.embedded_dims;
  r.repetitions = repetitions;

  apply_operator(op, x, strategy, ScratchPolicy::WithBuffer, &ws, dft);  // warm-up

  std::vector<double> total, prod, fft;
  for (int rep = 0; rep < repetitions; ++rep) {
    ApplyTimings t;
    auto t0 = std::chrono::steady_clock::now();
    apply_operator(op, x, strategy, ScratchPolicy::WithBuffer, &ws, dft, &t);
    total.push_back(detail::ms_since(t0));
    prod.push_back(t.product_ms);
    fft.push_back(t.fft_ms);
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  r.median_ms = median(total);
  r.product_ms = median(prod);
  r.product_min_ms = *std::min_element(prod.begin(), prod.end());
  r.fft_ms = median(fft);

  // element-wise product operation counts per component target
  const double nv = static_cast<double>(op.embedded_size());
  double flops = 0.0;
  for (const auto& cs : op.comps) {
    const double ntargets = static_cast<double>(detail::component_targets(cs).size());
    double per_entry = 1.0;
    if (strategy == MatvecStrategy::HosvdDecompress && cs.tucker)
      per_entry = static_cast<double>(cs.tucker->ranks[2]) + 1.0;
    else if (strategy == MatvecStrategy::HosvdLoop && cs.tucker)
      per_entry = static_cast<double>(cs.tucker->ranks[0] * cs.tucker->ranks[1] *
                                      cs.tucker->ranks[2]);
    else if ((strategy == MatvecStrategy::TuckerCpDecompress ||
              strategy == MatvecStrategy::TuckerCpLoop) &&
             cs.tucker_cp)
      per_entry = static_cast<double>(cs.tucker_cp->rank);
    if (cs.tucker) r.ranks = cs.tucker->ranks;
    else if (cs.tucker_cp) r.ranks = {cs.tucker_cp->rank, cs.tucker_cp->rank, cs.tucker_cp->rank};
    flops += ntargets * per_entry * nv;
  }
  r.flops_est = flops;
  return r;
}

}  // namespace vie
