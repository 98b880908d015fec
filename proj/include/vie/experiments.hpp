#pragma once

#include "vie/assembly.hpp"
#include "vie/container.hpp"
#include "vie/decomp.hpp"
#include "vie/mie.hpp"
#include "vie/operator.hpp"
#include "vie/scenes.hpp"
#include "vie/solver.hpp"

#include <cstdio>
#include <random>
#include <string>
#include <vector>

namespace vie {

namespace detail {

inline std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// rank sweep: multilinear ranks of the defining tensors vs frequency
// ---------------------------------------------------------------------------

struct RankSweepConfig {
  double edge_m = 1.0;                    // cube edge
  std::vector<double> frequencies_hz;     // default 0.3..3.0 GHz
  int per_wavelength = 10;                // lambda / resolution
  std::string component_set = "scalar";   // scalar | N | K
  double tol = 1e-8;
  TruncationRule rule = TruncationRule::SigmaMax;
  QuadratureSpec quad = [] {
    QuadratureSpec q;
    q.far_points_per_axis = 2;  // rank structure is insensitive to quadrature order
    q.near_points_per_axis = 6;
    return q;
  }();
  double memory_budget_bytes = 2.0e9;

  std::vector<double> frequencies() const {
    if (!frequencies_hz.empty()) return frequencies_hz;
    std::vector<double> f;
    for (int i = 1; i <= 10; ++i) f.push_back(0.3e9 * i);
    return f;
  }
};

struct RankSweepRow {
  double frequency_hz = 0.0;
  int per_wavelength = 0;
  std::string component_set;
  Index n = 0;
  Index max_rank = 0;
  std::string status = "ok";
};

inline std::vector<RankSweepRow> rank_sweep(const RankSweepConfig& cfg) {
  std::vector<RankSweepRow> rows;
  for (double f : cfg.frequencies()) {
    const double lambda = constants::c0 / f;
    const double res = lambda / cfg.per_wavelength;
    const Index n = std::max<Index>(1, static_cast<Index>(std::llround(cfg.edge_m / res)));
    RankSweepRow row;
    row.frequency_hz = f;
    row.per_wavelength = cfg.per_wavelength;
    row.component_set = cfg.component_set;
    row.n = n;

    const double bytes = 16.0 * static_cast<double>(n) * n * n;
    if (bytes * 4.0 > cfg.memory_budget_bytes) {
      row.status = "skipped: memory budget";
      rows.push_back(row);
      continue;
    }

    VoxelGrid grid({n, n, n}, {cfg.edge_m / n, cfg.edge_m / n, cfg.edge_m / n});
    const double k0 = 2.0 * constants::pi * f / constants::c0;
    std::vector<KernelComponent> comps;
    if (cfg.component_set == "scalar") comps = unique_components(OperatorKind::ScalarG);
    else if (cfg.component_set == "N") comps = unique_components(OperatorKind::N);
    else if (cfg.component_set == "K") comps = unique_components(OperatorKind::K);
    else throw std::invalid_argument("rank_sweep: unknown component set " + cfg.component_set);

    Index max_rank = 0;
    for (const KernelComponent& c : comps) {
      Tensor3 t = assemble_defining_tensor(grid, k0, c, cfg.quad);
      const auto ranks = multilinear_rank(t, cfg.tol, cfg.rule);
      max_rank = std::max({max_rank, ranks[0], ranks[1], ranks[2]});
    }
    row.max_rank = max_rank;
    rows.push_back(row);
  }
  return rows;
}

inline std::string to_csv(const std::vector<RankSweepRow>& rows) {
  std::string out = "frequency_hz,per_wavelength,component_set,n,max_rank,status\n";
  for (const auto& r : rows) {
    out += detail::fmt_g(r.frequency_hz) + "," + std::to_string(r.per_wavelength) + "," +
           r.component_set + "," + std::to_string(r.n) + "," + std::to_string(r.max_rank) +
           "," + r.status + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// compression report: storage of the compressed N and K families vs tolerance
// ---------------------------------------------------------------------------

struct CompressReportConfig {
  double domain_m = 0.24;
  Index n = 48;
  double frequency_hz = 2.98e8;
  std::vector<double> tolerances = {1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10};
  QuadratureSpec quad;
};

struct CompressReportRow {
  std::string op;
  std::string rule;
  double tol = 0.0;
  Index max_rank = 0;
  std::int64_t original_elements = 0;
  std::int64_t compressed_elements = 0;
  double compressed_mb = 0.0;
  double compression_factor = 0.0;
};

inline std::vector<CompressReportRow> compress_report(const CompressReportConfig& cfg) {
  const double res = cfg.domain_m / cfg.n;
  VoxelGrid grid({cfg.n, cfg.n, cfg.n}, {res, res, res});
  const double k0 = 2.0 * constants::pi * cfg.frequency_hz / constants::c0;

  std::vector<CompressReportRow> rows;
  for (OperatorKind kind : {OperatorKind::N, OperatorKind::K}) {
    // one SVD per unfolding per component; every (tol, rule) row reuses them
    std::vector<std::array<Eigen::VectorXd, 3>> spectra;
    for (const KernelComponent& c : unique_components(kind)) {
      Tensor3 t = assemble_defining_tensor(grid, k0, c, cfg.quad);
      std::array<Eigen::VectorXd, 3> sv;
      for (int q = 0; q < 3; ++q) {
        Eigen::MatrixXcd u, v;
        detail::thin_svd(unfold(t, q + 1), u, sv[q], v);
      }
      spectra.push_back(std::move(sv));
    }
    for (TruncationRule rule : {TruncationRule::SigmaMax, TruncationRule::Energy}) {
      for (double tol : cfg.tolerances) {
        CompressReportRow row;
        row.op = to_string(kind);
        row.rule = to_string(rule);
        row.tol = tol;
        row.original_elements =
            static_cast<std::int64_t>(spectra.size()) * cfg.n * cfg.n * cfg.n;
        for (const auto& sv : spectra) {
          std::array<Index, 3> ranks;
          for (int q = 0; q < 3; ++q) ranks[q] = detail::truncation_rank(sv[q], tol, rule);
          row.max_rank = std::max({row.max_rank, ranks[0], ranks[1], ranks[2]});
          row.compressed_elements += ranks[0] * ranks[1] * ranks[2] +
                                     cfg.n * (ranks[0] + ranks[1] + ranks[2]);
        }
        row.compressed_mb = 16.0 * static_cast<double>(row.compressed_elements) / 1.0e6;
        row.compression_factor = static_cast<double>(row.original_elements) /
                                 static_cast<double>(std::max<std::int64_t>(1, row.compressed_elements));
        rows.push_back(row);
      }
    }
  }
  return rows;
}

inline std::string to_csv(const std::vector<CompressReportRow>& rows) {
  std::string out =
      "operator,rule,tol,max_rank,original_elements,compressed_elements,compressed_mb,"
      "compression_factor\n";
  for (const auto& r : rows) {
    out += r.op + "," + r.rule + "," + detail::fmt_g(r.tol) + "," + std::to_string(r.max_rank) +
           "," + std::to_string(r.original_elements) + "," +
           std::to_string(r.compressed_elements) + "," + detail::fmt_g(r.compressed_mb) + "," +
           detail::fmt_g(r.compression_factor) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// matvec benchmark on synthetic compressed spectra (Fourier-domain sizes)
// ---------------------------------------------------------------------------

struct MatvecBenchConfig {
  std::vector<Index> sizes = {32, 64, 96};  // embedded (spectrum) linear size, even
  Index rank = 25;
  int repetitions = 3;
  Index max_loop_n = 64;  // the 6D loop above this size is reported as skipped
  std::uint64_t seed = 1234;
  std::vector<MatvecStrategy> strategies = {
      MatvecStrategy::Dense, MatvecStrategy::HosvdDecompress, MatvecStrategy::HosvdLoop,
      MatvecStrategy::TuckerCpDecompress, MatvecStrategy::TuckerCpLoop};
};

struct MatvecBenchRow {
  std::string strategy;
  Index n = 0;  // embedded linear size
  Index rank = 0;
  double median_ms = 0.0;
  double product_ms = 0.0;
  double product_min_ms = 0.0;
  double fft_ms = 0.0;
  double flops_est = 0.0;
  std::string status = "ok";
};

/// One synthetic component with consistent dense / Tucker / Tucker+CP
/// spectra of the given rank, already "in the Fourier domain".
inline EmbeddedSpectrum synthetic_spectrum(Index embedded_n, Index rank, std::uint64_t seed) {
  if (embedded_n % 2 != 0) throw std::invalid_argument("synthetic_spectrum: size must be even");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto rand_mat = [&](Index rows, Index cols) {
    FactorMatrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = cplx(gauss(rng), gauss(rng));
    return m;
  };

  EmbeddedSpectrum op;
  op.kind = OperatorKind::N;
  op.grid_dims = {embedded_n / 2, embedded_n / 2, embedded_n / 2};
  op.embedded_dims = {embedded_n, embedded_n, embedded_n};

  ComponentSpectrum cs;
  cs.comp = {OperatorKind::N, 0, 0};
  cs.parity = component_parity(cs.comp);

  TuckerForm tucker;
  tucker.ranks = {rank, rank, rank};
  tucker.core = Tensor3(rank, rank, rank);
  for (Index i = 0; i < tucker.core.size(); ++i)
    tucker.core.flat()[i] = cplx(gauss(rng), gauss(rng));
  for (int q = 0; q < 3; ++q) tucker.factors[q] = rand_mat(embedded_n, rank);
  cs.dense = tucker.reconstruct();
  cs.tucker = std::move(tucker);

  TuckerCPForm cp;
  cp.rank = rank;
  for (int q = 0; q < 3; ++q) cp.factors[q] = rand_mat(embedded_n, rank);
  cs.tucker_cp = std::move(cp);

  op.comps.push_back(std::move(cs));
  return op;
}

inline std::vector<MatvecBenchRow> matvec_bench_experiment(const MatvecBenchConfig& cfg,
                                                           DftService& dft) {
  std::vector<MatvecBenchRow> rows;
  for (Index n : cfg.sizes) {
    EmbeddedSpectrum op = synthetic_spectrum(n, cfg.rank, cfg.seed + static_cast<std::uint64_t>(n));
    CurrentField x(op.grid_dims);
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b9);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int q = 0; q < 3; ++q)
      for (Index i = 0; i < x.comp[q].size(); ++i)
        x.comp[q].flat()[i] = cplx(gauss(rng), gauss(rng));

    for (MatvecStrategy s : cfg.strategies) {
      MatvecBenchRow row;
      row.strategy = to_string(s);
      row.n = n;
      row.rank = cfg.rank;
      if (s == MatvecStrategy::HosvdLoop && n > cfg.max_loop_n) {
        row.status = "skipped: loop cap";
        rows.push_back(row);
        continue;
      }
      MatvecBenchResult b = matvec_bench(op, x, s, cfg.repetitions, dft);
      row.median_ms = b.median_ms;
      row.product_ms = b.product_ms;
      row.product_min_ms = b.product_min_ms;
      row.fft_ms = b.fft_ms;
      row.flops_est = b.flops_est;
      rows.push_back(row);
    }
  }
  return rows;
}

inline std::string to_csv(const std::vector<MatvecBenchRow>& rows) {
  std::string out =
      "strategy,n,rank,median_ms,product_ms,product_min_ms,fft_ms,flops_est,status\n";
  for (const auto& r : rows) {
    out += r.strategy + "," + std::to_string(r.n) + "," + std::to_string(r.rank) + "," +
           detail::fmt_short(r.median_ms) + "," + detail::fmt_short(r.product_ms) + "," +
           detail::fmt_short(r.product_min_ms) + "," + detail::fmt_short(r.fft_ms) + "," +
           detail::fmt_g(r.flops_est) + "," + r.status + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// sphere refinement study against the Mie series
// ---------------------------------------------------------------------------

struct SolveMethod {
  std::string name;
  MatvecStrategy strategy = MatvecStrategy::Dense;
  double tol = 1e-8;     // compression tolerance for the non-dense methods
  int cp_iters = 1000;
};

inline std::vector<SolveMethod> default_sphere_methods() {
  return {{"dense", MatvecStrategy::Dense, 0.0, 0},
          {"hosvd", MatvecStrategy::HosvdDecompress, 1e-8, 0},
          {"tuckercp", MatvecStrategy::TuckerCpDecompress, 1e-8, 1000}};
}

struct SphereValidateConfig {
  double domain_m = 0.3;
  double radius_m = 0.15;
  double eps_prime = 65.0;
  double sigma = 0.6;
  double frequency_hz = 2.98e8;
  std::vector<double> resolutions_mm = {10.0, 5.0};
  std::vector<SolveMethod> methods = default_sphere_methods();
  GmresConfig gmres;
  QuadratureSpec quad;
};

struct SphereValidateRow {
  double resolution_mm = 0.0;
  Index n = 0;
  std::string method;
  double p_abs_vie = 0.0;
  double p_abs_mie = 0.0;
  double rel_error = 0.0;
  int iterations = 0;
  bool converged = false;
  double wall_s = 0.0;
};

inline std::vector<SphereValidateRow> sphere_validate(const SphereValidateConfig& cfg,
                                                      DftService& dft) {
  const double omega = 2.0 * constants::pi * cfg.frequency_hz;
  MieSphere sphere;
  sphere.radius = cfg.radius_m;
  sphere.k0 = omega / constants::c0;
  sphere.eps_r = cplx(cfg.eps_prime, -cfg.sigma / (constants::epsilon0 * omega));
  const double p_mie = mie_absorbed_power(sphere);

  bool needs_tucker = false, needs_cp = false;
  for (const auto& m : cfg.methods) {
    needs_tucker |= m.strategy == MatvecStrategy::HosvdDecompress ||
                    m.strategy == MatvecStrategy::HosvdLoop;
    needs_cp |= m.strategy == MatvecStrategy::TuckerCpDecompress ||
                m.strategy == MatvecStrategy::TuckerCpLoop;
  }

  std::vector<SphereValidateRow> rows;
  for (double res_mm : cfg.resolutions_mm) {
    const Index n = static_cast<Index>(std::llround(cfg.domain_m / (res_mm * 1e-3)));
    DielectricMap map = sphere_scene(cfg.domain_m, n, cfg.frequency_hz, cfg.radius_m,
                                     cfg.eps_prime, cfg.sigma);
    auto tensors = assemble_operator(map.grid, map.k0(), OperatorKind::N, cfg.quad);

    for (const auto& method : cfg.methods) {
      SpectrumBuildOptions opts;
      opts.dense = method.strategy == MatvecStrategy::Dense;
      opts.tucker = needs_tucker && (method.strategy == MatvecStrategy::HosvdDecompress ||
                                     method.strategy == MatvecStrategy::HosvdLoop);
      opts.tucker_cp = needs_cp && (method.strategy == MatvecStrategy::TuckerCpDecompress ||
                                    method.strategy == MatvecStrategy::TuckerCpLoop);
      opts.tol = method.tol;
      opts.cp_iters = method.cp_iters;
      EmbeddedSpectrum op = build_operator_spectra(OperatorKind::N, tensors, opts, dft);

      PlaneWave inc({1, 0, 0}, {0, 0, 1}, 1.0);
      SolveReport rep = solve_scene(map, inc, op, nullptr, method.strategy, cfg.gmres, dft);

      SphereValidateRow row;
      row.resolution_mm = res_mm;
      row.n = n;
      row.method = method.name;
      row.p_abs_vie = rep.post.total_absorbed_power;
      row.p_abs_mie = p_mie;
      row.rel_error = std::abs(row.p_abs_vie - p_mie) / p_mie;
      row.iterations = rep.iterations;
      row.converged = rep.converged;
      row.wall_s = rep.wall_time_s;
      rows.push_back(row);
    }
  }
  return rows;
}

/// Timing columns live in the JSON report so the CSV is byte-reproducible.
inline std::string to_csv(const std::vector<SphereValidateRow>& rows) {
  std::string out =
      "resolution_mm,n,method,p_abs_vie,p_abs_mie,rel_error,iterations,converged\n";
  for (const auto& r : rows) {
    out += detail::fmt_g(r.resolution_mm) + "," + std::to_string(r.n) + "," + r.method + "," +
           detail::fmt_g(r.p_abs_vie) + "," + detail::fmt_g(r.p_abs_mie) + "," +
           detail::fmt_g(r.rel_error) + "," + std::to_string(r.iterations) + "," +
           (r.converged ? "1" : "0") + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// phantom solve: compressed-vs-dense solution error across SVD tolerances
// ---------------------------------------------------------------------------

struct PhantomSolveConfig {
  double domain_m = 0.24;
  Index n = 48;
  double frequency_hz = 2.98e8;
  std::vector<PhantomLayer> layers = default_phantom_layers();
  std::vector<double> tolerances = {1e-4, 1e-6, 1e-8, 1e-10};
  std::vector<std::string> strategies = {"hosvd", "tuckercp"};
  int cp_iters = 1000;
  GmresConfig gmres;
  QuadratureSpec quad;
};

struct PhantomSolveRow {
  double tol = 0.0;
  std::string strategy;
  double err_pabs = 0.0;  // L2 relative error vs the dense solve
  double err_b1 = 0.0;
  int iterations = 0;
  bool converged = true;
  double wall_s = 0.0;
};

struct PhantomSolveResult {
  std::vector<PhantomSolveRow> rows;
  double dense_total_power = 0.0;
  int dense_iterations = 0;
  bool dense_converged = false;
};

namespace detail {

inline double l2_relative_error(const Tensor3& test, const Tensor3& ref) {
  double num = 0.0, den = 0.0;
  for (Index i = 0; i < ref.size(); ++i) {
    num += std::norm(test.flat()[i] - ref.flat()[i]);
    den += std::norm(ref.flat()[i]);
  }
  return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace detail

inline PhantomSolveResult phantom_solve(const PhantomSolveConfig& cfg, DftService& dft) {
  DielectricMap map =
      layered_phantom_scene(cfg.domain_m, cfg.n, cfg.frequency_hz, cfg.layers);
  auto n_tensors = assemble_operator(map.grid, map.k0(), OperatorKind::N, cfg.quad);
  auto k_tensors = assemble_operator(map.grid, map.k0(), OperatorKind::K, cfg.quad);
  PlaneWave inc({1, 0, 0}, {0, 0, 1}, 1.0);

  PhantomSolveResult result;
  SpectrumBuildOptions dense_opts;
  EmbeddedSpectrum opn_dense = build_operator_spectra(OperatorKind::N, n_tensors, dense_opts, dft);
  EmbeddedSpectrum opk_dense = build_operator_spectra(OperatorKind::K, k_tensors, dense_opts, dft);
  SolveReport dense =
      solve_scene(map, inc, opn_dense, &opk_dense, MatvecStrategy::Dense, cfg.gmres, dft);
  result.dense_total_power = dense.post.total_absorbed_power;
  result.dense_iterations = dense.iterations;
  result.dense_converged = dense.converged;

  for (double tol : cfg.tolerances) {
    SpectrumBuildOptions opts;
    opts.dense = false;
    opts.tol = tol;
    opts.cp_iters = cfg.cp_iters;
    for (const std::string& name : cfg.strategies) {
      opts.tucker = name == "hosvd";
      opts.tucker_cp = name == "tuckercp";
      const MatvecStrategy strategy = name == "hosvd" ? MatvecStrategy::HosvdDecompress
                                                      : MatvecStrategy::TuckerCpDecompress;
      EmbeddedSpectrum opn = build_operator_spectra(OperatorKind::N, n_tensors, opts, dft);
      EmbeddedSpectrum opk = build_operator_spectra(OperatorKind::K, k_tensors, opts, dft);
      SolveReport rep = solve_scene(map, inc, opn, &opk, strategy, cfg.gmres, dft);

      PhantomSolveRow row;
      row.tol = tol;
      row.strategy = name;
      row.err_pabs = detail::l2_relative_error(rep.post.p_abs, dense.post.p_abs);
      row.err_b1 = detail::l2_relative_error(rep.post.b1_plus, dense.post.b1_plus);
      row.iterations = rep.iterations;
      row.converged = rep.converged;
      row.wall_s = rep.wall_time_s;
      result.rows.push_back(row);
    }
  }
  return result;
}

/// Timing columns live in the JSON report so the CSV is byte-reproducible.
inline std::string to_csv(const std::vector<PhantomSolveRow>& rows) {
  std::string out = "tol,strategy,err_pabs,err_b1,iterations,converged\n";
  for (const auto& r : rows) {
    out += detail::fmt_g(r.tol) + "," + r.strategy + "," + detail::fmt_g(r.err_pabs) + "," +
           detail::fmt_g(r.err_b1) + "," + std::to_string(r.iterations) + "," +
           (r.converged ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace vie
