// Experiment driver for the compressed FFT-VIE library: rank and compression
// studies, matvec benchmarks, and sphere/phantom validation solves, emitting
// machine-readable CSV/JSON plus a manifest that allows exact re-runs.

#include "vie/experiments.hpp"
#include "vie/scene_io.hpp"
#include "vie/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kSchemaVersion = 1;

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file " + path);
  json j = json::parse(is);
  if (j.contains("schema_version") && j["schema_version"].get<int>() != kSchemaVersion)
    throw std::runtime_error("unsupported config schema_version");
  return j;
}

void write_file(const fs::path& path, const std::string& content) {
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << content;
}

void write_manifest(const fs::path& out_dir, const std::string& experiment, const json& config,
                    std::uint64_t seed) {
  json m;
  m["schema_version"] = kSchemaVersion;
  m["version"] = vie::kVersion;
  m["experiment"] = experiment;
  m["config"] = config;
  m["seed"] = seed;
  write_file(out_dir / "manifest.json", m.dump(2) + "\n");
}

vie::QuadratureSpec quad_from_json(const json& j) {
  vie::QuadratureSpec q;
  q.far_points_per_axis = j.value("far_points_per_axis", q.far_points_per_axis);
  q.near_points_per_axis = j.value("near_points_per_axis", q.near_points_per_axis);
  q.near_radius = j.value("near_radius", q.near_radius);
  q.self_strategy.surface_points_per_axis =
      j.value("self_surface_points_per_axis", q.self_strategy.surface_points_per_axis);
  q.self_strategy.volume_points_per_axis =
      j.value("self_volume_points_per_axis", q.self_strategy.volume_points_per_axis);
  return q;
}

json quad_to_json(const vie::QuadratureSpec& q) {
  return {{"far_points_per_axis", q.far_points_per_axis},
          {"near_points_per_axis", q.near_points_per_axis},
          {"near_radius", q.near_radius},
          {"self_surface_points_per_axis", q.self_strategy.surface_points_per_axis},
          {"self_volume_points_per_axis", q.self_strategy.volume_points_per_axis}};
}

vie::GmresConfig gmres_from_json(const json& j) {
  vie::GmresConfig g;
  g.tolerance = j.value("tolerance", g.tolerance);
  g.inner = j.value("inner", g.inner);
  g.outer = j.value("outer", g.outer);
  return g;
}

json gmres_to_json(const vie::GmresConfig& g) {
  return {{"tolerance", g.tolerance}, {"inner", g.inner}, {"outer", g.outer}};
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  std::string strategy;
  double tol = -1.0;  // < 0: not set
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "RNG seed override");
  cmd->add_option("--strategy", args.strategy, "matvec strategy filter/override");
  cmd->add_option("--tol", args.tol, "tolerance override");
}

int run_rank_sweep(const CommonArgs& args) {
  json cfg_json = load_config(args.config_path);
  vie::RankSweepConfig cfg;
  cfg.edge_m = cfg_json.value("edge_m", cfg.edge_m);
  if (cfg_json.contains("frequencies_hz"))
    cfg.frequencies_hz = cfg_json["frequencies_hz"].get<std::vector<double>>();
  cfg.per_wavelength = cfg_json.value("per_wavelength", cfg.per_wavelength);
  cfg.component_set = cfg_json.value("component_set", cfg.component_set);
  cfg.tol = cfg_json.value("tol", cfg.tol);
  if (cfg_json.value("rule", std::string("sigma_max")) == "energy")
    cfg.rule = vie::TruncationRule::Energy;
  if (cfg_json.contains("quadrature")) cfg.quad = quad_from_json(cfg_json["quadrature"]);
  if (args.tol >= 0) cfg.tol = args.tol;

  auto rows = vie::rank_sweep(cfg);
  json resolved = {{"edge_m", cfg.edge_m},
                   {"frequencies_hz", cfg.frequencies()},
                   {"per_wavelength", cfg.per_wavelength},
                   {"component_set", cfg.component_set},
                   {"tol", cfg.tol},
                   {"rule", to_string(cfg.rule)},
                   {"quadrature", quad_to_json(cfg.quad)}};
  write_manifest(args.out_dir, "rank-sweep", resolved, args.seed);
  write_file(fs::path(args.out_dir) / "rank_sweep.csv", to_csv(rows));
  std::cout << to_csv(rows);
  return 0;
}

int run_compress_report(const CommonArgs& args) {
  json cfg_json = load_config(args.config_path);
  vie::CompressReportConfig cfg;
  cfg.domain_m = cfg_json.value("domain_m", cfg.domain_m);
  cfg.n = cfg_json.value("n", cfg.n);
  cfg.frequency_hz = cfg_json.value("frequency_hz", cfg.frequency_hz);
  if (cfg_json.contains("tolerances"))
    cfg.tolerances = cfg_json["tolerances"].get<std::vector<double>>();
  if (cfg_json.contains("quadrature")) cfg.quad = quad_from_json(cfg_json["quadrature"]);
  if (args.tol >= 0) cfg.tolerances = {args.tol};

  auto rows = vie::compress_report(cfg);
  json resolved = {{"domain_m", cfg.domain_m},
                   {"n", cfg.n},
                   {"frequency_hz", cfg.frequency_hz},
                   {"tolerances", cfg.tolerances},
                   {"quadrature", quad_to_json(cfg.quad)}};
  write_manifest(args.out_dir, "compress-report", resolved, args.seed);
  write_file(fs::path(args.out_dir) / "compress_report.csv", to_csv(rows));
  std::cout << to_csv(rows);
  return 0;
}

int run_matvec_bench(const CommonArgs& args) {
  json cfg_json = load_config(args.config_path);
  vie::MatvecBenchConfig cfg;
  if (cfg_json.contains("sizes")) cfg.sizes = cfg_json["sizes"].get<std::vector<vie::Index>>();
  cfg.rank = cfg_json.value("rank", cfg.rank);
  cfg.repetitions = cfg_json.value("repetitions", cfg.repetitions);
  cfg.max_loop_n = cfg_json.value("max_loop_n", cfg.max_loop_n);
  cfg.seed = cfg_json.value("seed", cfg.seed);
  if (args.seed) cfg.seed = args.seed;
  if (!args.strategy.empty()) {
    std::vector<vie::MatvecStrategy> keep;
    for (auto s : cfg.strategies)
      if (to_string(s) == args.strategy) keep.push_back(s);
    if (keep.empty()) throw std::runtime_error("unknown strategy " + args.strategy);
    cfg.strategies = keep;
  }

  vie::DftService dft;
  auto rows = vie::matvec_bench_experiment(cfg, dft);
  json resolved = {{"sizes", cfg.sizes},
                   {"rank", cfg.rank},
                   {"repetitions", cfg.repetitions},
                   {"max_loop_n", cfg.max_loop_n},
                   {"seed", cfg.seed}};
  write_manifest(args.out_dir, "matvec-bench", resolved, cfg.seed);
  write_file(fs::path(args.out_dir) / "matvec_bench.csv", to_csv(rows));
  std::cout << to_csv(rows);
  return 0;
}

int run_sphere_validate(const CommonArgs& args) {
  json cfg_json = load_config(args.config_path);
  vie::SphereValidateConfig cfg;
  cfg.domain_m = cfg_json.value("domain_m", cfg.domain_m);
  cfg.radius_m = cfg_json.value("radius_m", cfg.radius_m);
  cfg.eps_prime = cfg_json.value("eps_prime", cfg.eps_prime);
  cfg.sigma = cfg_json.value("sigma", cfg.sigma);
  cfg.frequency_hz = cfg_json.value("frequency_hz", cfg.frequency_hz);
  if (cfg_json.contains("resolutions_mm"))
    cfg.resolutions_mm = cfg_json["resolutions_mm"].get<std::vector<double>>();
  if (cfg_json.contains("gmres")) cfg.gmres = gmres_from_json(cfg_json["gmres"]);
  if (cfg_json.contains("quadrature")) cfg.quad = quad_from_json(cfg_json["quadrature"]);
  if (args.tol >= 0)
    for (auto& m : cfg.methods)
      if (m.strategy != vie::MatvecStrategy::Dense) m.tol = args.tol;
  if (!args.strategy.empty()) {
    std::vector<vie::SolveMethod> keep;
    for (const auto& m : cfg.methods)
      if (m.name == args.strategy) keep.push_back(m);
    if (keep.empty()) throw std::runtime_error("unknown method " + args.strategy);
    cfg.methods = keep;
  }

  vie::DftService dft;
  auto rows = vie::sphere_validate(cfg, dft);
  json resolved = {{"domain_m", cfg.domain_m},
                   {"radius_m", cfg.radius_m},
                   {"eps_prime", cfg.eps_prime},
                   {"sigma", cfg.sigma},
                   {"frequency_hz", cfg.frequency_hz},
                   {"resolutions_mm", cfg.resolutions_mm},
                   {"gmres", gmres_to_json(cfg.gmres)},
                   {"quadrature", quad_to_json(cfg.quad)}};
  write_manifest(args.out_dir, "sphere-validate", resolved, args.seed);
  write_file(fs::path(args.out_dir) / "sphere_validate.csv", to_csv(rows));

  json report;
  report["rows"] = json::array();
  bool all_converged = true;
  for (const auto& r : rows) {
    report["rows"].push_back({{"resolution_mm", r.resolution_mm},
                              {"n", r.n},
                              {"method", r.method},
                              {"p_abs_vie", r.p_abs_vie},
                              {"p_abs_mie", r.p_abs_mie},
                              {"rel_error", r.rel_error},
                              {"iterations", r.iterations},
                              {"converged", r.converged},
                              {"wall_s", r.wall_s}});
    all_converged = all_converged && r.converged;
  }
  write_file(fs::path(args.out_dir) / "sphere_validate.json", report.dump(2) + "\n");
  std::cout << to_csv(rows);
  return all_converged ? 0 : 2;
}

int run_phantom_solve(const CommonArgs& args) {
  json cfg_json = load_config(args.config_path);
  vie::PhantomSolveConfig cfg;
  cfg.domain_m = cfg_json.value("domain_m", cfg.domain_m);
  cfg.n = cfg_json.value("n", cfg.n);
  cfg.frequency_hz = cfg_json.value("frequency_hz", cfg.frequency_hz);
  if (cfg_json.contains("tolerances"))
    cfg.tolerances = cfg_json["tolerances"].get<std::vector<double>>();
  if (cfg_json.contains("strategies"))
    cfg.strategies = cfg_json["strategies"].get<std::vector<std::string>>();
  cfg.cp_iters = cfg_json.value("cp_iters", cfg.cp_iters);
  if (cfg_json.contains("gmres")) cfg.gmres = gmres_from_json(cfg_json["gmres"]);
  if (cfg_json.contains("quadrature")) cfg.quad = quad_from_json(cfg_json["quadrature"]);
  if (cfg_json.contains("layers")) {
    cfg.layers.clear();
    for (const auto& lj : cfg_json["layers"]) {
      vie::PhantomLayer layer;
      auto ax = lj.at("semi_axes_m").get<std::vector<double>>();
      layer.semi_axes = {ax.at(0), ax.at(1), ax.at(2)};
      layer.eps_prime = lj.at("eps_prime").get<double>();
      layer.sigma = lj.at("sigma").get<double>();
      cfg.layers.push_back(layer);
    }
  }
  if (args.tol >= 0) cfg.tolerances = {args.tol};
  if (!args.strategy.empty()) cfg.strategies = {args.strategy};

  vie::DftService dft;
  vie::PhantomSolveResult result = vie::phantom_solve(cfg, dft);

  json layers = json::array();
  for (const auto& l : cfg.layers)
    layers.push_back(
        {{"semi_axes_m", l.semi_axes}, {"eps_prime", l.eps_prime}, {"sigma", l.sigma}});
  json resolved = {{"domain_m", cfg.domain_m},
                   {"n", cfg.n},
                   {"frequency_hz", cfg.frequency_hz},
                   {"tolerances", cfg.tolerances},
                   {"strategies", cfg.strategies},
                   {"cp_iters", cfg.cp_iters},
                   {"layers", layers},
                   {"gmres", gmres_to_json(cfg.gmres)},
                   {"quadrature", quad_to_json(cfg.quad)}};
  write_manifest(args.out_dir, "phantom-solve", resolved, args.seed);
  write_file(fs::path(args.out_dir) / "phantom_solve.csv", to_csv(result.rows));

  json report;
  report["dense_total_power_w"] = result.dense_total_power;
  report["dense_iterations"] = result.dense_iterations;
  report["dense_converged"] = result.dense_converged;
  report["rows"] = json::array();
  bool all_converged = result.dense_converged;
  for (const auto& r : result.rows) {
    report["rows"].push_back({{"tol", r.tol},
                              {"strategy", r.strategy},
                              {"err_pabs", r.err_pabs},
                              {"err_b1", r.err_b1},
                              {"iterations", r.iterations},
                              {"converged", r.converged},
                              {"wall_s", r.wall_s}});
    all_converged = all_converged && r.converged;
  }
  write_file(fs::path(args.out_dir) / "phantom_solve.json", report.dump(2) + "\n");
  std::cout << to_csv(result.rows);
  return all_converged ? 0 : 2;
}

int run_solve(const CommonArgs& args) {
  if (args.config_path.empty()) throw std::runtime_error("solve requires --config <scene.json>");
  vie::Scene scene = vie::load_scene(args.config_path);
  json cfg_json = load_config(args.config_path);

  vie::GmresConfig gmres_cfg;
  if (cfg_json.contains("gmres")) gmres_cfg = gmres_from_json(cfg_json["gmres"]);
  vie::QuadratureSpec quad;
  if (cfg_json.contains("quadrature")) quad = quad_from_json(cfg_json["quadrature"]);
  const bool compute_h = cfg_json.value("compute_h", true);

  std::string strategy_name = cfg_json.value("strategy", std::string("dense"));
  if (!args.strategy.empty()) strategy_name = args.strategy;
  double tol = cfg_json.value("tol", 1e-8);
  if (args.tol >= 0) tol = args.tol;

  vie::MatvecStrategy strategy = vie::MatvecStrategy::Dense;
  vie::SpectrumBuildOptions opts;
  opts.tol = tol;
  if (strategy_name == "dense") {
    strategy = vie::MatvecStrategy::Dense;
  } else if (strategy_name == "hosvd") {
    strategy = vie::MatvecStrategy::HosvdDecompress;
    opts.dense = false;
    opts.tucker = true;
  } else if (strategy_name == "tuckercp") {
    strategy = vie::MatvecStrategy::TuckerCpDecompress;
    opts.dense = false;
    opts.tucker_cp = true;
    opts.cp_iters = cfg_json.value("cp_iters", 1000);
  } else {
    throw std::runtime_error("unknown strategy " + strategy_name);
  }

  vie::DftService dft;
  const double k0 = scene.map.k0();
  auto n_tensors = vie::assemble_operator(scene.map.grid, k0, vie::OperatorKind::N, quad);
  vie::EmbeddedSpectrum opn =
      vie::build_operator_spectra(vie::OperatorKind::N, n_tensors, opts, dft);
  std::optional<vie::EmbeddedSpectrum> opk;
  if (compute_h) {
    auto k_tensors = vie::assemble_operator(scene.map.grid, k0, vie::OperatorKind::K, quad);
    opk = vie::build_operator_spectra(vie::OperatorKind::K, k_tensors, opts, dft);
  }
  vie::SolveReport rep = vie::solve_scene(scene.map, scene.incident, opn,
                                          opk ? &*opk : nullptr, strategy, gmres_cfg, dft);

  write_manifest(args.out_dir, "solve", cfg_json, args.seed);
  vie::write_solve_report(args.out_dir, rep);
  std::cout << "converged=" << (rep.converged ? 1 : 0) << " iterations=" << rep.iterations
            << " total_absorbed_power_w=" << rep.post.total_absorbed_power << "\n";
  return rep.converged ? 0 : 2;
}

int run_mie(const CommonArgs& args) {
  json cfg_json = load_config(args.config_path);
  vie::MieSphere s;
  s.radius = cfg_json.value("radius_m", 0.15);
  const double f = cfg_json.value("frequency_hz", 2.98e8);
  const double omega = 2.0 * vie::constants::pi * f;
  s.k0 = omega / vie::constants::c0;
  const double eps_prime = cfg_json.value("eps_prime", 65.0);
  const double sigma = cfg_json.value("sigma", 0.6);
  s.eps_r = vie::cplx(eps_prime, -sigma / (vie::constants::epsilon0 * omega));
  s.amplitude = cfg_json.value("amplitude", 1.0);
  s.l_max = cfg_json.value("l_max", 0);

  vie::MieResult r = vie::mie_solve(s);
  json out = {{"radius_m", s.radius},
              {"frequency_hz", f},
              {"eps_prime", eps_prime},
              {"sigma", sigma},
              {"amplitude", s.amplitude},
              {"size_parameter", s.size_parameter()},
              {"l_max_used", r.l_max_used},
              {"q_ext", r.q_ext},
              {"q_sca", r.q_sca},
              {"q_abs", r.q_abs},
              {"c_ext_m2", r.c_ext},
              {"c_sca_m2", r.c_sca},
              {"c_abs_m2", r.c_abs},
              {"p_ext_w", r.p_ext},
              {"p_sca_w", r.p_sca},
              {"p_abs_w", r.p_abs}};
  write_manifest(args.out_dir, "mie", cfg_json, args.seed);
  write_file(fs::path(args.out_dir) / "mie.json", out.dump(2) + "\n");
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tucker-compressed FFT-VIE experiment driver"};
  app.require_subcommand(1);
  app.set_version_flag("--version", vie::kVersion);

  CommonArgs rank_args, compress_args, bench_args, sphere_args, phantom_args, mie_args;
  CLI::App* rank = app.add_subcommand("rank-sweep", "multilinear ranks vs frequency");
  add_common(rank, rank_args);
  CLI::App* compress = app.add_subcommand("compress-report", "compressed storage vs tolerance");
  add_common(compress, compress_args);
  CLI::App* bench = app.add_subcommand("matvec-bench", "matvec strategy timings");
  add_common(bench, bench_args);
  CLI::App* sphere = app.add_subcommand("sphere-validate", "sphere absorbed power vs Mie");
  add_common(sphere, sphere_args);
  CLI::App* phantom = app.add_subcommand("phantom-solve", "compressed-vs-dense phantom errors");
  add_common(phantom, phantom_args);
  CLI::App* mie = app.add_subcommand("mie", "Mie series cross sections");
  add_common(mie, mie_args);
  CommonArgs solve_args;
  CLI::App* solve = app.add_subcommand("solve", "direct solve of a scene manifest");
  add_common(solve, solve_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (rank->parsed()) return run_rank_sweep(rank_args);
    if (compress->parsed()) return run_compress_report(compress_args);
    if (bench->parsed()) return run_matvec_bench(bench_args);
    if (sphere->parsed()) return run_sphere_validate(sphere_args);
    if (phantom->parsed()) return run_phantom_solve(phantom_args);
    if (mie->parsed()) return run_mie(mie_args);
    if (solve->parsed()) return run_solve(solve_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
