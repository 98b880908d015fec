#pragma once

#include "vie/container.hpp"
#include "vie/solver.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <string>

namespace vie {

/// Scene description for a direct solve:
///   {
///     "schema_version": 1,
///     "grid": {"dims": [n1,n2,n3], "resolution_m": [dx,dy,dz],
///              "origin_m": [x,y,z]},
///     "frequency_hz": 2.98e8,
///     "incident": {"polarization": [1,0,0], "direction": [0,0,1],
///                  "amplitude": 1.0},
///     "permittivity_volume": "eps.bin"
///   }
/// The permittivity volume is a headerless little-endian array of complex
/// doubles (re, im pairs) in the tensor's axis-1-fastest order, one entry per
/// voxel, resolved relative to the manifest's directory.
struct Scene {
  DielectricMap map;
  PlaneWave incident;
};

inline Scene load_scene(const std::string& manifest_path) {
  std::ifstream is(manifest_path);
  if (!is) throw std::runtime_error("load_scene: cannot open " + manifest_path);
  nlohmann::json j = nlohmann::json::parse(is);

  const auto& jg = j.at("grid");
  auto dims_v = jg.at("dims").get<std::vector<Index>>();
  auto res_v = jg.at("resolution_m").get<std::vector<double>>();
  std::vector<double> org_v = {0.0, 0.0, 0.0};
  if (jg.contains("origin_m")) org_v = jg.at("origin_m").get<std::vector<double>>();
  if (dims_v.size() != 3 || res_v.size() != 3 || org_v.size() != 3)
    throw std::runtime_error("load_scene: grid arrays must have three entries");
  VoxelGrid grid({dims_v[0], dims_v[1], dims_v[2]}, {res_v[0], res_v[1], res_v[2]},
                 {org_v[0], org_v[1], org_v[2]});

  Scene scene;
  scene.map = DielectricMap(grid, j.at("frequency_hz").get<double>());

  const auto& ji = j.at("incident");
  auto pol = ji.at("polarization").get<std::vector<double>>();
  auto dir = ji.at("direction").get<std::vector<double>>();
  scene.incident = PlaneWave({pol.at(0), pol.at(1), pol.at(2)},
                             {dir.at(0), dir.at(1), dir.at(2)},
                             ji.value("amplitude", 1.0));

  const std::filesystem::path vol_path =
      std::filesystem::path(manifest_path).parent_path() /
      j.at("permittivity_volume").get<std::string>();
  std::ifstream vol(vol_path, std::ios::binary);
  if (!vol) throw std::runtime_error("load_scene: cannot open " + vol_path.string());
  const Index count = grid.num_voxels();
  std::vector<double> raw(2 * count);
  vol.read(reinterpret_cast<char*>(raw.data()),
           static_cast<std::streamsize>(raw.size() * sizeof(double)));
  if (!vol) throw std::runtime_error("load_scene: permittivity volume truncated");
  for (Index m = 0; m < count; ++m) scene.map.eps_r.flat()[m] = cplx(raw[2 * m], raw[2 * m + 1]);
  return scene;
}

namespace detail {

inline void write_raw_complex(const std::filesystem::path& path, const Tensor3& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  for (Index m = 0; m < t.size(); ++m) {
    const double re = t.flat()[m].real(), im = t.flat()[m].imag();
    os.write(reinterpret_cast<const char*>(&re), sizeof(double));
    os.write(reinterpret_cast<const char*>(&im), sizeof(double));
  }
}

inline void write_raw_real(const std::filesystem::path& path, const Tensor3& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  for (Index m = 0; m < t.size(); ++m) {
    const double re = t.flat()[m].real();
    os.write(reinterpret_cast<const char*>(&re), sizeof(double));
  }
}

}  // namespace detail

/// Writes an assembled defining tensor in the binary container (uncompressed
/// variant) together with a JSON manifest recording the grid, wavenumber,
/// component, quadrature spec and the nondimensionalization scale that the
/// assembly used internally.
inline void save_assembled_tensor(const std::string& out_dir, const VoxelGrid& grid, double k0,
                                  const KernelComponent& comp, const QuadratureSpec& quad,
                                  const Tensor3& t) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string stem = comp.name();
  save_container((fs::path(out_dir) / (stem + ".bin")).string(), t);

  nlohmann::json j;
  j["grid"] = {{"dims", grid.dims},
               {"resolution_m", grid.resolution},
               {"origin_m", grid.origin}};
  j["k0"] = k0;
  j["component"] = stem;
  j["quadrature"] = {{"far_points_per_axis", quad.far_points_per_axis},
                     {"near_points_per_axis", quad.near_points_per_axis},
                     {"near_radius", quad.near_radius},
                     {"self_surface_points_per_axis", quad.self_strategy.surface_points_per_axis},
                     {"self_volume_points_per_axis", quad.self_strategy.volume_points_per_axis}};
  j["nondimensionalization"] = {
      {"length_scale_m", grid.resolution[0]},
      {"si_power", comp.op == OperatorKind::N ? 3 : (comp.op == OperatorKind::K ? 4 : 5)}};
  std::ofstream os(fs::path(out_dir) / (stem + ".json"));
  os << j.dump(2) << "\n";
}

/// Writes report.json (scalars + residual history) and the field volumes as
/// headerless little-endian arrays: j_{x,y,z}.bin, e_{x,y,z}.bin (complex
/// pairs), p_abs.bin and, when the h field was computed, h_{x,y,z}.bin and
/// b1_plus.bin.
inline void write_solve_report(const std::string& out_dir, const SolveReport& rep) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  nlohmann::json j;
  j["converged"] = rep.converged;
  j["iterations"] = rep.iterations;
  j["final_relative_residual"] = rep.final_relative_residual;
  j["residual_history"] = rep.residual_history;
  j["total_absorbed_power_w"] = rep.post.total_absorbed_power;
  j["wall_time_s"] = rep.wall_time_s;
  std::ofstream os(dir / "report.json");
  os << j.dump(2) << "\n";

  const char* axis = "xyz";
  for (int q = 0; q < 3; ++q) {
    detail::write_raw_complex(dir / (std::string("j_") + axis[q] + ".bin"), rep.j.comp[q]);
    detail::write_raw_complex(dir / (std::string("e_") + axis[q] + ".bin"),
                              rep.fields.e.comp[q]);
  }
  detail::write_raw_real(dir / "p_abs.bin", rep.post.p_abs);
  if (rep.fields.has_h) {
    for (int q = 0; q < 3; ++q)
      detail::write_raw_complex(dir / (std::string("h_") + axis[q] + ".bin"),
                                rep.fields.h.comp[q]);
    detail::write_raw_real(dir / "b1_plus.bin", rep.post.b1_plus);
  }
}

}  // namespace vie
