#pragma once

#include "vie/tensor.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace vie {

namespace constants {
inline constexpr double epsilon0 = 8.8541878128e-12;  // F/m
inline constexpr double mu0 = 1.25663706212e-6;       // H/m
inline constexpr double c0 = 299792458.0;             // m/s
inline constexpr double pi = 3.141592653589793238462643383279502884;
inline const double eta0 = std::sqrt(mu0 / epsilon0);  // free-space impedance
}  // namespace constants

/// Uniform voxel grid. `origin` is the minimum corner of the domain; voxel
/// (i,j,k) has center origin + ((i,j,k) + 1/2) * resolution.
struct VoxelGrid {
  std::array<Index, 3> dims{1, 1, 1};
  std::array<double, 3> resolution{1.0, 1.0, 1.0};  // meters
  std::array<double, 3> origin{0.0, 0.0, 0.0};      // meters

  VoxelGrid() = default;
  VoxelGrid(std::array<Index, 3> d, std::array<double, 3> res,
            std::array<double, 3> org = {0.0, 0.0, 0.0})
      : dims(d), resolution(res), origin(org) {
    for (int a = 0; a < 3; ++a) {
      if (dims[a] < 1) throw std::invalid_argument("VoxelGrid: dims must be >= 1");
      if (!(resolution[a] > 0.0)) throw std::invalid_argument("VoxelGrid: resolution must be > 0");
    }
  }

  Index num_voxels() const { return dims[0] * dims[1] * dims[2]; }
  double voxel_volume() const { return resolution[0] * resolution[1] * resolution[2]; }

  Eigen::Vector3d voxel_center(Index i, Index j, Index k) const {
    return {origin[0] + (static_cast<double>(i) + 0.5) * resolution[0],
            origin[1] + (static_cast<double>(j) + 0.5) * resolution[1],
            origin[2] + (static_cast<double>(k) + 0.5) * resolution[2]};
  }
};

/// Per-voxel complex relative permittivity eps_r = eps' - i sigma_e/(eps0 w)
/// at a fixed frequency. The -i sign pairs with the e^{-i k0 R} kernel so a
/// positive conductivity is lossy/passive.
struct DielectricMap {
  VoxelGrid grid;
  Tensor3 eps_r;       // complex relative permittivity per voxel
  double frequency = 0.0;  // Hz

  DielectricMap() = default;
  DielectricMap(const VoxelGrid& g, double f) : grid(g), frequency(f) {
    eps_r = Tensor3::constant(g.dims[0], g.dims[1], g.dims[2], 1.0);
  }

  double omega() const { return 2.0 * constants::pi * frequency; }
  double k0() const { return omega() / constants::c0; }
  cplx c_e() const { return cplx(0.0, omega() * constants::epsilon0); }
  cplx c_m() const { return cplx(0.0, omega() * constants::mu0); }

  cplx chi_e(Index i, Index j, Index k) const { return eps_r(i, j, k) - 1.0; }
  double sigma_e(Index i, Index j, Index k) const {
    return -eps_r(i, j, k).imag() * constants::epsilon0 * omega();
  }

  void set_voxel(Index i, Index j, Index k, double eps_prime, double sigma) {
    eps_r(i, j, k) = cplx(eps_prime, -sigma / (constants::epsilon0 * omega()));
  }
};

/// Linearly polarized plane wave e(r) = pol * amplitude * e^{-i k0 dir.r}.
struct PlaneWave {
  Eigen::Vector3d polarization{1.0, 0.0, 0.0};
  Eigen::Vector3d direction{0.0, 0.0, 1.0};
  double amplitude = 1.0;  // V/m

  PlaneWave() = default;
  PlaneWave(const Eigen::Vector3d& pol, const Eigen::Vector3d& dir, double amp)
      : polarization(pol.normalized()), direction(dir.normalized()), amplitude(amp) {
    if (std::abs(polarization.dot(direction)) > 1e-12)
      throw std::invalid_argument("PlaneWave: polarization must be orthogonal to direction");
  }

  Eigen::Vector3cd e_field(const Eigen::Vector3d& r, double k0) const {
    const cplx phase = std::exp(cplx(0.0, -k0 * direction.dot(r)));
    return polarization.cast<cplx>() * (amplitude * phase);
  }

  /// h = (1/eta0) dir x e for a plane wave in vacuum.
  Eigen::Vector3cd h_field(const Eigen::Vector3d& r, double k0) const {
    const Eigen::Vector3d h_dir = direction.cross(polarization);
    const cplx phase = std::exp(cplx(0.0, -k0 * direction.dot(r)));
    return h_dir.cast<cplx>() * (amplitude / constants::eta0 * phase);
  }
};

enum class BasisOrder { PWC, PWL };

/// Per-direction coefficient tensors of a voxel field (currents, e, h).
/// PWC carries 3 components; the 12-component PWL layout is reserved.
struct CurrentField {
  BasisOrder order = BasisOrder::PWC;
  std::vector<Tensor3> comp;

  CurrentField() = default;
  explicit CurrentField(const std::array<Index, 3>& dims, BasisOrder ord = BasisOrder::PWC)
      : order(ord) {
    if (ord != BasisOrder::PWC)
      throw std::invalid_argument("CurrentField: only the PWC layout is implemented");
    comp.assign(3, Tensor3(dims[0], dims[1], dims[2]));
  }

  std::array<Index, 3> dims() const { return comp.at(0).dims(); }
  Index flat_size() const { return 3 * comp.at(0).size(); }

  Eigen::VectorXcd to_vector() const {
    Eigen::VectorXcd v(flat_size());
    const Index n = comp[0].size();
    for (int q = 0; q < 3; ++q) v.segment(q * n, n) = comp[q].flat();
    return v;
  }

  static CurrentField from_vector(const Eigen::VectorXcd& v, const std::array<Index, 3>& dims) {
    CurrentField f(dims);
    const Index n = f.comp[0].size();
    if (v.size() != 3 * n) throw std::invalid_argument("CurrentField: vector size mismatch");
    for (int q = 0; q < 3; ++q) f.comp[q].flat() = v.segment(q * n, n);
    return f;
  }
};

}  // namespace vie
