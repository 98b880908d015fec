#pragma once

#include "vie/grid.hpp"

#include <array>
#include <stdexcept>
#include <vector>

namespace vie {

/// Homogeneous sphere centered in a cube domain; voxels belong to the sphere
/// when their center lies inside (staircase approximation).
inline DielectricMap sphere_scene(double domain_m, Index n, double frequency, double radius_m,
                                  double eps_prime, double sigma) {
  if (n < 1 || domain_m <= 0 || radius_m <= 0)
    throw std::invalid_argument("sphere_scene: bad geometry");
  const double res = domain_m / static_cast<double>(n);
  VoxelGrid grid({n, n, n}, {res, res, res},
                 {-0.5 * domain_m, -0.5 * domain_m, -0.5 * domain_m});
  DielectricMap map(grid, frequency);
  for (Index k = 0; k < n; ++k)
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) {
        if (grid.voxel_center(i, j, k).norm() <= radius_m) map.set_voxel(i, j, k, eps_prime, sigma);
      }
  return map;
}

struct PhantomLayer {
  std::array<double, 3> semi_axes{0.0, 0.0, 0.0};  // meters
  double eps_prime = 1.0;
  double sigma = 0.0;  // S/m
};

/// Nested-ellipsoid tissue phantom centered in a cube domain. Layers are
/// ordered outermost first; each voxel takes the properties of the innermost
/// layer containing its center.
inline DielectricMap layered_phantom_scene(double domain_m, Index n, double frequency,
                                           const std::vector<PhantomLayer>& layers) {
  if (layers.empty()) throw std::invalid_argument("layered_phantom_scene: no layers");
  const double res = domain_m / static_cast<double>(n);
  VoxelGrid grid({n, n, n}, {res, res, res},
                 {-0.5 * domain_m, -0.5 * domain_m, -0.5 * domain_m});
  DielectricMap map(grid, frequency);
  for (Index k = 0; k < n; ++k)
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) {
        const Eigen::Vector3d c = grid.voxel_center(i, j, k);
        for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
          const auto& ax = it->semi_axes;
          const double u = c[0] / ax[0], v = c[1] / ax[1], w = c[2] / ax[2];
          if (u * u + v * v + w * w <= 1.0) {
            map.set_voxel(i, j, k, it->eps_prime, it->sigma);
            break;
          }
        }
      }
  return map;
}

/// Default three-layer phantom used by the experiment driver.
inline std::vector<PhantomLayer> default_phantom_layers() {
  return {
      {{0.096, 0.108, 0.090}, 44.0, 0.70},
      {{0.079, 0.089, 0.074}, 58.0, 0.54},
      {{0.053, 0.059, 0.050}, 68.5, 0.41},
  };
}

}  // namespace vie
