#pragma once

#include "vie/components.hpp"
#include "vie/kernels.hpp"
#include "vie/parallel.hpp"
#include "vie/quadrature.hpp"
#include "vie/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace vie {

/// Budgets for the singularity-subtraction treatment of the self entry.
struct SelfStrategy {
  int surface_points_per_axis = 12;  // static nabla-nabla dyad (face pairs)
  int volume_points_per_axis = 6;    // dynamic remainder (Duffy boxes)
};

struct QuadratureSpec {
  int far_points_per_axis = 5;
  int near_points_per_axis = 10;
  int near_radius = 1;  // Chebyshev voxel distance using the elevated rule
  SelfStrategy self_strategy;

  void validate() const {
    if (far_points_per_axis < 1 || near_points_per_axis < 1 ||
        self_strategy.surface_points_per_axis < 1 || self_strategy.volume_points_per_axis < 1)
      throw std::invalid_argument("QuadratureSpec: quadrature budget of zero");
    if (near_radius < 1) throw std::invalid_argument("QuadratureSpec: near_radius must be >= 1");
  }
};

namespace detail {

/// Galerkin voxel-pair integrals reduce exactly to a 3D correlation:
///   entry(D) = \int_{[-dx,dx]x[-dy,dy]x[-dz,dz]} kernel(u - D) w(u) du,
///   w(u) = prod_a (d_a - |u_a|),
/// where D is the source-minus-test center displacement. Axes are split at
/// the tent kinks (u_a = 0) and at the singular coordinate; sub-boxes with
/// the singular point at a corner get the Duffy treatment.
template <typename K>
cplx correlation_entry(K&& kernel, const Eigen::Vector3d& d,
                       const std::array<double, 3>& delta, int points, bool duffy_at_d) {
  std::array<std::vector<double>, 3> cuts;
  for (int a = 0; a < 3; ++a) {
    cuts[a] = {-delta[a], 0.0, delta[a]};
    if (duffy_at_d && d[a] > -delta[a] && d[a] < delta[a] && d[a] != 0.0) {
      cuts[a].push_back(d[a]);
      std::sort(cuts[a].begin(), cuts[a].end());
    }
  }
  auto weighted = [&](const Eigen::Vector3d& u) {
    const double w = (delta[0] - std::abs(u[0])) * (delta[1] - std::abs(u[1])) *
                     (delta[2] - std::abs(u[2]));
    return kernel(u - d) * w;
  };
  cplx sum = 0.0;
  for (std::size_t ia = 0; ia + 1 < cuts[0].size(); ++ia)
    for (std::size_t ib = 0; ib + 1 < cuts[1].size(); ++ib)
      for (std::size_t ic = 0; ic + 1 < cuts[2].size(); ++ic) {
        Box3 box;
        box.lo = {cuts[0][ia], cuts[1][ib], cuts[2][ic]};
        box.hi = {cuts[0][ia + 1], cuts[1][ib + 1], cuts[2][ic + 1]};
        bool corner = duffy_at_d;
        std::array<int, 3> which{0, 0, 0};
        for (int a = 0; a < 3; ++a) {
          const double lo = box.lo[a], hi = box.hi[a];
          if (d[a] == lo) which[a] = 0;
          else if (d[a] == hi) which[a] = 1;
          else corner = false;
        }
        sum += corner ? integrate_box_duffy(weighted, box, which, points)
                      : integrate_box(weighted, box, points);
      }
  return sum;
}

/// Coincident / parallel face-pair integral of g_static over the two q-faces
/// of a voxel: reduces to a 2D tent-weighted correlation over the tangent
/// displacements with fixed normal separation h.
inline double face_pair_static(double dt1, double dt2, double h, int points) {
  auto f = [&](double u, double v) {
    const double w = (dt1 - std::abs(u)) * (dt2 - std::abs(v));
    return cplx(w * kernels::inv4pi / std::sqrt(h * h + u * u + v * v));
  };
  cplx sum = 0.0;
  for (int su = 0; su < 2; ++su)
    for (int sv = 0; sv < 2; ++sv) {
      Rect2 rect;
      rect.lo = {su ? 0.0 : -dt1, sv ? 0.0 : -dt2};
      rect.hi = {su ? dt1 : 0.0, sv ? dt2 : 0.0};
      if (h == 0.0) {
        // singular at the origin corner of every sub-rectangle
        sum += integrate_rect_duffy(f, rect, {su ? 0 : 1, sv ? 0 : 1}, points);
      } else {
        sum += integrate_rect(f, rect, points);
      }
    }
  return sum.real();
}

}  // namespace detail

/// Static Galerkin self-interaction of the nabla-nabla part plus the
/// identity (Gram) contribution. Off-diagonal entries vanish by the mirror
/// symmetries of an axis-aligned voxel; diagonals come from integrating both
/// derivatives by parts onto the voxel faces, leaving regular face-pair
/// integrals of g_static handled by 2D Duffy quadrature.
struct SelfStaticTerm {
  Eigen::Matrix3cd nabla_dyad = Eigen::Matrix3cd::Zero();
  double gram = 0.0;  // <P, P> = voxel volume
  double error_indicator = 0.0;
  bool converged = false;

  Eigen::Matrix3cd total() const {
    return gram * Eigen::Matrix3cd::Identity() + nabla_dyad;
  }
  /// L with nabla_dyad = -V L; (1/3) I for a cube.
  Eigen::Matrix3d depolarization() const { return (-nabla_dyad / gram).real(); }
};

inline SelfStaticTerm self_static_term(const std::array<double, 3>& delta,
                                       const QuadratureSpec& quad = {}) {
  quad.validate();
  SelfStaticTerm out;
  out.gram = delta[0] * delta[1] * delta[2];

  auto diagonal = [&](int q, int points) {
    const int t1 = (q + 1) % 3, t2 = (q + 2) % 3;
    const double same = detail::face_pair_static(delta[t1], delta[t2], 0.0, points);
    const double opp = detail::face_pair_static(delta[t1], delta[t2], delta[q], points);
    return 2.0 * (opp - same);
  };

  double max_change = 0.0;
  for (int q = 0; q < 3; ++q) {
    const double v = diagonal(q, quad.self_strategy.surface_points_per_axis);
    const double v_refined = diagonal(q, quad.self_strategy.surface_points_per_axis + 4);
    out.nabla_dyad(q, q) = v_refined;
    max_change = std::max(max_change, std::abs(v_refined - v) / out.gram);
  }
  out.error_indicator = max_change;
  out.converged = max_change < 1e-7;
  return out;
}

/// Galerkin Toeplitz-defining tensor of one kernel component on a uniform
/// grid with the PWC basis. Entry (i,j,k) couples the test voxel at the grid
/// origin corner with the source voxel at offset (i,j,k); the center
/// displacement convention is offset = source - test.
///
/// Internally everything is computed in units of the x voxel edge (entries
/// scale as edge^3 for N, edge^4 for K, edge^5 for the scalar kernel); the
/// returned tensor is in SI units.
inline Tensor3 assemble_defining_tensor(const VoxelGrid& grid, double k0,
                                        const KernelComponent& comp,
                                        const QuadratureSpec& quad = {},
                                        BasisOrder order = BasisOrder::PWC) {
  quad.validate();
  if (order != BasisOrder::PWC)
    throw std::invalid_argument(
        "assemble_defining_tensor: PWL Galerkin assembly (60 N / 30 K unique entries) is "
        "not supported; use PWC");

  const double scale = grid.resolution[0];
  const std::array<double, 3> delta{1.0, grid.resolution[1] / scale,
                                    grid.resolution[2] / scale};
  const double k = k0 * scale;
  const int q = comp.row_axis, qp = comp.col_axis;
  const Parity parity = component_parity(comp);

  std::function<cplx(const Eigen::Vector3d&)> kernel;
  double si_power = 3.0;
  switch (comp.op) {
    case OperatorKind::N:
      kernel = [=](const Eigen::Vector3d& r) { return kernels::n_kernel(r, k, q, qp); };
      si_power = 3.0;
      break;
    case OperatorKind::K:
      kernel = [=](const Eigen::Vector3d& r) { return kernels::k_kernel(r, k, q, qp); };
      si_power = 4.0;
      break;
    case OperatorKind::ScalarG:
      kernel = [=](const Eigen::Vector3d& r) { return kernels::radial(r.norm(), k).g; };
      si_power = 5.0;
      break;
  }
  const double si_scale = std::pow(scale, si_power);

  // self entry, needed once
  cplx self_entry = 0.0;
  if (comp.op == OperatorKind::N) {
    SelfStaticTerm st = self_static_term(delta, quad);
    auto remainder = [=](const Eigen::Vector3d& r) {
      return kernels::n_kernel_self_remainder(r, k, q, qp);
    };
    self_entry = detail::correlation_entry(remainder, Eigen::Vector3d::Zero(), delta,
                                           quad.self_strategy.volume_points_per_axis, true);
    self_entry += st.total()(q, qp);
  } else if (comp.op == OperatorKind::ScalarG) {
    self_entry = detail::correlation_entry(kernel, Eigen::Vector3d::Zero(), delta,
                                           quad.self_strategy.volume_points_per_axis, true);
  }
  // K self entries vanish by parity

  const auto& dims = grid.dims;
  Tensor3 t(dims[0], dims[1], dims[2]);
  parallel_for(dims[2], [&](std::int64_t kk) {
    for (Index jj = 0; jj < dims[1]; ++jj)
      for (Index ii = 0; ii < dims[0]; ++ii) {
        // components odd along an axis vanish at zero offset on that axis
        if ((parity.sign[0] < 0 && ii == 0) || (parity.sign[1] < 0 && jj == 0) ||
            (parity.sign[2] < 0 && kk == 0)) {
          t(ii, jj, kk) = 0.0;
          continue;
        }
        const Index cheb = std::max({ii, jj, static_cast<Index>(kk)});
        if (cheb == 0) {
          t(ii, jj, kk) = self_entry * si_scale;
          continue;
        }
        const Eigen::Vector3d d(static_cast<double>(ii) * delta[0],
                                static_cast<double>(jj) * delta[1],
                                static_cast<double>(kk) * delta[2]);
        const bool near = cheb <= quad.near_radius;
        const cplx v = detail::correlation_entry(
            kernel, d, delta, near ? quad.near_points_per_axis : quad.far_points_per_axis,
            near);
        t(ii, jj, kk) = v * si_scale;
      }
  });
  return t;
}

/// All unique defining tensors of one operator family.
inline std::vector<std::pair<KernelComponent, Tensor3>> assemble_operator(
    const VoxelGrid& grid, double k0, OperatorKind kind, const QuadratureSpec& quad = {}) {
  std::vector<std::pair<KernelComponent, Tensor3>> out;
  for (const KernelComponent& c : unique_components(kind))
    out.emplace_back(c, assemble_defining_tensor(grid, k0, c, quad));
  return out;
}

}  // namespace vie
