#pragma once

#include "vie/grid.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace vie {

/// Which volume integral operator a tensor belongs to. N is the curl-curl
/// operator, K the single-curl operator, ScalarG the plain scalar kernel.
enum class OperatorKind { N, K, ScalarG };

inline const char* to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::N: return "N";
    case OperatorKind::K: return "K";
    default: return "G";
  }
}

/// One stored (row direction, column direction) component of an operator.
/// Axes are 0=x, 1=y, 2=z.
struct KernelComponent {
  OperatorKind op = OperatorKind::N;
  int row_axis = 0;
  int col_axis = 0;

  std::string name() const {
    static const char* axis = "xyz";
    if (op == OperatorKind::ScalarG) return "G";
    return std::string(to_string(op)) + axis[row_axis] + axis[col_axis];
  }
};

/// Per-axis reflection signs of a Toeplitz-defining tensor: entry at offset
/// -o equals sign[a] times the entry at +o along axis a.
struct Parity {
  std::array<int, 3> sign{1, 1, 1};

  int product() const { return sign[0] * sign[1] * sign[2]; }
};

/// Reflection parity of a component, fixed by the offset = source - test
/// convention of the assembly:
///   N diagonal and ScalarG: even everywhere.
///   N off-diagonal (q,q'): odd along q and q'.
///   K (q,q'): odd along the remaining axis.
inline Parity component_parity(const KernelComponent& c) {
  Parity p;
  if (c.op == OperatorKind::ScalarG) return p;
  if (c.op == OperatorKind::N) {
    if (c.row_axis != c.col_axis) {
      p.sign[c.row_axis] = -1;
      p.sign[c.col_axis] = -1;
    }
    return p;
  }
  // K: odd along the axis not involved in the cross product
  const int third = 3 - c.row_axis - c.col_axis;
  p.sign[third] = -1;
  return p;
}

/// Minimal component set to store: 6 for N (symmetric), 3 for K
/// (antisymmetric off-diagonals), 1 for the scalar kernel. Components are
/// returned in a fixed sorted order so multiply-accumulate sequences are
/// reproducible run to run.
inline std::vector<KernelComponent> unique_components(OperatorKind op,
                                                      BasisOrder order = BasisOrder::PWC) {
  if (order != BasisOrder::PWC)
    throw std::invalid_argument(
        "unique_components: PWL Galerkin storage (60 N / 30 K unique entries per voxel) "
        "is not implemented; only PWC (6 N / 3 K) is supported");
  std::vector<KernelComponent> out;
  switch (op) {
    case OperatorKind::ScalarG:
      out.push_back({op, 0, 0});
      break;
    case OperatorKind::N:
      for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b) out.push_back({op, a, b});
      break;
    case OperatorKind::K:
      for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b) out.push_back({op, a, b});
      break;
  }
  return out;
}

}  // namespace vie
