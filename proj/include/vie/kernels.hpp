#pragma once

#include "vie/grid.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>

namespace vie {

/// Free-space Green's function g(R) = e^{-i k0 |R|} / (4 pi |R|).
inline cplx green_g(const Eigen::Vector3d& r, double k0) {
  const double R = r.norm();
  if (R <= 0.0) throw std::domain_error("green_g: singular point |R| = 0");
  return std::exp(cplx(0.0, -k0 * R)) / (4.0 * constants::pi * R);
}

namespace kernels {

inline constexpr double inv4pi = 1.0 / (4.0 * constants::pi);

// Entire helper functions of x = -i k R, evaluated by series for small |x| to
// dodge the cancellation in the closed forms:
//   phi0(x) = e^x - 1                  ~ x
//   psi1(x) = x e^x - e^x + 1          ~ x^2/2
//   psi2(x) = e^x (x^2 - 2x + 2) - 2   ~ x^3/3
inline cplx phi0(cplx x) {
  if (std::abs(x) > 1.0) return std::exp(x) - 1.0;
  cplx term = x, sum = x;
  for (int n = 2; n < 26; ++n) {
    term *= x / static_cast<double>(n);
    sum += term;
  }
  return sum;
}

inline cplx psi1(cplx x) {
  if (std::abs(x) > 1.0) return (x - 1.0) * std::exp(x) + 1.0;
  cplx xn = x, sum = 0.0;  // xn = x^n / n!
  for (int n = 2; n < 28; ++n) {
    xn *= x / static_cast<double>(n);
    sum += xn * static_cast<double>(n - 1);
  }
  return sum;
}

inline cplx psi2(cplx x) {
  if (std::abs(x) > 1.0) return std::exp(x) * (x * x - 2.0 * x + 2.0) - 2.0;
  cplx sum = 0.0;
  cplx xm = x * x / 2.0;  // x^m / m! at m = 2
  for (int m = 3; m < 30; ++m) {
    xm *= x / static_cast<double>(m);
    // m! * (1/(m-2)! - 2/(m-1)! + 2/m!) = m(m-1) - 2m + 2 = (m-1)(m-2)
    sum += xm * static_cast<double>((m - 1) * (m - 2));
  }
  return sum;
}

/// Radial derivatives of g at distance R:
///   g   = e^{-ikR} / (4 pi R)
///   g'  = -(1 + ikR) e^{-ikR} / (4 pi R^2)
///   g'' = (2 + 2ikR - k^2 R^2) e^{-ikR} / (4 pi R^3)
struct Radial {
  cplx g, gp, gpp;
};

inline Radial radial(double R, double k) {
  const cplx e = std::exp(cplx(0.0, -k * R));
  const cplx ikr(0.0, k * R);
  Radial r;
  r.g = e * inv4pi / R;
  r.gp = -(1.0 + ikr) * e * inv4pi / (R * R);
  r.gpp = (2.0 + 2.0 * ikr - k * k * R * R) * e * inv4pi / (R * R * R);
  return r;
}

/// Radial derivatives of the dynamic part g_d = g - 1/(4 pi R), stable for
/// small kR where the closed forms cancel:
///   g_d   = phi0(x) / (4 pi R)
///   g_d'  = psi1(x) / (4 pi R^2)
///   g_d'' = psi2(x) / (4 pi R^3)         with x = -ikR
inline Radial radial_dynamic(double R, double k) {
  const cplx x(0.0, -k * R);
  Radial r;
  r.g = phi0(x) * inv4pi / R;
  r.gp = psi1(x) * inv4pi / (R * R);
  r.gpp = psi2(x) * inv4pi / (R * R * R);
  return r;
}

/// Hessian of a radial function h at r, from h' and h'':
///   d_q d_q' h = (h'' - h'/R) rhat_q rhat_q' + (h'/R) delta_qq'
inline cplx hessian_entry(const Radial& h, const Eigen::Vector3d& rhat, double R, int q, int qp) {
  const cplx iso = h.gp / R;
  const cplx aniso = h.gpp - iso;
  return aniso * rhat[q] * rhat[qp] + (q == qp ? iso : cplx(0.0));
}

/// Full N-operator kernel off the source region:
///   (k^2 delta_qq' + d_q d_q') g(R)
inline cplx n_kernel(const Eigen::Vector3d& rvec, double k, int q, int qp) {
  const double R = rvec.norm();
  const Radial h = radial(R, k);
  const Eigen::Vector3d rhat = rvec / R;
  return hessian_entry(h, rhat, R, q, qp) + (q == qp ? k * k * h.g : cplx(0.0));
}

/// N kernel with the static Hessian removed (used for the self entry, where
/// the static part carries the hypersingularity and is integrated by parts):
///   k^2 delta g(R) + d_q d_q' (g - g_s)(R),  singular only like 1/R
inline cplx n_kernel_self_remainder(const Eigen::Vector3d& rvec, double k, int q, int qp) {
  const double R = rvec.norm();
  const Radial hd = radial_dynamic(R, k);
  const Eigen::Vector3d rhat = rvec / R;
  const cplx g_full = hd.g + inv4pi / R;
  return hessian_entry(hd, rhat, R, q, qp) + (q == qp ? k * k * g_full : cplx(0.0));
}

inline int levi_civita(int a, int b, int c) {
  if (a == b || b == c || a == c) return 0;
  return ((b - a + 3) % 3 == 1) ? 1 : -1;
}

/// K-operator kernel: (curl of g qhat')_q = levi(q, a, q') d_a g, with a the
/// remaining axis.
inline cplx k_kernel(const Eigen::Vector3d& rvec, double k, int q, int qp) {
  if (q == qp) return 0.0;
  const int a = 3 - q - qp;
  const double R = rvec.norm();
  const Radial h = radial(R, k);
  return static_cast<double>(levi_civita(q, a, qp)) * h.gp * rvec[a] / R;
}

}  // namespace kernels

/// Scalar voxel basis functions C_m^l (PWC: l = 1; PWL: l = 1..4). Value at
/// point r for a voxel centered at `center` with edge lengths `delta`; zero
/// outside the voxel.
inline double basis_eval(BasisOrder order, int l, const Eigen::Vector3d& center,
                         const std::array<double, 3>& delta, const Eigen::Vector3d& r) {
  if (order == BasisOrder::PWC && l != 1)
    throw std::invalid_argument("basis_eval: PWC has only l = 1");
  if (l < 1 || l > 4) throw std::invalid_argument("basis_eval: l out of range");
  for (int a = 0; a < 3; ++a)
    if (std::abs(r[a] - center[a]) > 0.5 * delta[a]) return 0.0;
  switch (l) {
    case 1: return 1.0;
    case 2: return (r[0] - center[0]) / delta[0];
    case 3: return (r[1] - center[1]) / delta[1];
    default: return (r[2] - center[2]) / delta[2];
  }
}

}  // namespace vie
