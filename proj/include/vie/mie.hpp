#pragma once

#include "vie/grid.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace vie {

/// Homogeneous dielectric sphere in a linearly polarized plane wave.
/// eps_r follows the library's passive convention eps' - i sigma/(eps0 w);
/// the Mie recurrences run in the opposite time convention internally, which
/// leaves every power quantity unchanged.
struct MieSphere {
  double radius = 0.0;       // m
  cplx eps_r{1.0, 0.0};
  double k0 = 0.0;           // background wavenumber, 1/m
  double amplitude = 1.0;    // incident E0, V/m
  int l_max = 0;             // 0: Wiscombe criterion ceil(x + 4 x^(1/3) + 2)

  void validate() const {
    if (radius <= 0.0) throw std::invalid_argument("MieSphere: radius must be > 0");
    if (k0 <= 0.0) throw std::invalid_argument("MieSphere: k0 must be > 0");
  }
  double size_parameter() const { return k0 * radius; }
  /// Relative refractive index in the internal e^{-iwt} convention
  /// (nonnegative imaginary part for passive media).
  cplx refractive_index() const { return std::sqrt(std::conj(eps_r)); }
  int default_l_max() const {
    const double x = size_parameter();
    return static_cast<int>(std::ceil(x + 4.0 * std::cbrt(x) + 2.0));
  }
};

namespace mie_detail {

struct RiccatiReal {
  std::vector<double> psi;  // psi_n(x) = x j_n(x), n = 0..L
  std::vector<double> chi;  // chi_n(x) = -x y_n(x)
};

/// Upward recurrences for the real-argument Riccati-Bessel functions, with an
/// overflow guard: chi grows like (2n-1)!!/x^n once n >> x.
inline RiccatiReal riccati_real(double x, int l) {
  RiccatiReal r;
  r.psi.resize(l + 1);
  r.chi.resize(l + 1);
  r.psi[0] = std::sin(x);
  r.chi[0] = std::cos(x);
  if (l >= 1) {
    r.psi[1] = std::sin(x) / x - std::cos(x);
    r.chi[1] = std::cos(x) / x + std::sin(x);
  }
  for (int n = 2; n <= l; ++n) {
    const double f = (2.0 * n - 1.0) / x;
    r.psi[n] = f * r.psi[n - 1] - r.psi[n - 2];
    r.chi[n] = f * r.chi[n - 1] - r.chi[n - 2];
    if (std::abs(r.chi[n]) > 1e280)
      throw std::overflow_error("mie: Riccati-Bessel recurrence overflow; reduce l_max");
  }
  return r;
}

/// Logarithmic derivatives D_n(z) = psi_n'(z)/psi_n(z) by downward recurrence.
inline std::vector<cplx> log_derivative(cplx z, int l) {
  const int start = l + 15 + static_cast<int>(std::ceil(std::abs(z)));
  std::vector<cplx> d(start + 1, cplx(0.0, 0.0));
  for (int n = start; n >= 1; --n) {
    const cplx nz = static_cast<double>(n) / z;
    d[n - 1] = nz - 1.0 / (d[n] + nz);
  }
  d.resize(l + 1);
  return d;
}

/// psi_n(z) for complex z via Miller's downward recurrence, normalized by
/// psi_0 = sin z.
inline std::vector<cplx> riccati_psi_complex(cplx z, int l) {
  const int start = l + 15 + static_cast<int>(std::ceil(std::abs(z)));
  std::vector<cplx> up(start + 2);
  up[start + 1] = 0.0;
  up[start] = 1e-280;
  for (int n = start; n >= 1; --n) {
    up[n - 1] = (2.0 * n + 1.0) / z * up[n] - up[n + 1];
    if (std::abs(up[n - 1]) > 1e280) {
      // rescale the tail to avoid overflow
      for (int m = n - 1; m <= start + 1; ++m) up[m] *= 1e-280;
    }
  }
  const cplx scale = std::sin(z) / up[0];
  std::vector<cplx> psi(l + 1);
  for (int n = 0; n <= l; ++n) psi[n] = up[n] * scale;
  return psi;
}

}  // namespace mie_detail

/// Mie coefficients (a_n, b_n), n = 1..l, via the logarithmic-derivative
/// downward recurrence (Bohren-Huffman form).
inline std::vector<std::pair<cplx, cplx>> mie_coefficients(double x, cplx m, int l) {
  if (l < 1) throw std::invalid_argument("mie_coefficients: order must be >= 1");
  const auto rb = mie_detail::riccati_real(x, l);
  const auto d = mie_detail::log_derivative(m * x, l);
  std::vector<std::pair<cplx, cplx>> out(l);
  for (int n = 1; n <= l; ++n) {
    const cplx xi_n(rb.psi[n], -rb.chi[n]);
    const cplx xi_nm1(rb.psi[n - 1], -rb.chi[n - 1]);
    const double nx = n / x;
    const cplx fa = d[n] / m + nx;
    const cplx fb = d[n] * m + nx;
    out[n - 1].first = (fa * rb.psi[n] - rb.psi[n - 1]) / (fa * xi_n - xi_nm1);
    out[n - 1].second = (fb * rb.psi[n] - rb.psi[n - 1]) / (fb * xi_n - xi_nm1);
  }
  return out;
}

/// Independent evaluation path: the same coefficients from direct complex
/// Riccati-Bessel values instead of logarithmic derivatives.
inline std::vector<std::pair<cplx, cplx>> mie_coefficients_direct(double x, cplx m, int l) {
  if (l < 1) throw std::invalid_argument("mie_coefficients_direct: order must be >= 1");
  const auto rb = mie_detail::riccati_real(x, l);
  const auto psi_mx = mie_detail::riccati_psi_complex(m * x, l);
  const cplx mx = m * x;
  std::vector<std::pair<cplx, cplx>> out(l);
  for (int n = 1; n <= l; ++n) {
    const cplx xi_n(rb.psi[n], -rb.chi[n]);
    const cplx xi_nm1(rb.psi[n - 1], -rb.chi[n - 1]);
    const double dn = static_cast<double>(n);
    const cplx psi_d_x = rb.psi[n - 1] - dn / x * rb.psi[n];
    const cplx xi_d = xi_nm1 - dn / x * xi_n;
    const cplx psi_d_mx = psi_mx[n - 1] - dn / mx * psi_mx[n];
    out[n - 1].first = (m * psi_mx[n] * psi_d_x - rb.psi[n] * psi_d_mx) /
                       (m * psi_mx[n] * xi_d - xi_n * psi_d_mx);
    out[n - 1].second = (psi_mx[n] * psi_d_x - m * rb.psi[n] * psi_d_mx) /
                        (psi_mx[n] * xi_d - m * xi_n * psi_d_mx);
  }
  return out;
}

struct MieResult {
  double q_ext = 0.0, q_sca = 0.0, q_abs = 0.0;   // efficiencies
  double c_ext = 0.0, c_sca = 0.0, c_abs = 0.0;   // cross sections, m^2
  double p_ext = 0.0, p_sca = 0.0, p_abs = 0.0;   // W at the given amplitude
  int l_max_used = 0;
};

inline MieResult mie_solve(const MieSphere& s) {
  s.validate();
  const double x = s.size_parameter();
  const cplx m = s.refractive_index();
  const int l = s.l_max > 0 ? s.l_max : s.default_l_max();

  auto sums = [&](int order) {
    const auto ab = mie_coefficients(x, m, order);
    double ext = 0.0, sca = 0.0;
    for (int n = 1; n <= order; ++n) {
      const auto& [a, b] = ab[n - 1];
      ext += (2.0 * n + 1.0) * (a.real() + b.real());
      sca += (2.0 * n + 1.0) * (std::norm(a) + std::norm(b));
    }
    return std::pair{ext, sca};
  };

  auto [ext, sca] = sums(l);
  int used = l;
  // converge with respect to the truncation order
  for (int iter = 0; iter < 6; ++iter) {
    auto [ext2, sca2] = sums(2 * used);
    const double change = std::abs(ext2 - ext) / std::max(1e-300, std::abs(ext2));
    ext = ext2;
    sca = sca2;
    used *= 2;
    if (change < 1e-12) break;
  }

  MieResult r;
  r.l_max_used = used;
  const double geom = constants::pi * s.radius * s.radius;
  r.q_ext = 2.0 / (x * x) * ext;
  r.q_sca = 2.0 / (x * x) * sca;
  r.q_abs = r.q_ext - r.q_sca;
  r.c_ext = r.q_ext * geom;
  r.c_sca = r.q_sca * geom;
  r.c_abs = r.q_abs * geom;
  const double intensity = 0.5 * s.amplitude * s.amplitude / constants::eta0;
  r.p_ext = r.c_ext * intensity;
  r.p_sca = r.c_sca * intensity;
  r.p_abs = r.c_abs * intensity;
  return r;
}

/// Absorbed power (W) of the sphere, P_ext - P_sca.
inline double mie_absorbed_power(const MieSphere& s) { return mie_solve(s).p_abs; }

}  // namespace vie
