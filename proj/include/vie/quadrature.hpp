#pragma once

#include "vie/tensor.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace vie {

/// Gauss-Legendre rule on [0, 1].
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

namespace detail {

inline GaussRule compute_gauss_rule(int p) {
  if (p < 1) throw std::invalid_argument("gauss_rule: need at least one point");
  GaussRule r;
  r.nodes.resize(p);
  r.weights.resize(p);
  // Newton iteration on Legendre roots over [-1, 1], then map to [0, 1]
  const int m = (p + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (p + 0.5));
    double deriv = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (int k = 0; k < p; ++k) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * k + 1.0) * x * p2 - k * p3) / (k + 1.0);
      }
      deriv = p * (x * p1 - p2) / (x * x - 1.0);
      const double dx = p1 / deriv;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 1.0 / ((1.0 - x * x) * deriv * deriv);  // half of the [-1,1] weight
    r.nodes[i] = 0.5 * (1.0 - x);
    r.weights[i] = w;
    r.nodes[p - 1 - i] = 0.5 * (1.0 + x);
    r.weights[p - 1 - i] = w;
  }
  return r;
}

}  // namespace detail

inline const GaussRule& gauss_rule(int p) {
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(p);
  if (it == cache.end()) it = cache.emplace(p, detail::compute_gauss_rule(p)).first;
  return it->second;
}

/// Axis-aligned integration box.
struct Box3 {
  std::array<double, 3> lo{0, 0, 0};
  std::array<double, 3> hi{0, 0, 0};

  double volume() const {
    return (hi[0] - lo[0]) * (hi[1] - lo[1]) * (hi[2] - lo[2]);
  }
};

/// Plain tensor-product Gauss over a box. f takes a Vector3d.
template <typename F>
cplx integrate_box(F&& f, const Box3& box, int p) {
  const GaussRule& g = gauss_rule(p);
  const double lx = box.hi[0] - box.lo[0], ly = box.hi[1] - box.lo[1],
               lz = box.hi[2] - box.lo[2];
  cplx sum = 0.0;
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b)
      for (int c = 0; c < p; ++c) {
        Eigen::Vector3d u(box.lo[0] + lx * g.nodes[a], box.lo[1] + ly * g.nodes[b],
                          box.lo[2] + lz * g.nodes[c]);
        sum += g.weights[a] * g.weights[b] * g.weights[c] * f(u);
      }
  return sum * (lx * ly * lz);
}

/// Tensor Gauss over a box after the three-pyramid Duffy transform anchored
/// at the given corner (0 = lo end, 1 = hi end per axis). Removes point
/// singularities up to 1/rho^2 exactly and tames 1/rho^3 kernels whose
/// accompanying weight vanishes at the corner.
template <typename F>
cplx integrate_box_duffy(F&& f, const Box3& box, const std::array<int, 3>& corner, int p) {
  const GaussRule& g = gauss_rule(p);
  std::array<double, 3> base, span;
  for (int a = 0; a < 3; ++a) {
    base[a] = corner[a] ? box.hi[a] : box.lo[a];
    span[a] = (corner[a] ? box.lo[a] : box.hi[a]) - base[a];  // signed, points into box
  }
  const double jac = std::abs(span[0] * span[1] * span[2]);
  cplx sum = 0.0;
  for (int radial = 0; radial < 3; ++radial) {
    const int s1 = (radial + 1) % 3, s2 = (radial + 2) % 3;
    for (int a = 0; a < p; ++a) {
      const double t = g.nodes[a];
      for (int b = 0; b < p; ++b)
        for (int c = 0; c < p; ++c) {
          std::array<double, 3> v;
          v[radial] = t;
          v[s1] = t * g.nodes[b];
          v[s2] = t * g.nodes[c];
          Eigen::Vector3d u(base[0] + span[0] * v[0], base[1] + span[1] * v[1],
                            base[2] + span[2] * v[2]);
          sum += g.weights[a] * g.weights[b] * g.weights[c] * (t * t) * f(u);
        }
    }
  }
  return sum * jac;
}

/// 2D analogs for surface integrals.
struct Rect2 {
  std::array<double, 2> lo{0, 0};
  std::array<double, 2> hi{0, 0};
};

template <typename F>
cplx integrate_rect(F&& f, const Rect2& rect, int p) {
  const GaussRule& g = gauss_rule(p);
  const double lx = rect.hi[0] - rect.lo[0], ly = rect.hi[1] - rect.lo[1];
  cplx sum = 0.0;
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b)
      sum += g.weights[a] * g.weights[b] *
             f(rect.lo[0] + lx * g.nodes[a], rect.lo[1] + ly * g.nodes[b]);
  return sum * (lx * ly);
}

template <typename F>
cplx integrate_rect_duffy(F&& f, const Rect2& rect, const std::array<int, 2>& corner, int p) {
  const GaussRule& g = gauss_rule(p);
  std::array<double, 2> base, span;
  for (int a = 0; a < 2; ++a) {
    base[a] = corner[a] ? rect.hi[a] : rect.lo[a];
    span[a] = (corner[a] ? rect.lo[a] : rect.hi[a]) - base[a];
  }
  const double jac = std::abs(span[0] * span[1]);
  cplx sum = 0.0;
  for (int radial = 0; radial < 2; ++radial) {
    const int other = 1 - radial;
    for (int a = 0; a < p; ++a) {
      const double t = g.nodes[a];
      for (int b = 0; b < p; ++b) {
        std::array<double, 2> v;
        v[radial] = t;
        v[other] = t * g.nodes[b];
        sum += g.weights[a] * g.weights[b] * t *
               f(base[0] + span[0] * v[0], base[1] + span[1] * v[1]);
      }
    }
  }
  return sum * jac;
}

}  // namespace vie
