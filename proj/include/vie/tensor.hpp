#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <stdexcept>
#include <utility>

namespace vie {

using cplx = std::complex<double>;
using Index = Eigen::Index;

/// Factor matrices are plain column-major complex matrices; each column is a
/// mode vector.
using FactorMatrix = Eigen::MatrixXcd;

/// Dense complex 3D array with axis-1-fastest linear layout:
///   flat(i, j, k) = i + n1 * (j + n2 * k),   0 <= i < n1, etc.
///
/// All tensor data in this library (Toeplitz-defining tensors, spectra,
/// current components) lives in this container with this layout.
class Tensor3 {
public:
  Tensor3() : dims_{0, 0, 0} {}

  Tensor3(Index n1, Index n2, Index n3) : dims_{n1, n2, n3} {
    if (n1 < 0 || n2 < 0 || n3 < 0)
      throw std::invalid_argument("Tensor3: negative dimension");
    data_ = Eigen::VectorXcd::Zero(n1 * n2 * n3);
  }

  static Tensor3 zeros(Index n1, Index n2, Index n3) { return Tensor3(n1, n2, n3); }

  static Tensor3 constant(Index n1, Index n2, Index n3, cplx value) {
    Tensor3 t(n1, n2, n3);
    t.data_.setConstant(value);
    return t;
  }

  const std::array<Index, 3>& dims() const { return dims_; }
  Index dim(int axis) const { return dims_[static_cast<std::size_t>(axis)]; }
  Index size() const { return data_.size(); }
  bool empty() const { return data_.size() == 0; }

  cplx& operator()(Index i, Index j, Index k) {
    return data_[i + dims_[0] * (j + dims_[1] * k)];
  }
  cplx operator()(Index i, Index j, Index k) const {
    return data_[i + dims_[0] * (j + dims_[1] * k)];
  }

  Eigen::VectorXcd& flat() { return data_; }
  const Eigen::VectorXcd& flat() const { return data_; }
  cplx* data() { return data_.data(); }
  const cplx* data() const { return data_.data(); }

  bool same_dims(const Tensor3& other) const { return dims_ == other.dims_; }

  bool all_finite() const {
    for (Index n = 0; n < data_.size(); ++n) {
      if (!std::isfinite(data_[n].real()) || !std::isfinite(data_[n].imag())) return false;
    }
    return true;
  }

private:
  std::array<Index, 3> dims_;
  Eigen::VectorXcd data_;
};

/// || t ||_F = sqrt(sum |t_ijk|^2).
inline double frobenius_norm(const Tensor3& t) { return t.flat().norm(); }

/// Mode-q unfolding (q in {1,2,3}) of shape n_q x (product of the other two
/// dims). Column indices follow the axis-1-fastest layout:
///   mode 1: M(i, j + n2*k) = t(i,j,k)
///   mode 2: M(j, i + n1*k) = t(i,j,k)
///   mode 3: M(k, i + n1*j) = t(i,j,k)
inline Eigen::MatrixXcd unfold(const Tensor3& t, int mode) {
  const Index n1 = t.dim(0), n2 = t.dim(1), n3 = t.dim(2);
  switch (mode) {
    case 1:
      return Eigen::Map<const Eigen::MatrixXcd>(t.data(), n1, n2 * n3);
    case 2: {
      Eigen::MatrixXcd m(n2, n1 * n3);
      for (Index k = 0; k < n3; ++k)
        for (Index j = 0; j < n2; ++j)
          for (Index i = 0; i < n1; ++i) m(j, i + n1 * k) = t(i, j, k);
      return m;
    }
    case 3:
      return Eigen::Map<const Eigen::MatrixXcd>(t.data(), n1 * n2, n3).transpose();
    default:
      throw std::invalid_argument("unfold: mode must be 1, 2 or 3");
  }
}

/// Inverse of unfold: rebuilds a tensor of dimensions `dims` from its mode-q
/// unfolding.
inline Tensor3 fold(const Eigen::MatrixXcd& m, int mode, const std::array<Index, 3>& dims) {
  const Index n1 = dims[0], n2 = dims[1], n3 = dims[2];
  Tensor3 t(n1, n2, n3);
  switch (mode) {
    case 1:
      if (m.rows() != n1 || m.cols() != n2 * n3) throw std::invalid_argument("fold: shape mismatch");
      Eigen::Map<Eigen::MatrixXcd>(t.data(), n1, n2 * n3) = m;
      break;
    case 2:
      if (m.rows() != n2 || m.cols() != n1 * n3) throw std::invalid_argument("fold: shape mismatch");
      for (Index k = 0; k < n3; ++k)
        for (Index j = 0; j < n2; ++j)
          for (Index i = 0; i < n1; ++i) t(i, j, k) = m(j, i + n1 * k);
      break;
    case 3:
      if (m.rows() != n3 || m.cols() != n1 * n2) throw std::invalid_argument("fold: shape mismatch");
      Eigen::Map<Eigen::MatrixXcd>(t.data(), n1 * n2, n3) = m.transpose();
      break;
    default:
      throw std::invalid_argument("fold: mode must be 1, 2 or 3");
  }
  return t;
}

/// n-mode product t x_q u. The matrix u has shape (new_size x n_q) and
/// contracts against axis q; the result replaces n_q by u.rows().
inline Tensor3 n_mode_product(const Tensor3& t, const FactorMatrix& u, int mode) {
  if (mode < 1 || mode > 3) throw std::invalid_argument("n_mode_product: bad mode");
  if (u.cols() != t.dim(mode - 1))
    throw std::invalid_argument("n_mode_product: matrix columns do not match tensor mode size");
  std::array<Index, 3> out_dims = t.dims();
  out_dims[static_cast<std::size_t>(mode - 1)] = u.rows();
  return fold(u * unfold(t, mode), mode, out_dims);
}

/// Tucker reconstruction core x_1 u1 x_2 u2 x_3 u3.
inline Tensor3 tucker_reconstruct(const Tensor3& core, const FactorMatrix& u1,
                                  const FactorMatrix& u2, const FactorMatrix& u3) {
  if (core.size() == 0) return Tensor3(u1.rows(), u2.rows(), u3.rows());
  return n_mode_product(n_mode_product(n_mode_product(core, u1, 1), u2, 2), u3, 3);
}

/// Column-wise Khatri-Rao product: column l of the result is kron(a.col(l),
/// b.col(l)) with b's index running fastest.
inline Eigen::MatrixXcd khatri_rao(const FactorMatrix& a, const FactorMatrix& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("khatri_rao: column count mismatch");
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols());
  for (Index l = 0; l < a.cols(); ++l)
    for (Index ia = 0; ia < a.rows(); ++ia)
      out.block(ia * b.rows(), l, b.rows(), 1) = a(ia, l) * b.col(l);
  return out;
}

/// Sum of r rank-one tensors built from the matching columns of the three
/// factors: t(i,j,k) = sum_l v1(i,l) v2(j,l) v3(k,l).
inline Tensor3 cp_reconstruct(const FactorMatrix& v1, const FactorMatrix& v2,
                              const FactorMatrix& v3) {
  if (v1.cols() != v2.cols() || v1.cols() != v3.cols())
    throw std::invalid_argument("cp_reconstruct: factor rank mismatch");
  const Index n1 = v1.rows(), n2 = v2.rows(), n3 = v3.rows();
  Tensor3 t(n1, n2, n3);
  if (v1.cols() == 0) return t;
  // mode-1 unfolding of the result is v1 * khatri_rao(v3, v2)^T
  Eigen::Map<Eigen::MatrixXcd>(t.data(), n1, n2 * n3) =
      v1 * khatri_rao(v3, v2).transpose();
  return t;
}

/// Entrywise product.
inline Tensor3 hadamard(const Tensor3& a, const Tensor3& b) {
  if (!a.same_dims(b)) throw std::invalid_argument("hadamard: dimension mismatch");
  Tensor3 out = a;
  out.flat().array() *= b.flat().array();
  return out;
}

}  // namespace vie
