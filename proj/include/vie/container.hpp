#pragma once

#include "vie/decomp.hpp"
#include "vie/tensor.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <variant>

namespace vie {

/// Binary container for dense tensors and compressed forms.
///
/// Layout (all integers and floats little-endian):
///   bytes 0..3   magic "VIET"
///   u32          version (1)
///   u8           kind: 0 dense, 1 tucker, 2 tucker_cp
///   u8           truncation rule: 0 sigma_max, 1 energy
///   u16          reserved (0)
///   f64          tolerance used to produce the form (0 for dense)
///   u64 x 3      dims n1 n2 n3
///   u64 x 3      ranks (r1 r2 r3 for tucker, r r r for tucker_cp, 0 for dense)
///   payload      f64 (re, im) pairs:
///                  dense:     n1*n2*n3 entries in axis-1-fastest order
///                  tucker:    U1 (n1 x r1), U2, U3 column-major, then core
///                  tucker_cp: W1 (n1 x r), W2, W3 column-major
using ContainerValue = std::variant<Tensor3, TuckerForm, TuckerCPForm>;

namespace detail {

constexpr char kContainerMagic[4] = {'V', 'I', 'E', 'T'};
constexpr std::uint32_t kContainerVersion = 1;

inline void write_bytes(std::ostream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <typename T>
void write_pod(std::ostream& os, T v) {
  write_bytes(os, &v, sizeof(T));
}

inline void read_bytes(std::istream& is, void* p, std::size_t n) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (!is) throw std::runtime_error("container: truncated file");
}

template <typename T>
T read_pod(std::istream& is) {
  T v;
  read_bytes(is, &v, sizeof(T));
  return v;
}

inline void write_complex_block(std::ostream& os, const cplx* data, std::int64_t count) {
  for (std::int64_t n = 0; n < count; ++n) {
    write_pod(os, data[n].real());
    write_pod(os, data[n].imag());
  }
}

inline void read_complex_block(std::istream& is, cplx* data, std::int64_t count) {
  for (std::int64_t n = 0; n < count; ++n) {
    double re = read_pod<double>(is);
    double im = read_pod<double>(is);
    data[n] = cplx(re, im);
  }
}

inline void write_header(std::ostream& os, std::uint8_t kind, std::uint8_t rule, double tol,
                         const std::array<Index, 3>& dims, const std::array<Index, 3>& ranks) {
  write_bytes(os, kContainerMagic, 4);
  write_pod<std::uint32_t>(os, kContainerVersion);
  write_pod<std::uint8_t>(os, kind);
  write_pod<std::uint8_t>(os, rule);
  write_pod<std::uint16_t>(os, 0);
  write_pod<double>(os, tol);
  for (Index d : dims) write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(d));
  for (Index r : ranks) write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(r));
}

}  // namespace detail

inline void save_container(const std::string& path, const Tensor3& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("container: cannot open " + path + " for writing");
  detail::write_header(os, 0, 0, 0.0, t.dims(), {0, 0, 0});
  detail::write_complex_block(os, t.data(), t.size());
}

inline void save_container(const std::string& path, const TuckerForm& f,
                           const std::array<Index, 3>& dims) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("container: cannot open " + path + " for writing");
  detail::write_header(os, 1, f.rule == TruncationRule::SigmaMax ? 0 : 1, f.tol, dims, f.ranks);
  for (int q = 0; q < 3; ++q)
    detail::write_complex_block(os, f.factors[q].data(), f.factors[q].size());
  detail::write_complex_block(os, f.core.data(), f.core.size());
}

inline void save_container(const std::string& path, const TuckerCPForm& f,
                           const std::array<Index, 3>& dims) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("container: cannot open " + path + " for writing");
  detail::write_header(os, 2, 0, 0.0, dims, {f.rank, f.rank, f.rank});
  for (int q = 0; q < 3; ++q)
    detail::write_complex_block(os, f.factors[q].data(), f.factors[q].size());
}

inline ContainerValue load_container(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("container: cannot open " + path);
  char magic[4];
  detail::read_bytes(is, magic, 4);
  if (std::memcmp(magic, detail::kContainerMagic, 4) != 0)
    throw std::runtime_error("container: bad magic in " + path);
  const auto version = detail::read_pod<std::uint32_t>(is);
  if (version != detail::kContainerVersion)
    throw std::runtime_error("container: unsupported version");
  const auto kind = detail::read_pod<std::uint8_t>(is);
  const auto rule = detail::read_pod<std::uint8_t>(is);
  detail::read_pod<std::uint16_t>(is);
  const double tol = detail::read_pod<double>(is);
  std::array<Index, 3> dims, ranks;
  for (auto& d : dims) d = static_cast<Index>(detail::read_pod<std::uint64_t>(is));
  for (auto& r : ranks) r = static_cast<Index>(detail::read_pod<std::uint64_t>(is));

  if (kind == 0) {
    Tensor3 t(dims[0], dims[1], dims[2]);
    detail::read_complex_block(is, t.data(), t.size());
    return t;
  }
  if (kind == 1) {
    TuckerForm f;
    f.rule = rule == 0 ? TruncationRule::SigmaMax : TruncationRule::Energy;
    f.tol = tol;
    f.ranks = ranks;
    for (int q = 0; q < 3; ++q) {
      f.factors[q].resize(dims[q], ranks[q]);
      detail::read_complex_block(is, f.factors[q].data(), f.factors[q].size());
    }
    f.core = Tensor3(ranks[0], ranks[1], ranks[2]);
    detail::read_complex_block(is, f.core.data(), f.core.size());
    return f;
  }
  if (kind == 2) {
    TuckerCPForm f;
    f.rank = ranks[0];
    for (int q = 0; q < 3; ++q) {
      f.factors[q].resize(dims[q], f.rank);
      detail::read_complex_block(is, f.factors[q].data(), f.factors[q].size());
    }
    return f;
  }
  throw std::runtime_error("container: unknown form kind");
}

}  // namespace vie
