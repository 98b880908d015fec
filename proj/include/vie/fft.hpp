#pragma once

#include "vie/tensor.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace vie {

/// FFTW-backed DFT provider with plan reuse.
///
/// Plans are created once per (size, direction) and cached for the lifetime
/// of the service; they are planned with FFTW_UNALIGNED so they can execute
/// on any caller-owned buffer. Planning is serialized behind a mutex (FFTW's
/// planner is not thread-safe); execution is lock-free.
///
/// Forward transforms are unnormalized; inverse transforms divide by the
/// element count so inverse3(forward3(x)) == x.
class DftService {
public:
  DftService() = default;
  ~DftService() {
    for (auto& [key, plan] : plans3_) fftw_destroy_plan(plan);
    for (auto& [key, plan] : plans1_) fftw_destroy_plan(plan);
  }
  DftService(const DftService&) = delete;
  DftService& operator=(const DftService&) = delete;

  void forward3(Tensor3& t) { exec3(t, FFTW_FORWARD); }

  void inverse3(Tensor3& t) {
    exec3(t, FFTW_BACKWARD);
    t.flat() /= static_cast<double>(t.size());
  }

  /// In-place 1D transform of a contiguous complex vector.
  void forward1(Eigen::VectorXcd& v) { exec1(v, FFTW_FORWARD); }

  void inverse1(Eigen::VectorXcd& v) {
    exec1(v, FFTW_BACKWARD);
    v /= static_cast<double>(v.size());
  }

private:
  using Key3 = std::tuple<Index, Index, Index, int>;
  using Key1 = std::pair<Index, int>;

  void exec3(Tensor3& t, int sign) {
    fftw_plan plan;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      Key3 key{t.dim(0), t.dim(1), t.dim(2), sign};
      auto it = plans3_.find(key);
      if (it == plans3_.end()) {
        // axis 1 is fastest in Tensor3, so it is FFTW's last dimension
        plan = fftw_plan_dft_3d(static_cast<int>(t.dim(2)), static_cast<int>(t.dim(1)),
                                static_cast<int>(t.dim(0)),
                                reinterpret_cast<fftw_complex*>(t.data()),
                                reinterpret_cast<fftw_complex*>(t.data()), sign,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans3_.emplace(key, plan);
      } else {
        plan = it->second;
      }
    }
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(t.data()),
                     reinterpret_cast<fftw_complex*>(t.data()));
  }

  void exec1(Eigen::VectorXcd& v, int sign) {
    fftw_plan plan;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      Key1 key{v.size(), sign};
      auto it = plans1_.find(key);
      if (it == plans1_.end()) {
        plan = fftw_plan_dft_1d(static_cast<int>(v.size()),
                                reinterpret_cast<fftw_complex*>(v.data()),
                                reinterpret_cast<fftw_complex*>(v.data()), sign,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans1_.emplace(key, plan);
      } else {
        plan = it->second;
      }
    }
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(v.data()),
                     reinterpret_cast<fftw_complex*>(v.data()));
  }

  std::mutex mutex_;
  std::map<Key3, fftw_plan> plans3_;
  std::map<Key1, fftw_plan> plans1_;
};

}  // namespace vie
