#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace qlab::fft {

using cplx = std::complex<double>;

// Unnormalized complex 1D transform of fixed length. Plans are created once
// per length under a global lock and cached; executing a plan on caller
// arrays is thread-safe.
class Plan1d {
 public:
  static const Plan1d& get(std::size_t n);

  std::size_t size() const { return n_; }
  void forward(std::span<const cplx> in, std::span<cplx> out) const;
  void backward(std::span<const cplx> in, std::span<cplx> out) const;

  Plan1d(const Plan1d&) = delete;
  Plan1d& operator=(const Plan1d&) = delete;
  ~Plan1d();

 private:
  explicit Plan1d(std::size_t n);
  std::size_t n_;
  void* fwd_ = nullptr;
  void* bwd_ = nullptr;
};

// Real-to-complex 2D transform pair of shape (n0, n1), last index fastest.
// Complex side has shape (n0, n1/2 + 1). Owned by one simulator instance.
class PlanReal2d {
 public:
  PlanReal2d(std::size_t n0, std::size_t n1);
  ~PlanReal2d();
  PlanReal2d(const PlanReal2d&) = delete;
  PlanReal2d& operator=(const PlanReal2d&) = delete;
  PlanReal2d(PlanReal2d&& other) noexcept;
  PlanReal2d& operator=(PlanReal2d&& other) noexcept;

  std::size_t n0() const { return n0_; }
  std::size_t n1() const { return n1_; }
  std::size_t complex_cols() const { return n1_ / 2 + 1; }

  // Unnormalized transforms. backward() may clobber its input.
  void forward(std::span<double> in, std::span<cplx> out) const;
  void backward(std::span<cplx> in, std::span<double> out) const;

 private:
  std::size_t n0_ = 0, n1_ = 0;
  void* fwd_ = nullptr;
  void* bwd_ = nullptr;
};

}  // namespace qlab::fft
