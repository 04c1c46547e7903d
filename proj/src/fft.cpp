#include "qlab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace qlab::fft {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(const cplx* p) {
  return reinterpret_cast<fftw_complex*>(const_cast<cplx*>(p));
}

}  // namespace

Plan1d::Plan1d(std::size_t n) : n_(n) {
  std::vector<cplx> a(n), b(n);
  const int ni = static_cast<int>(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fwd_ = fftw_plan_dft_1d(ni, as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD, flags);
  bwd_ = fftw_plan_dft_1d(ni, as_fftw(a.data()), as_fftw(b.data()), FFTW_BACKWARD, flags);
  if (!fwd_ || !bwd_) throw std::runtime_error("FFTW planning failed");
}

Plan1d::~Plan1d() {
  std::lock_guard lock(planner_mutex());
  if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  if (bwd_) fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

const Plan1d& Plan1d::get(std::size_t n) {
  // The mutex must outlive the cache, so it is constructed first.
  auto& mutex = planner_mutex();
  static std::map<std::size_t, std::unique_ptr<Plan1d>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot.reset(new Plan1d(n));
  return *slot;
}

void Plan1d::forward(std::span<const cplx> in, std::span<cplx> out) const {
  if (in.size() != n_ || out.size() != n_) throw std::invalid_argument("fft size mismatch");
  fftw_execute_dft(static_cast<fftw_plan>(fwd_), as_fftw(in.data()), as_fftw(out.data()));
}

void Plan1d::backward(std::span<const cplx> in, std::span<cplx> out) const {
  if (in.size() != n_ || out.size() != n_) throw std::invalid_argument("fft size mismatch");
  fftw_execute_dft(static_cast<fftw_plan>(bwd_), as_fftw(in.data()), as_fftw(out.data()));
}

PlanReal2d::PlanReal2d(std::size_t n0, std::size_t n1) : n0_(n0), n1_(n1) {
  std::vector<double> r(n0 * n1);
  std::vector<cplx> c(n0 * (n1 / 2 + 1));
  const int a = static_cast<int>(n0), b = static_cast<int>(n1);
  std::lock_guard lock(planner_mutex());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fwd_ = fftw_plan_dft_r2c_2d(a, b, r.data(), as_fftw(c.data()), flags);
  bwd_ = fftw_plan_dft_c2r_2d(a, b, as_fftw(c.data()), r.data(), flags);
  if (!fwd_ || !bwd_) throw std::runtime_error("FFTW planning failed");
}

PlanReal2d::~PlanReal2d() {
  if (!fwd_ && !bwd_) return;
  std::lock_guard lock(planner_mutex());
  if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  if (bwd_) fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

PlanReal2d::PlanReal2d(PlanReal2d&& o) noexcept
    : n0_(o.n0_), n1_(o.n1_), fwd_(o.fwd_), bwd_(o.bwd_) {
  o.fwd_ = o.bwd_ = nullptr;
}

PlanReal2d& PlanReal2d::operator=(PlanReal2d&& o) noexcept {
  if (this != &o) {
    std::swap(n0_, o.n0_);
    std::swap(n1_, o.n1_);
    std::swap(fwd_, o.fwd_);
    std::swap(bwd_, o.bwd_);
  }
  return *this;
}

void PlanReal2d::forward(std::span<double> in, std::span<cplx> out) const {
  fftw_execute_dft_r2c(static_cast<fftw_plan>(fwd_), in.data(), as_fftw(out.data()));
}

void PlanReal2d::backward(std::span<cplx> in, std::span<double> out) const {
  fftw_execute_dft_c2r(static_cast<fftw_plan>(bwd_), as_fftw(in.data()), out.data());
}

}  // namespace qlab::fft
