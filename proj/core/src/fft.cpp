#include "fft.hpp"

#include <mutex>
#include <stdexcept>
#include <vector>

namespace twopath::detail {
namespace {

// The FFTW planner is not thread safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

Fft::Fft(std::size_t n) : n_(n) {
  std::vector<std::complex<double>> scratch(n);
  std::lock_guard lock(planner_mutex());
  const int size = static_cast<int>(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_ = fftw_plan_dft_1d(size, as_fftw(scratch.data()), as_fftw(scratch.data()),
                              FFTW_FORWARD, flags);
  inverse_ = fftw_plan_dft_1d(size, as_fftw(scratch.data()), as_fftw(scratch.data()),
                              FFTW_BACKWARD, flags);
  if (forward_ == nullptr || inverse_ == nullptr) throw std::runtime_error("FFTW planning failed");
}

Fft::~Fft() {
  std::lock_guard lock(planner_mutex());
  if (forward_ != nullptr) fftw_destroy_plan(forward_);
  if (inverse_ != nullptr) fftw_destroy_plan(inverse_);
}

void Fft::forward(std::span<std::complex<double>> data) const {
  fftw_execute_dft(forward_, as_fftw(data.data()), as_fftw(data.data()));
}

void Fft::inverse(std::span<std::complex<double>> data) const {
  fftw_execute_dft(inverse_, as_fftw(data.data()), as_fftw(data.data()));
}

}  // namespace twopath::detail
