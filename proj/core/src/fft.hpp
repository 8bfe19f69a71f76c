#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <span>

namespace twopath::detail {

// Unnormalized in-place complex DFT of fixed size. Plans are created with
// FFTW_ESTIMATE so results do not depend on runtime timing measurements.
class Fft {
 public:
  explicit Fft(std::size_t n);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  void forward(std::span<std::complex<double>> data) const;
  void inverse(std::span<std::complex<double>> data) const;

  [[nodiscard]] std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

}  // namespace twopath::detail
