#pragma once

#include <complex>
#include <cstddef>

namespace reverbmatch {

using Complex = std::complex<double>;

// Thin wrappers over FFTW plans. Plans are created once per size and shared;
// execution is thread-safe. Transforms are unnormalized:
//   forward: X[k] = sum_n x[n] exp(-2 pi i k n / N)
//   inverse: x[n] = sum_k X[k] exp(+2 pi i k n / N)
class Fft {
 public:
  explicit Fft(std::size_t n);
  std::size_t size() const { return n_; }
  void forward(const Complex* in, Complex* out) const;
  void inverse(const Complex* in, Complex* out) const;

 private:
  std::size_t n_;
  void* fwd_;
  void* inv_;
};

class RealFft {
 public:
  explicit RealFft(std::size_t n);
  std::size_t size() const { return n_; }
  /// n real samples -> n/2+1 bins.
  void forward(const double* in, Complex* out) const;
  /// n/2+1 Hermitian bins -> n real samples. `in` is left untouched.
  void inverse(const Complex* in, double* out) const;

 private:
  std::size_t n_;
  void* fwd_;
  void* inv_;
};

/// Smallest 2^a 3^b 5^c 7^d >= n.
std::size_t good_fft_size(std::size_t n);

}  // namespace reverbmatch
