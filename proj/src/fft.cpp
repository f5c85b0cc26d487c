#include "reverbmatch/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace reverbmatch {
namespace {

enum class Kind { c2c_fwd, c2c_inv, r2c, c2r };

// FFTW's planner is not thread-safe; execution with the new-array interface
// is. Plans live for the lifetime of the process.
std::mutex g_plan_mutex;
std::map<std::pair<Kind, std::size_t>, fftw_plan>& plan_cache() {
  static std::map<std::pair<Kind, std::size_t>, fftw_plan> cache;
  return cache;
}

fftw_plan get_plan(Kind kind, std::size_t n) {
  std::lock_guard lock(g_plan_mutex);
  auto& cache = plan_cache();
  auto it = cache.find({kind, n});
  if (it != cache.end()) return it->second;

  const int len = static_cast<int>(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::vector<fftw_complex> cbuf_a(n), cbuf_b(n);
  std::vector<double> rbuf(n);
  fftw_plan plan = nullptr;
  switch (kind) {
    case Kind::c2c_fwd:
      plan = fftw_plan_dft_1d(len, cbuf_a.data(), cbuf_b.data(), FFTW_FORWARD, flags);
      break;
    case Kind::c2c_inv:
      plan = fftw_plan_dft_1d(len, cbuf_a.data(), cbuf_b.data(), FFTW_BACKWARD, flags);
      break;
    case Kind::r2c:
      plan = fftw_plan_dft_r2c_1d(len, rbuf.data(), cbuf_a.data(), flags);
      break;
    case Kind::c2r:
      plan = fftw_plan_dft_c2r_1d(len, cbuf_a.data(), rbuf.data(), flags);
      break;
  }
  if (!plan) throw std::runtime_error("Fft: FFTW planning failed");
  cache.emplace(std::make_pair(kind, n), plan);
  return plan;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }
fftw_complex* as_fftw(const Complex* p) {
  return reinterpret_cast<fftw_complex*>(const_cast<Complex*>(p));
}

}  // namespace

Fft::Fft(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("Fft: size must be > 0");
  fwd_ = get_plan(Kind::c2c_fwd, n);
  inv_ = get_plan(Kind::c2c_inv, n);
}

void Fft::forward(const Complex* in, Complex* out) const {
  fftw_execute_dft(static_cast<fftw_plan>(fwd_), as_fftw(in), as_fftw(out));
}

void Fft::inverse(const Complex* in, Complex* out) const {
  fftw_execute_dft(static_cast<fftw_plan>(inv_), as_fftw(in), as_fftw(out));
}

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("RealFft: size must be > 0");
  fwd_ = get_plan(Kind::r2c, n);
  inv_ = get_plan(Kind::c2r, n);
}

void RealFft::forward(const double* in, Complex* out) const {
  fftw_execute_dft_r2c(static_cast<fftw_plan>(fwd_), const_cast<double*>(in), as_fftw(out));
}

void RealFft::inverse(const Complex* in, double* out) const {
  // c2r overwrites its input.
  std::vector<Complex> scratch(in, in + n_ / 2 + 1);
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inv_), as_fftw(scratch.data()), out);
}

std::size_t good_fft_size(std::size_t n) {
  if (n <= 1) return 1;
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2u, 3u, 5u, 7u})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

}  // namespace reverbmatch
