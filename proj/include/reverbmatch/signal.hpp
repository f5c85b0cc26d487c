#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace reverbmatch {

using Complex = std::complex<double>;

inline constexpr double kDefaultSampleRate = 16000.0;

/// Real-valued time-domain signal.
struct Signal {
  std::vector<double> samples;
  double sample_rate = kDefaultSampleRate;

  std::size_t size() const { return samples.size(); }
  /// Throws std::invalid_argument on non-finite samples or a non-positive rate.
  void validate() const;
};

/// Periodic Hann window, w(n) = 0.5 - 0.5 cos(2 pi n / N).
std::vector<double> hann_window(std::size_t n);

/// Canonical dual of `analysis` for hop `hop`:
///   g_s(n) = g_a(n) / sum_k g_a(n + kL)^2
/// Satisfies sum_k g_a(n + kL) g_s(n + kL) = 1 whenever the denominator is
/// nonzero everywhere.
std::vector<double> canonical_dual_window(std::span<const double> analysis, std::size_t hop);

/// Window pair and hop of a full-band STFT with F = N bins.
///
/// Framing is left-aligned: frame t starts at sample (t - J) * L where
/// J = floor((N - 1) / L) is the number of lead frames. The lead frames are
/// what makes every sample of the signal covered by a complete set of
/// overlapping frames, so the inverse is exact from sample 0 on and the
/// cross-band kernel depends only on frame differences.
class StftConfig {
 public:
  StftConfig(std::vector<double> analysis, std::vector<double> synthesis, std::size_t hop);

  /// N-point periodic Hann analysis window, hop L, canonical dual synthesis.
  static StftConfig hann(std::size_t window_len = 512, std::size_t hop = 256);
  static std::shared_ptr<const StftConfig> make_default();

  std::size_t window_len() const { return analysis_.size(); }
  std::size_t hop() const { return hop_; }
  std::size_t num_bins() const { return analysis_.size(); }
  std::size_t lead_frames() const { return (window_len() - 1) / hop_; }
  const std::vector<double>& analysis_window() const { return analysis_; }
  const std::vector<double>& synthesis_window() const { return synthesis_; }

  /// max_n |sum_k g_a(n + kL) g_s(n + kL) - 1|
  double reconstruction_error() const { return pr_error_; }
  bool perfect_reconstruction() const { return pr_error_ <= 1e-10; }

  /// Frame bounds (A, B): A ||x||^2 <= ||stft(x)||_F^2 <= B ||x||^2, with
  /// A = F min_n sum_k g_a(n + kL)^2 and B = F max_n of the same sum.
  std::pair<double, double> frame_bounds() const;

  /// Frames produced by stft for a signal of `length` samples: J + ceil(length / L).
  std::size_t frames_for_length(std::size_t length) const;

  bool operator==(const StftConfig& other) const;

 private:
  std::vector<double> analysis_;
  std::vector<double> synthesis_;
  std::size_t hop_;
  double pr_error_ = 0.0;
};

/// Full-band complex STFT grid, F bins x T frames, stored frame-major.
class Spectrogram {
 public:
  Spectrogram() = default;
  Spectrogram(std::shared_ptr<const StftConfig> config, std::size_t num_frames,
              double sample_rate = kDefaultSampleRate);

  std::size_t num_bins() const { return bins_; }
  std::size_t num_frames() const { return frames_; }
  std::size_t size() const { return data_.size(); }
  double sample_rate() const { return sample_rate_; }
  const StftConfig& config() const { return *config_; }
  const std::shared_ptr<const StftConfig>& config_ptr() const { return config_; }

  Complex& operator()(std::size_t f, std::size_t t) { return data_[t * bins_ + f]; }
  const Complex& operator()(std::size_t f, std::size_t t) const { return data_[t * bins_ + f]; }

  std::span<Complex> frame(std::size_t t) { return {data_.data() + t * bins_, bins_}; }
  std::span<const Complex> frame(std::size_t t) const { return {data_.data() + t * bins_, bins_}; }
  std::span<Complex> data() { return data_; }
  std::span<const Complex> data() const { return data_; }

  /// True when both grids have the same STFT config and dimensions.
  bool same_shape(const Spectrogram& other) const;

  /// Copy with `num_frames` frames: extra frames are zero, surplus frames dropped.
  Spectrogram resized(std::size_t num_frames) const;

  Spectrogram& operator*=(double a);
  Spectrogram& operator+=(const Spectrogram& other);
  Spectrogram& operator-=(const Spectrogram& other);

 private:
  std::shared_ptr<const StftConfig> config_;
  std::size_t bins_ = 0;
  std::size_t frames_ = 0;
  double sample_rate_ = kDefaultSampleRate;
  std::vector<Complex> data_;
};

Spectrogram operator*(double a, Spectrogram s);
Spectrogram operator+(Spectrogram a, const Spectrogram& b);
Spectrogram operator-(Spectrogram a, const Spectrogram& b);

double frobenius_norm_squared(const Spectrogram& s);
double frobenius_norm(const Spectrogram& s);
/// <a, b> = sum conj(a) b
Complex inner_product(const Spectrogram& a, const Spectrogram& b);

/// Left-aligned STFT with zero padding at the tail:
///   X[f, t] = sum_n x((t - J) L + n) g_a(n) exp(-2 pi i f n / N).
Spectrogram stft(std::span<const double> x, std::shared_ptr<const StftConfig> config,
                 double sample_rate = kDefaultSampleRate);
Spectrogram stft(const Signal& x, std::shared_ptr<const StftConfig> config);

/// Overlap-add synthesis with g_s:
///   x(k) = (1/N) sum_t sum_f X[f, t] g_s(k - (t - J) L) exp(2 pi i f (k - (t - J) L) / N),
/// real part. `length` defaults to (T - J) L samples.
Signal istft(const Spectrogram& X, std::size_t length);
Signal istft(const Spectrogram& X);

/// Full linear convolution, length x.size() + h.size() - 1, computed by FFT.
std::vector<double> convolve(std::span<const double> x, std::span<const double> h);

}  // namespace reverbmatch
