#include "reverbmatch/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "reverbmatch/fft.hpp"
#include "reverbmatch/parallel.hpp"

namespace reverbmatch {

void Signal::validate() const {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate))
    throw std::invalid_argument("Signal: sample rate must be positive");
  for (double v : samples)
    if (!std::isfinite(v)) throw std::invalid_argument("Signal: non-finite sample");
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  return w;
}

std::vector<double> canonical_dual_window(std::span<const double> analysis, std::size_t hop) {
  const std::size_t n = analysis.size();
  if (hop == 0 || hop > n) throw std::invalid_argument("canonical_dual_window: need 0 < hop <= window length");
  std::vector<double> energy(hop, 0.0);
  for (std::size_t i = 0; i < n; ++i) energy[i % hop] += analysis[i] * analysis[i];
  std::vector<double> dual(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (energy[i % hop] <= 0.0)
      throw std::invalid_argument("canonical_dual_window: analysis window leaves samples uncovered");
    dual[i] = analysis[i] / energy[i % hop];
  }
  return dual;
}

StftConfig::StftConfig(std::vector<double> analysis, std::vector<double> synthesis, std::size_t hop)
    : analysis_(std::move(analysis)), synthesis_(std::move(synthesis)), hop_(hop) {
  const std::size_t n = analysis_.size();
  if (n == 0) throw std::invalid_argument("StftConfig: empty window");
  if (synthesis_.size() != n) throw std::invalid_argument("StftConfig: window lengths differ");
  if (hop_ == 0 || hop_ > n) throw std::invalid_argument("StftConfig: hop must satisfy 0 < L <= N");
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(analysis_[i]) || !std::isfinite(synthesis_[i]))
      throw std::invalid_argument("StftConfig: non-finite window coefficient");

  std::vector<double> overlap(hop_, 0.0);
  for (std::size_t i = 0; i < n; ++i) overlap[i % hop_] += analysis_[i] * synthesis_[i];
  for (double v : overlap) pr_error_ = std::max(pr_error_, std::abs(v - 1.0));
}

StftConfig StftConfig::hann(std::size_t window_len, std::size_t hop) {
  auto analysis = hann_window(window_len);
  auto synthesis = canonical_dual_window(analysis, hop);
  return StftConfig(std::move(analysis), std::move(synthesis), hop);
}

std::shared_ptr<const StftConfig> StftConfig::make_default() {
  static const auto config = std::make_shared<const StftConfig>(hann(512, 256));
  return config;
}

std::pair<double, double> StftConfig::frame_bounds() const {
  std::vector<double> energy(hop_, 0.0);
  for (std::size_t i = 0; i < analysis_.size(); ++i) energy[i % hop_] += analysis_[i] * analysis_[i];
  const auto [lo, hi] = std::minmax_element(energy.begin(), energy.end());
  const double f = static_cast<double>(num_bins());
  return {f * *lo, f * *hi};
}

std::size_t StftConfig::frames_for_length(std::size_t length) const {
  return lead_frames() + (length + hop_ - 1) / hop_;
}

bool StftConfig::operator==(const StftConfig& other) const {
  return hop_ == other.hop_ && analysis_ == other.analysis_ && synthesis_ == other.synthesis_;
}

Spectrogram::Spectrogram(std::shared_ptr<const StftConfig> config, std::size_t num_frames,
                         double sample_rate)
    : config_(std::move(config)), frames_(num_frames), sample_rate_(sample_rate) {
  if (!config_) throw std::invalid_argument("Spectrogram: null config");
  bins_ = config_->num_bins();
  data_.assign(bins_ * frames_, Complex{});
}

bool Spectrogram::same_shape(const Spectrogram& other) const {
  if (bins_ != other.bins_ || frames_ != other.frames_) return false;
  if (config_ == other.config_) return true;
  return config_ && other.config_ && *config_ == *other.config_;
}

Spectrogram Spectrogram::resized(std::size_t num_frames) const {
  Spectrogram out(config_, num_frames, sample_rate_);
  const std::size_t keep = std::min(num_frames, frames_) * bins_;
  std::copy_n(data_.begin(), keep, out.data_.begin());
  return out;
}

Spectrogram& Spectrogram::operator*=(double a) {
  for (auto& v : data_) v *= a;
  return *this;
}

Spectrogram& Spectrogram::operator+=(const Spectrogram& other) {
  if (!same_shape(other)) throw std::invalid_argument("Spectrogram: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Spectrogram& Spectrogram::operator-=(const Spectrogram& other) {
  if (!same_shape(other)) throw std::invalid_argument("Spectrogram: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Spectrogram operator*(double a, Spectrogram s) { return s *= a; }
Spectrogram operator+(Spectrogram a, const Spectrogram& b) { return a += b; }
Spectrogram operator-(Spectrogram a, const Spectrogram& b) { return a -= b; }

double frobenius_norm_squared(const Spectrogram& s) {
  double acc = 0.0;
  for (const auto& v : s.data()) acc += std::norm(v);
  return acc;
}

double frobenius_norm(const Spectrogram& s) { return std::sqrt(frobenius_norm_squared(s)); }

Complex inner_product(const Spectrogram& a, const Spectrogram& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("inner_product: shape mismatch");
  Complex acc{};
  auto da = a.data();
  auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) acc += std::conj(da[i]) * db[i];
  return acc;
}

Spectrogram stft(std::span<const double> x, std::shared_ptr<const StftConfig> config, double sample_rate) {
  if (!config) throw std::invalid_argument("stft: null config");
  if (x.empty()) throw std::invalid_argument("stft: empty input");
  const StftConfig& cfg = *config;
  const std::size_t n = cfg.window_len();
  const std::size_t hop = cfg.hop();
  const std::size_t lead = cfg.lead_frames();
  const std::size_t frames = cfg.frames_for_length(x.size());
  const auto& window = cfg.analysis_window();

  Spectrogram out(config, frames, sample_rate);
  RealFft fft(n);
  parallel_for(0, frames, [&](std::size_t t) {
    std::vector<double> buf(n, 0.0);
    std::vector<Complex> half(n / 2 + 1);
    const auto start = static_cast<std::ptrdiff_t>(t * hop) - static_cast<std::ptrdiff_t>(lead * hop);
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = start + static_cast<std::ptrdiff_t>(i);
      if (k >= 0 && k < static_cast<std::ptrdiff_t>(x.size())) buf[i] = x[static_cast<std::size_t>(k)] * window[i];
    }
    fft.forward(buf.data(), half.data());
    auto dst = out.frame(t);
    for (std::size_t f = 0; f <= n / 2; ++f) dst[f] = half[f];
    for (std::size_t f = n / 2 + 1; f < n; ++f) dst[f] = std::conj(half[n - f]);
  });
  return out;
}

Spectrogram stft(const Signal& x, std::shared_ptr<const StftConfig> config) {
  return stft(x.samples, std::move(config), x.sample_rate);
}

Signal istft(const Spectrogram& X, std::size_t length) {
  const StftConfig& cfg = X.config();
  if (!cfg.perfect_reconstruction())
    throw std::invalid_argument("istft: window pair lacks the perfect-reconstruction property (error " +
                                std::to_string(cfg.reconstruction_error()) + ")");
  const std::size_t n = cfg.window_len();
  const std::size_t hop = cfg.hop();
  const std::size_t lead = cfg.lead_frames();
  const auto& window = cfg.synthesis_window();

  Signal out;
  out.sample_rate = X.sample_rate();
  out.samples.assign(length, 0.0);

  // The real part of a full-band inverse DFT equals the c2r transform of the
  // Hermitian part of the frame.
  RealFft fft(n);
  std::vector<Complex> herm(n / 2 + 1);
  std::vector<double> buf(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t t = 0; t < X.num_frames(); ++t) {
    auto src = X.frame(t);
    for (std::size_t f = 0; f <= n / 2; ++f) herm[f] = 0.5 * (src[f] + std::conj(src[(n - f) % n]));
    fft.inverse(herm.data(), buf.data());
    const auto start = static_cast<std::ptrdiff_t>(t * hop) - static_cast<std::ptrdiff_t>(lead * hop);
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = start + static_cast<std::ptrdiff_t>(i);
      if (k >= 0 && k < static_cast<std::ptrdiff_t>(length))
        out.samples[static_cast<std::size_t>(k)] += buf[i] * scale * window[i];
    }
  }
  return out;
}

Signal istft(const Spectrogram& X) {
  const std::size_t lead = X.config().lead_frames();
  const std::size_t frames = X.num_frames() > lead ? X.num_frames() - lead : 0;
  return istft(X, frames * X.config().hop());
}

std::vector<double> convolve(std::span<const double> x, std::span<const double> h) {
  if (x.empty() || h.empty()) return {};
  const std::size_t out_len = x.size() + h.size() - 1;
  const std::size_t n = good_fft_size(out_len);
  RealFft fft(n);
  std::vector<double> xa(n, 0.0), ha(n, 0.0);
  std::copy(x.begin(), x.end(), xa.begin());
  std::copy(h.begin(), h.end(), ha.begin());
  std::vector<Complex> xs(n / 2 + 1), hs(n / 2 + 1);
  fft.forward(xa.data(), xs.data());
  fft.forward(ha.data(), hs.data());
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] *= hs[i];
  fft.inverse(xs.data(), xa.data());
  const double scale = 1.0 / static_cast<double>(n);
  std::vector<double> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) out[i] = xa[i] * scale;
  return out;
}

}  // namespace reverbmatch
