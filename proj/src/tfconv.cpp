#include "reverbmatch/tfconv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "reverbmatch/fft.hpp"
#include "reverbmatch/keyvalue.hpp"
#include "reverbmatch/parallel.hpp"

namespace reverbmatch {

std::size_t BandRadius::width(std::size_t num_bins) const {
  if (is_full() || 2 * *radius_ + 1 >= num_bins) return num_bins;
  return 2 * *radius_ + 1;
}

std::string BandRadius::to_string() const { return is_full() ? "full" : std::to_string(*radius_); }

BandRadius BandRadius::parse(std::string_view text) {
  if (text == "full") return full();
  std::size_t value = 0;
  if (text.empty() || text.find_first_not_of("0123456789") != std::string_view::npos)
    throw std::invalid_argument("band radius must be 'full' or a non-negative integer, got '" +
                                std::string(text) + "'");
  for (char c : text) value = value * 10 + static_cast<std::size_t>(c - '0');
  return BandRadius(value);
}

ConvKernel::ConvKernel(std::shared_ptr<const StftConfig> config, BandRadius band, std::size_t causal_frames)
    : config_(std::move(config)), band_(band) {
  if (!config_) throw std::invalid_argument("ConvKernel: null config");
  bins_ = config_->num_bins();
  width_ = band_.width(bins_);
  offset_ = width_ == bins_ ? 0 : band_.value();
  causal_ = causal_frames;
  lead_ = config_->lead_frames();
  data_.assign((lead_ + causal_) * bins_ * width_, Complex{});
}

std::span<Complex> ConvKernel::lag(std::ptrdiff_t d) {
  const auto idx = static_cast<std::size_t>(d + static_cast<std::ptrdiff_t>(lead_));
  return {data_.data() + idx * bins_ * width_, bins_ * width_};
}

std::span<const Complex> ConvKernel::lag(std::ptrdiff_t d) const {
  const auto idx = static_cast<std::size_t>(d + static_cast<std::ptrdiff_t>(lead_));
  return {data_.data() + idx * bins_ * width_, bins_ * width_};
}

Complex ConvKernel::entry(std::size_t f, std::size_t f_prime, std::ptrdiff_t d) const {
  if (d < -static_cast<std::ptrdiff_t>(lead_) || d >= static_cast<std::ptrdiff_t>(causal_)) return {};
  const std::size_t b = (f_prime + offset_ + bins_ - f % bins_) % bins_;
  if (b >= width_) return {};
  return lag(d)[f * width_ + b];
}

std::size_t causal_kernel_frames(std::size_t rir_length, const StftConfig& config) {
  const std::size_t span = rir_length + config.window_len() - 1;
  return (span + config.hop() - 1) / config.hop();
}

KernelBuilder::KernelBuilder(std::shared_ptr<const StftConfig> config, BandRadius band)
    : config_(std::move(config)), band_(band) {
  if (!config_) throw std::invalid_argument("KernelBuilder: null config");
  if (!config_->perfect_reconstruction())
    throw std::invalid_argument("KernelBuilder: config lacks the perfect-reconstruction property");
  const std::size_t n = config_->window_len();
  const std::size_t f_bins = config_->num_bins();
  width_ = band_.width(f_bins);
  offset_ = width_ == f_bins ? 0 : band_.value();

  // For a fixed lag m, A_delta(m) over all delta is the inverse DFT of
  // p_m(n) = g_s(n + m) g_a(n).
  const auto& ga = config_->analysis_window();
  const auto& gs = config_->synthesis_window();
  const std::size_t num_m = 2 * n - 1;
  cross_.assign(width_ * num_m, Complex{});
  Fft fft(f_bins);
  parallel_for(0, num_m, [&](std::size_t mi) {
    const auto m = static_cast<std::ptrdiff_t>(mi) - static_cast<std::ptrdiff_t>(n - 1);
    std::vector<Complex> p(f_bins, Complex{}), a(f_bins);
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = static_cast<std::ptrdiff_t>(i) + m;
      if (k >= 0 && k < static_cast<std::ptrdiff_t>(n)) p[i] = gs[static_cast<std::size_t>(k)] * ga[i];
    }
    fft.inverse(p.data(), a.data());
    for (std::size_t b = 0; b < width_; ++b) {
      const std::size_t delta = (b + f_bins - offset_) % f_bins;
      cross_[b * num_m + mi] = a[delta];
    }
  });
}

ConvKernel KernelBuilder::build(std::span<const double> h) const {
  if (h.empty()) throw std::invalid_argument("KernelBuilder::build: empty RIR");
  const StftConfig& cfg = *config_;
  const std::size_t n = cfg.window_len();
  const std::size_t f_bins = cfg.num_bins();
  const auto hop = static_cast<std::ptrdiff_t>(cfg.hop());
  const std::size_t num_m = 2 * n - 1;
  const auto n_h = static_cast<std::ptrdiff_t>(h.size());
  const auto n_signed = static_cast<std::ptrdiff_t>(n);

  ConvKernel kernel(config_, band_, causal_kernel_frames(h.size(), cfg));
  const auto lead = static_cast<std::ptrdiff_t>(kernel.lead_frames());
  const double inv_f = 1.0 / static_cast<double>(f_bins);
  Fft fft(f_bins);

  parallel_for(0, kernel.num_lags(), [&](std::size_t li) {
    const std::ptrdiff_t d = static_cast<std::ptrdiff_t>(li) - lead;
    auto out = kernel.lag(d);
    // h(dL - m) is nonzero for dL - N_h < m <= dL.
    const std::ptrdiff_t m_lo = std::max(-n_signed + 1, d * hop - n_h + 1);
    const std::ptrdiff_t m_hi = std::min(n_signed - 1, d * hop);
    if (m_lo > m_hi) return;
    std::vector<Complex> folded(f_bins), spectrum(f_bins);
    for (std::size_t b = 0; b < width_; ++b) {
      std::fill(folded.begin(), folded.end(), Complex{});
      const Complex* cross = cross_.data() + b * num_m;
      for (std::ptrdiff_t m = m_lo; m <= m_hi; ++m) {
        const double tap = h[static_cast<std::size_t>(d * hop - m)];
        const auto r = static_cast<std::size_t>((m + n_signed * 2) % static_cast<std::ptrdiff_t>(f_bins));
        folded[r] += tap * cross[m + n_signed - 1];
      }
      fft.inverse(folded.data(), spectrum.data());
      const std::size_t delta = (b + f_bins - offset_) % f_bins;
      for (std::size_t f = 0; f < f_bins; ++f) out[f * width_ + b] = spectrum[(f + delta) % f_bins] * inv_f;
    }
  });
  return kernel;
}

ConvKernel build_kernel(const Rir& h, std::shared_ptr<const StftConfig> config, BandRadius band) {
  return KernelBuilder(std::move(config), band).build(h);
}

namespace {

// Dry frames with the band wrap unrolled: ext[t][i] = S[t][(i - offset) mod F].
std::vector<Complex> extend_frames(const Spectrogram& s, std::size_t width, std::size_t offset) {
  const std::size_t f_bins = s.num_bins();
  const std::size_t ext = f_bins + width - 1;
  std::vector<Complex> out(s.num_frames() * ext);
  for (std::size_t t = 0; t < s.num_frames(); ++t) {
    auto src = s.frame(t);
    Complex* dst = out.data() + t * ext;
    for (std::size_t i = 0; i < ext; ++i) dst[i] = src[(i + f_bins - offset) % f_bins];
  }
  return out;
}

void require_config(const ConvKernel& kernel, const Spectrogram& s, const char* who) {
  if (s.num_bins() != kernel.num_bins() ||
      (s.config_ptr() != kernel.config_ptr() && !(s.config() == kernel.config())))
    throw std::invalid_argument(std::string(who) + ": STFT config of the spectrogram does not match the kernel");
}

}  // namespace

Spectrogram apply(const ConvKernel& kernel, const Spectrogram& s, std::optional<std::size_t> out_frames) {
  require_config(kernel, s, "apply");
  const std::size_t f_bins = kernel.num_bins();
  const std::size_t width = kernel.width();
  const std::size_t ext = f_bins + width - 1;
  const auto t_s = static_cast<std::ptrdiff_t>(s.num_frames());
  const std::size_t t_y = out_frames.value_or(s.num_frames() + kernel.causal_frames() - 1);
  const auto lead = static_cast<std::ptrdiff_t>(kernel.lead_frames());
  const auto causal = static_cast<std::ptrdiff_t>(kernel.causal_frames());

  Spectrogram y(s.config_ptr(), t_y, s.sample_rate());
  if (s.num_frames() == 0) return y;
  const std::vector<Complex> s_ext = extend_frames(s, width, kernel.offset());

  parallel_for(0, t_y, [&](std::size_t ti) {
    const auto t = static_cast<std::ptrdiff_t>(ti);
    auto dst = y.frame(ti);
    for (std::ptrdiff_t d = -lead; d < causal; ++d) {
      const std::ptrdiff_t src_t = t - d;
      if (src_t < 0 || src_t >= t_s) continue;
      const Complex* src = s_ext.data() + static_cast<std::size_t>(src_t) * ext;
      const Complex* k = kernel.lag(d).data();
      for (std::size_t f = 0; f < f_bins; ++f) {
        const Complex* row = k + f * width;
        const Complex* x = src + f;
        double re = 0.0, im = 0.0;
        for (std::size_t b = 0; b < width; ++b) {
          re += row[b].real() * x[b].real() - row[b].imag() * x[b].imag();
          im += row[b].real() * x[b].imag() + row[b].imag() * x[b].real();
        }
        dst[f] += Complex(re, im);
      }
    }
  });
  return y;
}

Spectrogram apply_adjoint(const ConvKernel& kernel, const Spectrogram& g, std::optional<std::size_t> in_frames) {
  require_config(kernel, g, "apply_adjoint");
  if (!in_frames && g.num_frames() + 1 < kernel.causal_frames())
    throw std::invalid_argument("apply_adjoint: fewer frames than the kernel support");
  const std::size_t f_bins = kernel.num_bins();
  const std::size_t width = kernel.width();
  const std::size_t offset = kernel.offset();
  const std::size_t ext = f_bins + width - 1;
  const std::size_t t_s = in_frames.value_or(g.num_frames() + 1 - kernel.causal_frames());
  const auto t_g = static_cast<std::ptrdiff_t>(g.num_frames());
  const auto lead = static_cast<std::ptrdiff_t>(kernel.lead_frames());
  const auto causal = static_cast<std::ptrdiff_t>(kernel.causal_frames());

  Spectrogram out(g.config_ptr(), t_s, g.sample_rate());
  parallel_for(0, t_s, [&](std::size_t tsi) {
    std::vector<double> acc_re(ext, 0.0), acc_im(ext, 0.0);
    const auto ts = static_cast<std::ptrdiff_t>(tsi);
    for (std::ptrdiff_t d = -lead; d < causal; ++d) {
      const std::ptrdiff_t t = ts + d;
      if (t < 0 || t >= t_g) continue;
      auto src = g.frame(static_cast<std::size_t>(t));
      const Complex* k = kernel.lag(d).data();
      for (std::size_t f = 0; f < f_bins; ++f) {
        const double gr = src[f].real(), gi = src[f].imag();
        const Complex* row = k + f * width;
        double* ar = acc_re.data() + f;
        double* ai = acc_im.data() + f;
        for (std::size_t b = 0; b < width; ++b) {
          // conj(k) * g
          ar[b] += row[b].real() * gr + row[b].imag() * gi;
          ai[b] += row[b].real() * gi - row[b].imag() * gr;
        }
      }
    }
    auto dst = out.frame(tsi);
    for (std::size_t i = 0; i < ext; ++i) dst[(i + f_bins - offset) % f_bins] += Complex(acc_re[i], acc_im[i]);
  });
  return out;
}

double operator_norm(const ConvKernel& kernel, std::size_t in_frames, std::size_t out_frames,
                     std::size_t iterations) {
  Spectrogram x(kernel.config_ptr(), in_frames);
  std::mt19937_64 rng(0x6f706e6f726dULL);
  std::normal_distribution<double> normal;
  for (auto& v : x.data()) v = Complex(normal(rng), normal(rng));
  double sigma = 0.0;
  for (std::size_t it = 0; it < iterations; ++it) {
    const double nx = frobenius_norm(x);
    if (nx == 0.0) return 0.0;
    x *= 1.0 / nx;
    Spectrogram z = apply_adjoint(kernel, apply(kernel, x, out_frames), in_frames);
    sigma = std::sqrt(std::abs(inner_product(x, z).real()));
    x = std::move(z);
  }
  return sigma;
}

void write_kernel_dump(const std::filesystem::path& path, const ConvKernel& kernel) {
  std::string out;
  auto put_i32 = [&](std::int32_t v) {
    char b[4];
    std::memcpy(b, &v, 4);
    out.append(b, 4);
  };
  auto put_f32 = [&](float v) {
    char b[4];
    std::memcpy(b, &v, 4);
    out.append(b, 4);
  };
  put_i32(static_cast<std::int32_t>(kernel.num_bins()));
  put_i32(kernel.band_radius().is_full() ? -1 : static_cast<std::int32_t>(kernel.band_radius().value()));
  put_i32(static_cast<std::int32_t>(kernel.causal_frames()));
  put_i32(static_cast<std::int32_t>(kernel.lead_frames()));
  put_i32(static_cast<std::int32_t>(kernel.width()));
  for (const auto& v : kernel.data()) {
    put_f32(static_cast<float>(v.real()));
    put_f32(static_cast<float>(v.imag()));
  }
  write_file_atomic(path, out);
}

KernelDump read_kernel_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open kernel dump: " + path.string());
  KernelDump dump{};
  std::int32_t header[5];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in) throw std::invalid_argument("kernel dump: truncated header");
  dump.num_bins = header[0];
  dump.band_radius = header[1];
  dump.causal_frames = header[2];
  dump.lead_frames = header[3];
  dump.width = header[4];
  const auto count = static_cast<std::size_t>(dump.lead_frames + dump.causal_frames) *
                     static_cast<std::size_t>(dump.num_bins) * static_cast<std::size_t>(dump.width);
  dump.data.resize(count);
  in.read(reinterpret_cast<char*>(dump.data.data()), static_cast<std::streamsize>(count * 8));
  if (!in) throw std::invalid_argument("kernel dump: truncated payload");
  return dump;
}

}  // namespace reverbmatch
