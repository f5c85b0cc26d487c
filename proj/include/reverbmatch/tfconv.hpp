#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reverbmatch/rir.hpp"
#include "reverbmatch/signal.hpp"

namespace reverbmatch {

/// Number of off-diagonal bands kept on each side of f' = f (circular
/// distance), or the full band.
class BandRadius {
 public:
  static BandRadius full() { return BandRadius(); }
  explicit BandRadius(std::size_t radius) : radius_(radius) {}

  bool is_full() const { return !radius_.has_value(); }
  std::size_t value() const { return radius_.value(); }
  /// Band entries stored per output bin for an F-bin transform.
  std::size_t width(std::size_t num_bins) const;
  std::string to_string() const;
  /// "full" or a non-negative integer.
  static BandRadius parse(std::string_view text);

  bool operator==(const BandRadius&) const = default;

 private:
  BandRadius() = default;
  std::optional<std::size_t> radius_;
};

inline constexpr std::size_t kDefaultBandRadius = 8;

/// Inter-band / inter-frame kernel H[f, f', d] of a real RIR under an STFT
/// config:
///
///   Y[f, t] = sum_d sum_f' H[f, f', d] S[f', t - d]
///   H[f, f', d] = sum_{m=-N+1}^{N-1} h(d L - m) W_{f,f'}(m)
///   W_{f,f'}(m) = (1/F) sum_n g_s(n + m) g_a(n) exp(2 pi i (f' (n + m) - f n) / F)
///
/// Lags run over d = -J .. T_h - 1 where J = config.lead_frames() and
/// T_h = ceil((N_h + N - 1) / L). The J negative lags carry the part of the
/// direct path that an analysis frame sees from the next dry frames; they are
/// needed for the identity to be exact.
///
/// Storage is [lag][f][band], band entry b mapping to f' = (f + b - offset) mod F
/// with offset = B for a truncated band and 0 for the full band.
class ConvKernel {
 public:
  ConvKernel(std::shared_ptr<const StftConfig> config, BandRadius band, std::size_t causal_frames);

  const StftConfig& config() const { return *config_; }
  const std::shared_ptr<const StftConfig>& config_ptr() const { return config_; }
  BandRadius band_radius() const { return band_; }
  std::size_t num_bins() const { return bins_; }
  std::size_t width() const { return width_; }
  std::size_t offset() const { return offset_; }
  /// T_h
  std::size_t causal_frames() const { return causal_; }
  /// J
  std::size_t lead_frames() const { return lead_; }
  std::size_t num_lags() const { return lead_ + causal_; }

  /// Lag slice for d in [-J, T_h), laid out [f][band].
  std::span<Complex> lag(std::ptrdiff_t d);
  std::span<const Complex> lag(std::ptrdiff_t d) const;

  /// H[f, f', d]; zero outside the stored band.
  Complex entry(std::size_t f, std::size_t f_prime, std::ptrdiff_t d) const;

  std::span<Complex> data() { return data_; }
  std::span<const Complex> data() const { return data_; }

 private:
  std::shared_ptr<const StftConfig> config_;
  BandRadius band_;
  std::size_t bins_, width_, offset_, causal_, lead_;
  std::vector<Complex> data_;
};

/// T_h = ceil((N_h + N - 1) / L).
std::size_t causal_kernel_frames(std::size_t rir_length, const StftConfig& config);

/// Builds kernels for a fixed STFT config and band radius. The window cross
/// terms A_delta(m) = sum_n g_s(n + m) g_a(n) exp(2 pi i delta n / F) are
/// computed once; each kernel then costs one length-F FFT per (lag, band entry).
/// Requires a perfect-reconstruction config with F = N.
class KernelBuilder {
 public:
  KernelBuilder(std::shared_ptr<const StftConfig> config, BandRadius band);

  ConvKernel build(std::span<const double> h) const;
  ConvKernel build(const Rir& h) const { return build(h.taps); }

  const std::shared_ptr<const StftConfig>& config_ptr() const { return config_; }
  BandRadius band_radius() const { return band_; }

 private:
  std::shared_ptr<const StftConfig> config_;
  BandRadius band_;
  std::size_t width_, offset_;
  std::vector<Complex> cross_;  // [band][m + N - 1]
};

ConvKernel build_kernel(const Rir& h, std::shared_ptr<const StftConfig> config, BandRadius band);

/// Y = C(S): output frames default to T_s + T_h - 1. A smaller count crops the
/// output, a larger one zero-extends it.
Spectrogram apply(const ConvKernel& kernel, const Spectrogram& s,
                  std::optional<std::size_t> out_frames = std::nullopt);

/// Adjoint of apply(kernel, ., G.num_frames()) for inputs of `in_frames`
/// frames (default G.num_frames() - T_h + 1):
///   <apply(k, S), G> = <S, apply_adjoint(k, G)>.
Spectrogram apply_adjoint(const ConvKernel& kernel, const Spectrogram& g,
                          std::optional<std::size_t> in_frames = std::nullopt);

/// Largest singular value of S -> apply(k, S, out_frames) on `in_frames`
/// frames, by power iteration.
double operator_norm(const ConvKernel& kernel, std::size_t in_frames, std::size_t out_frames,
                     std::size_t iterations = 50);

/// Debug dump, little-endian:
///   int32 F, int32 B (-1 = full), int32 T_h, int32 J, int32 width,
///   then num_lags * F * width (float re, float im) pairs, row-major [lag][f][band].
void write_kernel_dump(const std::filesystem::path& path, const ConvKernel& kernel);

struct KernelDump {
  int num_bins, band_radius, causal_frames, lead_frames, width;
  std::vector<std::complex<float>> data;
};
KernelDump read_kernel_dump(const std::filesystem::path& path);

}  // namespace reverbmatch
