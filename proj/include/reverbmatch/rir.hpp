#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reverbmatch/keyvalue.hpp"
#include "reverbmatch/signal.hpp"

namespace reverbmatch {

/// Distribution of the Polack noise term b(n).
enum class NoiseMode {
  centered_gaussian,  // b ~ N(0, sigma^2)
  half_normal,        // b ~ |N(0, sigma^2)|, for RIRs with energy at DC
};

std::string_view to_string(NoiseMode mode);
NoiseMode parse_noise_mode(std::string_view text);

inline constexpr std::size_t kDefaultDirectPathSamples = 40;  // ~2.5 ms at 16 kHz

/// Scalar reverberation descriptors. DRR is carried in dB and converted to
/// the linear scale wherever the energy identities need it.
struct AcousticParams {
  double rt60 = 0.5;  // seconds
  double drr_db = 0.0;
  std::size_t n_d = kDefaultDirectPathSamples;  // direct-path length, samples
  double sample_rate = kDefaultSampleRate;
  NoiseMode noise_mode = NoiseMode::centered_gaussian;

  void validate() const;
  KeyValueRecord to_record() const;
  /// Reads rt60, drr_db and the optional n_d, sample_rate, noise_mode keys.
  static AcousticParams from_record(const KeyValueRecord& record);
};

struct Rir {
  std::vector<double> taps;
  double sample_rate = kDefaultSampleRate;

  std::size_t size() const { return taps.size(); }
};

/// Decay constant in samples: tau = rt60 fs / (3 ln 10).
double tau_from_rt60(double rt60, double fs);

/// Noise standard deviation giving reverberant energy 1 / DRR for a unit
/// direct path: sigma = sqrt(2 exp(2 n_d / tau) / (tau DRR_lin)).
double sigma_from_drr(double drr_db, double tau, std::size_t n_d);

/// Reverberant-tail energy of the continuous Polack envelope past n_d:
/// sigma^2 (tau / 2) exp(-2 n_d / tau).
double polack_tail_energy(double sigma, double tau, std::size_t n_d);

/// Shortest admissible RIR: max(n_d + 1, ceil(tau ln 1000)).
std::size_t min_rir_length(const AcousticParams& params);

/// Parameters of one Polack draw.
struct PolackDraw {
  double sigma;
  double tau;
  std::uint64_t seed;
};

PolackDraw polack_draw(const AcousticParams& params, std::uint64_t seed);

/// h(0) = 1, h(1..n_d) = 0, h(n) = b(n) exp(-n / tau) for n > n_d.
/// Deterministic in `seed`. Throws std::invalid_argument when `length` is
/// below min_rir_length(params).
Rir sample_rir(const AcousticParams& params, std::size_t length, std::uint64_t seed);

/// Schroeder backward integral of h^2: edc(t) = sum_{u >= t} h(u)^2.
std::vector<double> edc(std::span<const double> h);

struct EdcAnalysis {
  std::vector<double> edc;
  std::size_t t5 = 0;    // first index at or below -5 dB re. EDC(n_d + 1)
  std::size_t t25 = 0;   // first index at or below -25 dB
  double e_5_25 = 0.0;   // EDC(t5) - EDC(t25)
  double rt60_est = 0.0;
  double sigma_est = 0.0;
  double drr_est_db = 0.0;
};

/// Non-blind analysis: RT60 from the least-squares slope of the EDC in dB
/// over [t5, t25]; sigma from the energy in that window; DRR from the direct
/// energy sum_{n <= n_d} h^2 against the modeled tail energy.
/// Throws std::invalid_argument if the EDC never falls 25 dB below its level
/// just after the direct path.
EdcAnalysis analyze_rir(const Rir& h, std::size_t n_d);

/// Source of RIR draws. Each draw is a pure function of its seed.
class RirSampler {
 public:
  virtual ~RirSampler() = default;
  virtual Rir draw(std::uint64_t seed) const = 0;
  /// True when every draw returns the same RIR.
  virtual bool deterministic() const { return false; }
  virtual double sample_rate() const = 0;
};

class PolackSampler final : public RirSampler {
 public:
  /// length 0 selects min_rir_length(params).
  explicit PolackSampler(AcousticParams params, std::size_t length = 0);
  Rir draw(std::uint64_t seed) const override;
  double sample_rate() const override { return params_.sample_rate; }
  const AcousticParams& params() const { return params_; }
  std::size_t length() const { return length_; }

 private:
  AcousticParams params_;
  std::size_t length_;
};

/// Degenerate sampler returning a fixed RIR on every draw.
class DiracSampler final : public RirSampler {
 public:
  explicit DiracSampler(Rir h);
  Rir draw(std::uint64_t) const override { return h_; }
  bool deterministic() const override { return true; }
  double sample_rate() const override { return h_.sample_rate; }
  const Rir& rir() const { return h_; }

 private:
  Rir h_;
};

std::shared_ptr<const RirSampler> dirac_sampler(Rir h);

/// One tap per line, shortest round-trip decimal.
void write_rir_text(const std::filesystem::path& path, const Rir& h);
Rir read_rir_text(const std::filesystem::path& path, double sample_rate = kDefaultSampleRate);

/// Loads a RIR from .wav (float32 or PCM16) or any other extension as text.
Rir load_rir(const std::filesystem::path& path);

}  // namespace reverbmatch
