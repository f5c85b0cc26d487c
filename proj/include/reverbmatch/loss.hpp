#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string_view>

#include "reverbmatch/keyvalue.hpp"
#include "reverbmatch/rir.hpp"
#include "reverbmatch/signal.hpp"
#include "reverbmatch/tfconv.hpp"

namespace reverbmatch {

/// Monte-Carlo strategies for the expectation over RIR draws.
enum class LossVariant {
  single,   // one draw
  average,  // mean over I draws
  best,     // draw with the lowest loss; gradient through that draw only
};

std::string_view to_string(LossVariant variant);
LossVariant parse_loss_variant(std::string_view text);

inline constexpr std::size_t kDefaultNumDraws = 10;

struct LossConfig {
  LossVariant variant = LossVariant::single;
  std::size_t num_draws = 1;  // I
  BandRadius band_radius{kDefaultBandRadius};
  /// When false, alpha is forced to 0 and only the complex term drives the
  /// total and its gradient.
  bool use_mag_term = true;

  /// I >= 1 and single => I == 1.
  void validate() const;
};

struct LossReport {
  double l_complex = 0.0;
  double l_mag = 0.0;
  double alpha = 0.0;
  double total = 0.0;  // l_complex + alpha * l_mag
  std::optional<std::size_t> selected_draw;

  KeyValueRecord to_record() const;
};

/// Thrown when the log-magnitude gradient vanishes and the two terms cannot be
/// balanced.
class DegenerateBalance : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// ||Y - Yhat||_F^2 over the full band.
double loss_complex(const Spectrogram& y, const Spectrogram& y_hat);

/// ||log(1 + |Y|) - log(1 + |Yhat|)||_F^2.
double loss_mag(const Spectrogram& y, const Spectrogram& y_hat);

// Gradients with respect to Yhat, as dL/dRe + i dL/dIm.
Spectrogram loss_complex_grad(const Spectrogram& y, const Spectrogram& y_hat);
/// Bins with |Yhat| = 0 get a zero gradient.
Spectrogram loss_mag_grad(const Spectrogram& y, const Spectrogram& y_hat);

/// alpha = ||dL_C/dYhat||_F / ||dL_MAG/dYhat||_F. Throws DegenerateBalance
/// when the denominator is zero.
double gradnorm_alpha(const Spectrogram& y, const Spectrogram& y_hat);

/// Reverberation-matching objective
///   L = L_C(Y, C(Shat, h)) + alpha L_MAG(Y, C(Shat, h)),  h ~ sampler,
/// with C(Shat, h) cropped or zero-extended to Y's frame count.
///
/// Draw i uses seed derive_seed(seed, streams::kLossDraw, i). For `average`,
/// alpha balances the gradients of the draw-averaged terms; for `single` and
/// `best` it is computed per draw. Reductions run in draw order, so results do
/// not depend on the thread count. Deterministic samplers get their kernel
/// built once at construction.
class ReverbMatchingLoss {
 public:
  ReverbMatchingLoss(std::shared_ptr<const RirSampler> sampler, std::shared_ptr<const StftConfig> config,
                     LossConfig cfg);

  /// `grad`, when non-null, receives dL/dShat (same shape as s_hat).
  /// `fallback_alpha` replaces alpha when the balance is degenerate.
  LossReport evaluate(const Spectrogram& y, const Spectrogram& s_hat, std::uint64_t seed,
                      Spectrogram* grad = nullptr, double fallback_alpha = 1.0) const;

  const LossConfig& config() const { return cfg_; }

 private:
  std::shared_ptr<const RirSampler> sampler_;
  KernelBuilder builder_;
  LossConfig cfg_;
  std::shared_ptr<const ConvKernel> fixed_kernel_;
};

LossReport rm_loss(const Spectrogram& y, const Spectrogram& s_hat, std::shared_ptr<const RirSampler> sampler,
                   const LossConfig& cfg, std::uint64_t seed, Spectrogram* grad = nullptr);

}  // namespace reverbmatch
