#include "reverbmatch/loss.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "reverbmatch/parallel.hpp"
#include "reverbmatch/seeding.hpp"

namespace reverbmatch {
namespace {

void require_same_shape(const Spectrogram& a, const Spectrogram& b, const char* who) {
  if (!a.same_shape(b)) throw std::invalid_argument(std::string(who) + ": shape mismatch");
}

// Per-draw quantities. `adj_c` and `adj_m` are the adjoint images of the two
// output-space gradients, filled only when a gradient is requested.
struct DrawResult {
  double l_complex = 0.0;
  double l_mag = 0.0;
  double grad_c_sq = 0.0;
  double grad_m_sq = 0.0;
  Spectrogram adj_c, adj_m;
};

double running_mean(double mean, double value, std::size_t count) {
  return mean + (value - mean) / static_cast<double>(count);
}

}  // namespace

std::string_view to_string(LossVariant variant) {
  switch (variant) {
    case LossVariant::single: return "single";
    case LossVariant::average: return "average";
    case LossVariant::best: return "best";
  }
  return "single";
}

LossVariant parse_loss_variant(std::string_view text) {
  if (text == "single") return LossVariant::single;
  if (text == "average" || text == "avg") return LossVariant::average;
  if (text == "best") return LossVariant::best;
  throw std::invalid_argument("unknown loss variant '" + std::string(text) + "' (expected single, average or best)");
}

void LossConfig::validate() const {
  if (num_draws < 1) throw std::invalid_argument("LossConfig: num_draws must be >= 1");
  if (variant == LossVariant::single && num_draws != 1)
    throw std::invalid_argument("LossConfig: the single variant uses exactly one draw");
}

KeyValueRecord LossReport::to_record() const {
  KeyValueRecord r;
  r.set("l_complex", l_complex);
  r.set("l_mag", l_mag);
  r.set("alpha", alpha);
  r.set("total", total);
  if (selected_draw)
    r.set("selected_draw", *selected_draw);
  else
    r.set("selected_draw", "none");
  return r;
}

double loss_complex(const Spectrogram& y, const Spectrogram& y_hat) {
  require_same_shape(y, y_hat, "loss_complex");
  double acc = 0.0;
  auto a = y.data();
  auto b = y_hat.data();
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::norm(a[i] - b[i]);
  return acc;
}

double loss_mag(const Spectrogram& y, const Spectrogram& y_hat) {
  require_same_shape(y, y_hat, "loss_mag");
  double acc = 0.0;
  auto a = y.data();
  auto b = y_hat.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::log1p(std::abs(a[i])) - std::log1p(std::abs(b[i]));
    acc += d * d;
  }
  return acc;
}

Spectrogram loss_complex_grad(const Spectrogram& y, const Spectrogram& y_hat) {
  require_same_shape(y, y_hat, "loss_complex_grad");
  Spectrogram g(y_hat.config_ptr(), y_hat.num_frames(), y_hat.sample_rate());
  auto a = y.data();
  auto b = y_hat.data();
  auto out = g.data();
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = 2.0 * (b[i] - a[i]);
  return g;
}

Spectrogram loss_mag_grad(const Spectrogram& y, const Spectrogram& y_hat) {
  require_same_shape(y, y_hat, "loss_mag_grad");
  Spectrogram g(y_hat.config_ptr(), y_hat.num_frames(), y_hat.sample_rate());
  auto a = y.data();
  auto b = y_hat.data();
  auto out = g.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double mag = std::abs(b[i]);
    if (mag == 0.0) continue;
    const double d = std::log1p(std::abs(a[i])) - std::log1p(mag);
    out[i] = (-2.0 * d / ((1.0 + mag) * mag)) * b[i];
  }
  return g;
}

double gradnorm_alpha(const Spectrogram& y, const Spectrogram& y_hat) {
  const double gm = frobenius_norm(loss_mag_grad(y, y_hat));
  if (!(gm > 0.0)) throw DegenerateBalance("gradnorm_alpha: log-magnitude gradient is zero");
  return frobenius_norm(loss_complex_grad(y, y_hat)) / gm;
}

ReverbMatchingLoss::ReverbMatchingLoss(std::shared_ptr<const RirSampler> sampler,
                                       std::shared_ptr<const StftConfig> config, LossConfig cfg)
    : sampler_(std::move(sampler)), builder_(std::move(config), cfg.band_radius), cfg_(cfg) {
  if (!sampler_) throw std::invalid_argument("ReverbMatchingLoss: null sampler");
  cfg_.validate();
  if (sampler_->deterministic()) fixed_kernel_ = std::make_shared<const ConvKernel>(builder_.build(sampler_->draw(0)));
}

LossReport ReverbMatchingLoss::evaluate(const Spectrogram& y, const Spectrogram& s_hat, std::uint64_t seed,
                                        Spectrogram* grad, double fallback_alpha) const {
  if (s_hat.num_frames() == 0) throw std::invalid_argument("ReverbMatchingLoss: empty dry estimate");
  if (y.num_frames() == 0) throw std::invalid_argument("ReverbMatchingLoss: empty observation");
  if (s_hat.num_bins() != y.num_bins() || !(s_hat.config() == y.config()))
    throw std::invalid_argument("ReverbMatchingLoss: observation and estimate use different STFT configs");
  if (sampler_->sample_rate() != y.sample_rate())
    throw std::invalid_argument("ReverbMatchingLoss: sampler rate " + std::to_string(sampler_->sample_rate()) +
                                " Hz differs from the observation rate " + std::to_string(y.sample_rate()) + " Hz");

  const std::size_t draws = cfg_.num_draws;
  const bool want_grad = grad != nullptr;
  std::vector<DrawResult> results(draws);

  auto run_draw = [&](std::size_t i) {
    std::shared_ptr<const ConvKernel> kernel = fixed_kernel_;
    if (!kernel) {
      const Rir h = sampler_->draw(derive_seed(seed, streams::kLossDraw, i));
      kernel = std::make_shared<const ConvKernel>(builder_.build(h));
    }
    const Spectrogram y_hat = apply(*kernel, s_hat, y.num_frames());
    DrawResult& r = results[i];
    r.l_complex = loss_complex(y, y_hat);
    r.l_mag = loss_mag(y, y_hat);
    const Spectrogram gc = loss_complex_grad(y, y_hat);
    const Spectrogram gm = loss_mag_grad(y, y_hat);
    r.grad_c_sq = frobenius_norm_squared(gc);
    r.grad_m_sq = frobenius_norm_squared(gm);
    if (want_grad) {
      r.adj_c = apply_adjoint(*kernel, gc, s_hat.num_frames());
      r.adj_m = apply_adjoint(*kernel, gm, s_hat.num_frames());
    }
  };

  if (fixed_kernel_) {
    // Every draw is the same RIR.
    run_draw(0);
    for (std::size_t i = 1; i < draws; ++i) results[i] = results[0];
  } else {
    parallel_for(0, draws, run_draw);
  }

  auto balance = [&](double grad_c_sq, double grad_m_sq) {
    if (!cfg_.use_mag_term) return 0.0;
    if (!(grad_m_sq > 0.0)) return fallback_alpha;
    const double a = std::sqrt(grad_c_sq) / std::sqrt(grad_m_sq);
    return std::isfinite(a) ? a : fallback_alpha;
  };
  auto combine = [&](const DrawResult& r, double alpha) {
    Spectrogram g = r.adj_c;
    if (alpha != 0.0) {
      auto dst = g.data();
      auto src = r.adj_m.data();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += alpha * src[k];
    }
    return g;
  };

  LossReport report;
  if (cfg_.variant == LossVariant::average) {
    double mc = 0.0, mm = 0.0, msc = 0.0, msm = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
      mc = running_mean(mc, results[i].l_complex, i + 1);
      mm = running_mean(mm, results[i].l_mag, i + 1);
      msc = running_mean(msc, results[i].grad_c_sq, i + 1);
      msm = running_mean(msm, results[i].grad_m_sq, i + 1);
    }
    report.l_complex = mc;
    report.l_mag = mm;
    report.alpha = balance(msc, msm);
    report.total = mc + report.alpha * mm;
    if (want_grad) {
      Spectrogram mean(s_hat.config_ptr(), s_hat.num_frames(), s_hat.sample_rate());
      for (std::size_t i = 0; i < draws; ++i) {
        const Spectrogram g = combine(results[i], report.alpha);
        auto dst = mean.data();
        auto src = g.data();
        const double w = 1.0 / static_cast<double>(i + 1);
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += (src[k] - dst[k]) * w;
      }
      *grad = std::move(mean);
    }
    return report;
  }

  // single and best: alpha per draw, report the lowest-loss draw (first on ties).
  std::size_t chosen = 0;
  double chosen_alpha = balance(results[0].grad_c_sq, results[0].grad_m_sq);
  double chosen_total = results[0].l_complex + chosen_alpha * results[0].l_mag;
  for (std::size_t i = 1; i < draws; ++i) {
    const double a = balance(results[i].grad_c_sq, results[i].grad_m_sq);
    const double total = results[i].l_complex + a * results[i].l_mag;
    if (total < chosen_total) {
      chosen = i;
      chosen_alpha = a;
      chosen_total = total;
    }
  }
  report.l_complex = results[chosen].l_complex;
  report.l_mag = results[chosen].l_mag;
  report.alpha = chosen_alpha;
  report.total = chosen_total;
  report.selected_draw = chosen;
  if (want_grad) *grad = combine(results[chosen], chosen_alpha);
  return report;
}

LossReport rm_loss(const Spectrogram& y, const Spectrogram& s_hat, std::shared_ptr<const RirSampler> sampler,
                   const LossConfig& cfg, std::uint64_t seed, Spectrogram* grad) {
  return ReverbMatchingLoss(std::move(sampler), y.config_ptr(), cfg).evaluate(y, s_hat, seed, grad);
}

}  // namespace reverbmatch
