#include "reverbmatch/dereverb.hpp"

#include <cmath>
#include <sstream>

#include "reverbmatch/seeding.hpp"

namespace reverbmatch {
namespace {

class AdamState {
 public:
  AdamState(std::size_t n, const SolverConfig& cfg) : m_(n), v_(2 * n, 0.0), cfg_(cfg) {}

  void step(std::span<Complex> x, std::span<const Complex> g) {
    ++t_;
    const double b1 = cfg_.adam_beta1, b2 = cfg_.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t i = 0; i < x.size(); ++i) {
      m_[i] = b1 * m_[i] + (1.0 - b1) * g[i];
      const double gr = g[i].real(), gi = g[i].imag();
      v_[2 * i] = b2 * v_[2 * i] + (1.0 - b2) * gr * gr;
      v_[2 * i + 1] = b2 * v_[2 * i + 1] + (1.0 - b2) * gi * gi;
      const double dr = (m_[i].real() / c1) / (std::sqrt(v_[2 * i] / c2) + cfg_.adam_eps);
      const double di = (m_[i].imag() / c1) / (std::sqrt(v_[2 * i + 1] / c2) + cfg_.adam_eps);
      x[i] -= cfg_.step_size * Complex(dr, di);
    }
  }

 private:
  std::vector<Complex> m_;
  std::vector<double> v_;
  const SolverConfig& cfg_;
  std::size_t t_ = 0;
};

}  // namespace

std::string_view to_string(StepRule rule) { return rule == StepRule::fixed ? "fixed" : "adam"; }

StepRule parse_step_rule(std::string_view text) {
  if (text == "fixed" || text == "gd") return StepRule::fixed;
  if (text == "adam") return StepRule::adam;
  throw std::invalid_argument("unknown step rule '" + std::string(text) + "' (expected fixed or adam)");
}

void SolverConfig::validate() const {
  if (max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters must be >= 1");
  if (!(step_size > 0.0) || !std::isfinite(step_size))
    throw std::invalid_argument("SolverConfig: step_size must be > 0");
  if (!(stop_rel_tol >= 0.0)) throw std::invalid_argument("SolverConfig: stop_rel_tol must be >= 0");
  if (stop_window < 1) throw std::invalid_argument("SolverConfig: stop_window must be >= 1");
  if (!(divergence_factor > 1.0)) throw std::invalid_argument("SolverConfig: divergence_factor must be > 1");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    throw std::invalid_argument("SolverConfig: Adam betas must lie in [0, 1)");
  if (!(adam_eps > 0.0)) throw std::invalid_argument("SolverConfig: adam_eps must be > 0");
  loss.validate();
}

KeyValueRecord SolverConfig::to_record() const {
  KeyValueRecord r;
  r.set("max_iters", max_iters);
  r.set("step_rule", std::string(to_string(step_rule)));
  r.set("step_size", step_size);
  r.set("stop_rel_tol", stop_rel_tol);
  r.set("stop_window", stop_window);
  r.set("variant", std::string(to_string(loss.variant)));
  r.set("draws", loss.num_draws);
  r.set("band_radius", loss.band_radius.to_string());
  r.set("use_mag_term", loss.use_mag_term);
  r.set("seed", std::to_string(seed));
  return r;
}

SolverConfig SolverConfig::from_record(const KeyValueRecord& record) {
  auto count = [&](std::string_view key) {
    const auto v = record.get_int(key);
    if (v < 0) throw std::invalid_argument(std::string(key) + " must be >= 0");
    return static_cast<std::size_t>(v);
  };
  SolverConfig c;
  if (record.has("max_iters")) c.max_iters = count("max_iters");
  if (record.has("step_rule")) c.step_rule = parse_step_rule(record.get("step_rule"));
  if (record.has("step_size")) c.step_size = record.get_double("step_size");
  if (record.has("stop_rel_tol")) c.stop_rel_tol = record.get_double("stop_rel_tol");
  if (record.has("stop_window")) c.stop_window = count("stop_window");
  if (record.has("variant")) c.loss.variant = parse_loss_variant(record.get("variant"));
  if (record.has("draws")) c.loss.num_draws = count("draws");
  if (record.has("band_radius")) c.loss.band_radius = BandRadius::parse(record.get("band_radius"));
  if (record.has("use_mag_term")) c.loss.use_mag_term = record.get_int("use_mag_term") != 0;
  if (record.has("seed")) c.seed = std::stoull(record.get("seed"));
  c.validate();
  return c;
}

std::string SolveTrace::to_records() const {
  std::ostringstream out;
  for (const auto& r : records) {
    out << "iter=" << r.iter << " l_complex=" << format_double(r.report.l_complex)
        << " l_mag=" << format_double(r.report.l_mag) << " alpha=" << format_double(r.report.alpha)
        << " total=" << format_double(r.report.total) << '\n';
  }
  return out.str();
}

SolveResult trainingless_dereverb(const Spectrogram& y, std::shared_ptr<const RirSampler> sampler,
                                  const SolverConfig& cfg) {
  cfg.validate();
  if (y.num_frames() == 0) throw std::invalid_argument("trainingless_dereverb: empty observation");
  for (const Complex& v : y.data())
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw std::invalid_argument("trainingless_dereverb: non-finite observation");

  const ReverbMatchingLoss loss(std::move(sampler), y.config_ptr(), cfg.loss);

  const double energy = frobenius_norm_squared(y);
  const double rms = std::sqrt(energy / static_cast<double>(y.size()));
  const double scale = rms > 0.0 ? rms : 1.0;
  const Spectrogram y_n = (1.0 / scale) * y;
  const double energy_n = frobenius_norm_squared(y_n);

  Spectrogram s = y_n;
  Spectrogram best = s;
  Spectrogram grad;
  SolveTrace trace;
  trace.scale = scale;
  double alpha = 1.0;
  AdamState adam(s.size(), cfg);

  for (std::size_t k = 0; k < cfg.max_iters; ++k) {
    const LossReport report = loss.evaluate(y_n, s, derive_seed(cfg.seed, streams::kSolverIter, k), &grad, alpha);
    alpha = report.alpha;
    trace.records.push_back({k, report});
    if (!std::isfinite(report.total))
      throw SolverDiverged("trainingless_dereverb: non-finite loss at iteration " + std::to_string(k));

    const double initial = trace.records.front().report.total;
    if (k == 0 || report.total < trace.final_report.total) {
      trace.final_report = report;
      trace.best_iter = k;
      if (k > 0) best = s;
    }
    if (k > 0 && report.total > cfg.divergence_factor * initial) {
      std::ostringstream msg;
      msg << "trainingless_dereverb: diverged at iteration " << k << " (loss " << report.total
          << " > " << cfg.divergence_factor << " x initial " << initial << "); reduce step_size";
      throw SolverDiverged(msg.str());
    }
    if (k == 0 && report.total <= 1e-12 * energy_n) break;
    if (k >= cfg.stop_window) {
      const double before = trace.records[k - cfg.stop_window].report.total;
      if (before > 0.0 && (before - report.total) / before < cfg.stop_rel_tol) break;
    }
    if (k + 1 == cfg.max_iters) break;

    if (cfg.step_rule == StepRule::adam) {
      adam.step(s.data(), grad.data());
    } else {
      auto x = s.data();
      auto g = grad.data();
      for (std::size_t i = 0; i < x.size(); ++i) x[i] -= cfg.step_size * g[i];
    }
  }

  trace.iterations_used = trace.records.size();
  best *= scale;
  return {std::move(best), std::move(trace)};
}

SolveResult trainingless_dereverb(const Spectrogram& y, const AcousticParams& params, const SolverConfig& cfg) {
  return trainingless_dereverb(y, std::make_shared<PolackSampler>(params), cfg);
}

}  // namespace reverbmatch
