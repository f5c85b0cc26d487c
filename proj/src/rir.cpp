#include "reverbmatch/rir.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "reverbmatch/seeding.hpp"
#include "reverbmatch/wav.hpp"

namespace reverbmatch {
namespace {

const double kLn10 = std::numbers::ln10;

}  // namespace

std::string_view to_string(NoiseMode mode) {
  return mode == NoiseMode::half_normal ? "half-normal" : "centered-gaussian";
}

NoiseMode parse_noise_mode(std::string_view text) {
  if (text == "centered-gaussian" || text == "gaussian" || text == "centered")
    return NoiseMode::centered_gaussian;
  if (text == "half-normal") return NoiseMode::half_normal;
  throw std::invalid_argument("unknown noise mode '" + std::string(text) +
                              "' (expected centered-gaussian or half-normal)");
}

void AcousticParams::validate() const {
  if (!(rt60 > 0.0) || !std::isfinite(rt60)) throw std::invalid_argument("AcousticParams: rt60 must be > 0");
  if (!std::isfinite(drr_db)) throw std::invalid_argument("AcousticParams: drr_db must be finite");
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate))
    throw std::invalid_argument("AcousticParams: sample_rate must be > 0");
}

KeyValueRecord AcousticParams::to_record() const {
  KeyValueRecord r;
  r.set("rt60", rt60);
  r.set("drr_db", drr_db);
  r.set("n_d", n_d);
  r.set("sample_rate", sample_rate);
  r.set("noise_mode", std::string(to_string(noise_mode)));
  return r;
}

AcousticParams AcousticParams::from_record(const KeyValueRecord& record) {
  AcousticParams p;
  p.rt60 = record.get_double("rt60");
  p.drr_db = record.get_double("drr_db");
  if (record.has("n_d")) {
    const auto n_d = record.get_int("n_d");
    if (n_d < 0) throw std::invalid_argument("AcousticParams: n_d must be >= 0");
    p.n_d = static_cast<std::size_t>(n_d);
  }
  if (record.has("sample_rate")) p.sample_rate = record.get_double("sample_rate");
  if (record.has("noise_mode")) p.noise_mode = parse_noise_mode(record.get("noise_mode"));
  p.validate();
  return p;
}

double tau_from_rt60(double rt60, double fs) {
  if (!(rt60 > 0.0) || !(fs > 0.0)) throw std::invalid_argument("tau_from_rt60: inputs must be positive");
  return rt60 * fs / (3.0 * kLn10);
}

double sigma_from_drr(double drr_db, double tau, std::size_t n_d) {
  if (!(tau > 0.0)) throw std::invalid_argument("sigma_from_drr: tau must be positive");
  const double drr_lin = std::pow(10.0, drr_db / 10.0);
  return std::sqrt(2.0 * std::exp(2.0 * static_cast<double>(n_d) / tau) / (tau * drr_lin));
}

double polack_tail_energy(double sigma, double tau, std::size_t n_d) {
  return sigma * sigma * (tau / 2.0) * std::exp(-2.0 * static_cast<double>(n_d) / tau);
}

std::size_t min_rir_length(const AcousticParams& params) {
  params.validate();
  const double tau = tau_from_rt60(params.rt60, params.sample_rate);
  const auto tail = static_cast<std::size_t>(std::ceil(tau * std::log(1000.0)));
  return std::max(params.n_d + 1, tail);
}

PolackDraw polack_draw(const AcousticParams& params, std::uint64_t seed) {
  params.validate();
  const double tau = tau_from_rt60(params.rt60, params.sample_rate);
  return {sigma_from_drr(params.drr_db, tau, params.n_d), tau, seed};
}

Rir sample_rir(const AcousticParams& params, std::size_t length, std::uint64_t seed) {
  const std::size_t needed = min_rir_length(params);
  if (length < needed)
    throw std::invalid_argument("sample_rir: length " + std::to_string(length) +
                                " too short; need at least " + std::to_string(needed) +
                                " samples to capture the reverberant tail");
  const PolackDraw d = polack_draw(params, seed);

  Rir h;
  h.sample_rate = params.sample_rate;
  h.taps.assign(length, 0.0);
  h.taps[0] = 1.0;
  std::mt19937_64 rng(derive_seed(seed, streams::kPolackNoise, 0));
  std::normal_distribution<double> normal(0.0, d.sigma);
  const bool half = params.noise_mode == NoiseMode::half_normal;
  for (std::size_t n = params.n_d + 1; n < length; ++n) {
    double b = normal(rng);
    if (half) b = std::abs(b);
    h.taps[n] = b * std::exp(-static_cast<double>(n) / d.tau);
  }
  return h;
}

std::vector<double> edc(std::span<const double> h) {
  std::vector<double> out(h.size());
  double acc = 0.0;
  for (std::size_t i = h.size(); i-- > 0;) {
    acc += h[i] * h[i];
    out[i] = acc;
  }
  return out;
}

EdcAnalysis analyze_rir(const Rir& h, std::size_t n_d) {
  if (h.taps.empty()) throw std::invalid_argument("analyze_rir: empty RIR");
  if (n_d + 1 >= h.size()) throw std::invalid_argument("analyze_rir: RIR shorter than the direct path");

  EdcAnalysis a;
  a.edc = edc(h.taps);
  const std::size_t ref_index = n_d + 1;
  const double ref = a.edc[ref_index];
  if (!(ref > 0.0)) throw std::invalid_argument("analyze_rir: insufficient dynamic range (no reverberant tail)");

  const double level5 = ref * std::pow(10.0, -0.5);
  const double level25 = ref * std::pow(10.0, -2.5);
  std::size_t t = ref_index;
  while (t < h.size() && a.edc[t] > level5) ++t;
  a.t5 = t;
  while (t < h.size() && a.edc[t] > level25) ++t;
  if (t >= h.size() || !(a.edc[t] > 0.0))
    throw std::invalid_argument("analyze_rir: insufficient dynamic range (EDC never reaches -25 dB)");
  a.t25 = t;
  if (a.t25 <= a.t5 + 1) throw std::invalid_argument("analyze_rir: decay window too short for a slope fit");

  // Least-squares line through 10 log10 EDC(t), t in [t5, t25].
  const double n = static_cast<double>(a.t25 - a.t5 + 1);
  const double t_mean = 0.5 * static_cast<double>(a.t5 + a.t25);
  double y_mean = 0.0;
  for (std::size_t i = a.t5; i <= a.t25; ++i) y_mean += 10.0 * std::log10(a.edc[i]);
  y_mean /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = a.t5; i <= a.t25; ++i) {
    const double dx = static_cast<double>(i) - t_mean;
    sxy += dx * (10.0 * std::log10(a.edc[i]) - y_mean);
    sxx += dx * dx;
  }
  const double slope = sxy / sxx;  // dB per sample
  if (!(slope < 0.0)) throw std::invalid_argument("analyze_rir: EDC slope is not decaying");
  a.rt60_est = -60.0 / (slope * h.sample_rate);

  const double tau = tau_from_rt60(a.rt60_est, h.sample_rate);
  a.e_5_25 = a.edc[a.t5] - a.edc[a.t25];
  const double window = (tau / 2.0) * (std::exp(-2.0 * static_cast<double>(a.t5) / tau) -
                                       std::exp(-2.0 * static_cast<double>(a.t25) / tau));
  a.sigma_est = std::sqrt(a.e_5_25 / window);

  double direct = 0.0;
  for (std::size_t i = 0; i <= n_d; ++i) direct += h.taps[i] * h.taps[i];
  const double tail = polack_tail_energy(a.sigma_est, tau, n_d);
  a.drr_est_db = 10.0 * std::log10(direct / tail);
  return a;
}

PolackSampler::PolackSampler(AcousticParams params, std::size_t length)
    : params_(params), length_(length == 0 ? min_rir_length(params) : length) {
  params_.validate();
  if (length_ < min_rir_length(params_))
    throw std::invalid_argument("PolackSampler: RIR length below the tail-capture minimum");
}

Rir PolackSampler::draw(std::uint64_t seed) const { return sample_rir(params_, length_, seed); }

DiracSampler::DiracSampler(Rir h) : h_(std::move(h)) {
  if (h_.taps.empty()) throw std::invalid_argument("DiracSampler: empty RIR");
  for (double v : h_.taps)
    if (!std::isfinite(v)) throw std::invalid_argument("DiracSampler: non-finite tap");
}

std::shared_ptr<const RirSampler> dirac_sampler(Rir h) { return std::make_shared<DiracSampler>(std::move(h)); }

void write_rir_text(const std::filesystem::path& path, const Rir& h) {
  std::string out;
  for (double v : h.taps) {
    out += format_double(v);
    out += '\n';
  }
  write_file_atomic(path, out);
}

Rir read_rir_text(const std::filesystem::path& path, double sample_rate) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open RIR file: " + path.string());
  Rir h;
  h.sample_rate = sample_rate;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    h.taps.push_back(parse_double(line, path.string()));
  }
  if (h.taps.empty()) throw std::invalid_argument("empty RIR file: " + path.string());
  return h;
}

Rir load_rir(const std::filesystem::path& path) {
  if (path.extension() == ".wav") {
    Signal s = read_wav(path);
    return Rir{std::move(s.samples), s.sample_rate};
  }
  return read_rir_text(path);
}

}  // namespace reverbmatch
