#include "reverbmatch/blind.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "reverbmatch/parallel.hpp"
#include "reverbmatch/seeding.hpp"

namespace reverbmatch {
namespace {

// Slope of the least-squares line through (i, v[i]).
double line_slope(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  const double x_mean = 0.5 * (n - 1.0);
  double y_mean = 0.0;
  for (double y : v) y_mean += y;
  y_mean /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double dx = static_cast<double>(i) - x_mean;
    sxy += dx * (v[i] - y_mean);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace

void DecayAnalysisConfig::validate() const {
  if (num_subbands < 1) throw std::invalid_argument("DecayAnalysisConfig: num_subbands must be >= 1");
  if (min_run < 2) throw std::invalid_argument("DecayAnalysisConfig: min_run must be >= 2");
  if (!(floor_db > 0.0)) throw std::invalid_argument("DecayAnalysisConfig: floor_db must be > 0");
  if (!(min_drop_db >= 0.0)) throw std::invalid_argument("DecayAnalysisConfig: min_drop_db must be >= 0");
}

double raw_decay_estimate(const Spectrogram& y, const DecayAnalysisConfig& cfg) {
  cfg.validate();
  const std::size_t half = y.num_bins() / 2;
  if (half < cfg.num_subbands) throw std::invalid_argument("raw_decay_estimate: more subbands than bins");
  const std::size_t frames = y.num_frames();

  // Subband log-energy, [band][frame].
  std::vector<std::vector<double>> level(cfg.num_subbands, std::vector<double>(frames));
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < cfg.num_subbands; ++b) {
    const std::size_t lo = 1 + b * half / cfg.num_subbands;
    const std::size_t hi = 1 + (b + 1) * half / cfg.num_subbands;
    for (std::size_t t = 0; t < frames; ++t) {
      double e = 0.0;
      for (std::size_t f = lo; f < hi; ++f) e += std::norm(y(f, t));
      level[b][t] = e > 0.0 ? 10.0 * std::log10(e) : -std::numeric_limits<double>::infinity();
      peak = std::max(peak, level[b][t]);
    }
  }
  if (!std::isfinite(peak)) throw InsufficientDecayEvidence();

  const double floor = peak - cfg.floor_db;
  const double frame_rate = y.sample_rate() / static_cast<double>(y.config().hop());
  std::vector<double> decay_times;
  for (const auto& v : level) {
    std::size_t start = 0;
    while (start < frames) {
      if (!(v[start] > floor)) {
        ++start;
        continue;
      }
      std::size_t end = start + 1;
      while (end < frames && v[end] > floor && v[end] < v[end - 1]) ++end;
      if (end - start >= cfg.min_run && v[start] - v[end - 1] >= cfg.min_drop_db) {
        const double slope = line_slope({v.data() + start, end - start}) * frame_rate;  // dB per second
        decay_times.push_back(-60.0 / slope);
      }
      start = end;
    }
  }
  if (decay_times.empty()) throw InsufficientDecayEvidence();

  const std::size_t mid = decay_times.size() / 2;
  std::nth_element(decay_times.begin(), decay_times.begin() + mid, decay_times.end());
  double median = decay_times[mid];
  if (decay_times.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(decay_times.begin(), decay_times.begin() + mid));
  }
  return median;
}

PolynomialFit fit_polynomial(std::span<const double> x, std::span<const double> y, std::size_t order) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_polynomial: x and y differ in length");
  const std::size_t cols = order + 1;
  if (x.size() < cols) throw std::invalid_argument("fit_polynomial: fewer points than coefficients");

  Eigen::MatrixXd a(x.size(), cols);
  Eigen::VectorXd b(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw std::invalid_argument("fit_polynomial: non-finite data");
    double p = 1.0;
    for (std::size_t j = 0; j < cols; ++j) {
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = p;
      p *= x[i];
    }
    b(static_cast<Eigen::Index>(i)) = y[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < static_cast<Eigen::Index>(cols)) throw std::invalid_argument("fit_polynomial: degenerate design matrix");
  const Eigen::VectorXd c = qr.solve(b);

  PolynomialFit fit;
  fit.coeffs.assign(c.data(), c.data() + c.size());
  fit.residual = std::sqrt((a * c - b).squaredNorm() / static_cast<double>(x.size()));
  return fit;
}

KeyValueRecord Rt60Calibration::to_record() const {
  KeyValueRecord r;
  r.set("c0", c0);
  r.set("c1", c1);
  r.set("c2", c2);
  r.set("residual", residual);
  r.set("n_pairs", n_pairs);
  r.set("raw_min", raw_min);
  r.set("raw_max", raw_max);
  return r;
}

Rt60Calibration Rt60Calibration::from_record(const KeyValueRecord& record) {
  Rt60Calibration c;
  c.c0 = record.get_double("c0");
  c.c1 = record.get_double("c1");
  c.c2 = record.get_double("c2");
  if (record.has("residual")) c.residual = record.get_double("residual");
  if (record.has("n_pairs")) c.n_pairs = static_cast<std::size_t>(std::max<std::int64_t>(0, record.get_int("n_pairs")));
  if (record.has("raw_min")) c.raw_min = record.get_double("raw_min");
  if (record.has("raw_max")) c.raw_max = record.get_double("raw_max");
  if (!std::isfinite(c.c0) || !std::isfinite(c.c1) || !std::isfinite(c.c2))
    throw std::invalid_argument("Rt60Calibration: non-finite coefficient");
  return c;
}

void Rt60Calibration::save(const std::filesystem::path& path) const { write_file_atomic(path, to_record().to_string()); }

Rt60Calibration Rt60Calibration::load(const std::filesystem::path& path) {
  return from_record(KeyValueRecord::load(path));
}

Rt60Calibration calibrate_rt60_raw(std::span<const double> raw, std::span<const double> rt60) {
  if (raw.size() != rt60.size()) throw std::invalid_argument("calibrate_rt60: raw and rt60 differ in length");
  if (raw.size() < 3) throw std::invalid_argument("insufficient calibration data: need at least 3 pairs");
  const PolynomialFit fit = fit_polynomial(raw, rt60, 2);
  Rt60Calibration c;
  c.c0 = fit.coeffs[0];
  c.c1 = fit.coeffs[1];
  c.c2 = fit.coeffs[2];
  c.residual = fit.residual;
  c.n_pairs = raw.size();
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  c.raw_min = *lo;
  c.raw_max = *hi;
  return c;
}

Rt60Calibration calibrate_rt60(std::span<const std::pair<Spectrogram, double>> pairs, const DecayAnalysisConfig& cfg) {
  if (pairs.size() < 3) throw std::invalid_argument("insufficient calibration data: need at least 3 pairs");
  std::vector<double> raw(pairs.size()), rt60(pairs.size());
  parallel_for(0, pairs.size(), [&](std::size_t i) {
    raw[i] = raw_decay_estimate(pairs[i].first, cfg);
    rt60[i] = pairs[i].second;
  });
  return calibrate_rt60_raw(raw, rt60);
}

void DrrSearchConfig::validate() const {
  if (grid_db.empty()) throw std::invalid_argument("DrrSearchConfig: empty DRR grid");
  for (double g : grid_db)
    if (!std::isfinite(g)) throw std::invalid_argument("DrrSearchConfig: non-finite grid point");
  if (inner_iters < 1) throw std::invalid_argument("DrrSearchConfig: inner_iters must be >= 1");
  if (!(tie_rel_tol >= 0.0)) throw std::invalid_argument("DrrSearchConfig: tie_rel_tol must be >= 0");
}

DrrSearchResult blind_drr_search(const Spectrogram& y, double rt60, const DrrSearchConfig& cfg) {
  cfg.validate();
  DrrSearchResult result;
  if (cfg.grid_db.size() == 1) {
    result.drr_db = cfg.grid_db.front();
    result.losses.assign(1, 0.0);
    return result;
  }

  SolverConfig solver = cfg.solver;
  solver.max_iters = cfg.inner_iters;
  solver.seed = derive_seed(cfg.seed, streams::kDrrGrid, 0);

  result.losses.resize(cfg.grid_db.size());
  parallel_for(0, cfg.grid_db.size(), [&](std::size_t i) {
    AcousticParams p;
    p.rt60 = rt60;
    p.drr_db = cfg.grid_db[i];
    p.n_d = cfg.n_d;
    p.sample_rate = y.sample_rate();
    p.noise_mode = cfg.noise_mode;
    result.losses[i] = trainingless_dereverb(y, p, solver).trace.best_total();
  });

  const double best = *std::min_element(result.losses.begin(), result.losses.end());
  const double limit = best + cfg.tie_rel_tol * std::abs(best);
  bool found = false;
  for (std::size_t i = 0; i < cfg.grid_db.size(); ++i) {
    if (result.losses[i] > limit) continue;
    if (!found || cfg.grid_db[i] < result.drr_db) {
      result.drr_db = cfg.grid_db[i];
      result.index = i;
      found = true;
    }
  }
  return result;
}

double blind_drr(const Spectrogram& y, double rt60, const DrrSearchConfig& cfg) {
  return blind_drr_search(y, rt60, cfg).drr_db;
}

KeyValueRecord BlindEstimate::to_record() const {
  KeyValueRecord r;
  r.set("rt60", rt60);
  r.set("drr_db", drr_db);
  r.set("raw_median_decay", raw_median_decay);
  r.set("rm_loss_at_estimate", rm_loss_at_estimate);
  r.set("flagged", flagged);
  if (flagged) r.set("reason", reason);
  return r;
}

BlindEstimate analyze_blind(const Spectrogram& y, const Rt60Calibration& cal, const BlindConfig& cfg) {
  cfg.drr.validate();
  BlindEstimate est;
  auto flag = [&](std::string reason) {
    est.flagged = true;
    est.reason = std::move(reason);
    est.rt60 = std::max(est.rt60, cfg.rt60_floor);
    est.drr_db = *std::max_element(cfg.drr.grid_db.begin(), cfg.drr.grid_db.end());
    return est;
  };
  try {
    est.raw_median_decay = raw_decay_estimate(y, cfg.decay);
  } catch (const InsufficientDecayEvidence& e) {
    return flag(e.what());
  }
  est.rt60 = cal.map(est.raw_median_decay);
  if (!(est.rt60 >= cfg.rt60_floor)) return flag("rt60 below floor");
  if (cal.n_pairs > 0 && est.raw_median_decay < cal.raw_min) return flag("raw decay below calibrated range");

  const DrrSearchResult drr = blind_drr_search(y, est.rt60, cfg.drr);
  est.drr_db = drr.drr_db;
  est.rm_loss_at_estimate = drr.losses[drr.index];
  return est;
}

}  // namespace reverbmatch
