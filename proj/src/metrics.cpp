#include "reverbmatch/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace reverbmatch {

SisdrResult sisdr(std::span<const double> est, std::span<const double> ref) {
  if (est.size() != ref.size()) throw std::invalid_argument("sisdr: estimate and reference differ in length");
  double dot = 0.0, ref_energy = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    dot += est[i] * ref[i];
    ref_energy += ref[i] * ref[i];
  }
  if (!(ref_energy > 0.0)) throw std::invalid_argument("sisdr: zero reference");
  const double a = dot / ref_energy;
  double target = 0.0, residual = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double t = a * ref[i];
    target += t * t;
    residual += (est[i] - t) * (est[i] - t);
  }
  if (residual == 0.0 && a > 0.0) return {kSisdrCapDb, true};
  if (!(target > 0.0)) return {-kSisdrCapDb, false};
  const double db = 10.0 * std::log10(target / residual);
  return {std::min(db, kSisdrCapDb), false};
}

SisdrResult sisdr(const Signal& est, const Signal& ref) { return sisdr(est.samples, ref.samples); }

KeyValueRecord MetricReport::to_record() const {
  KeyValueRecord r;
  if (sisdr) {
    r.set("sisdr_db", sisdr->db);
    r.set("sisdr_perfect", sisdr->perfect);
  }
  if (rt60_abs_err_s) r.set("rt60_abs_err_s", *rt60_abs_err_s);
  if (drr_abs_err_db) r.set("drr_abs_err_db", *drr_abs_err_db);
  return r;
}

MetricReport param_errors(const BlindEstimate& est, const AcousticParams& truth) {
  MetricReport m;
  m.rt60_abs_err_s = std::abs(est.rt60 - truth.rt60);
  m.drr_abs_err_db = std::abs(est.drr_db - truth.drr_db);
  return m;
}

MetricReport param_errors(const EdcAnalysis& est, const AcousticParams& truth) {
  MetricReport m;
  m.rt60_abs_err_s = std::abs(est.rt60_est - truth.rt60);
  m.drr_abs_err_db = std::abs(est.drr_est_db - truth.drr_db);
  return m;
}

MetricReport mean_report(std::span<const MetricReport> reports) {
  double sisdr_sum = 0.0, rt_sum = 0.0, drr_sum = 0.0;
  std::size_t n_sisdr = 0, n_rt = 0, n_drr = 0;
  bool all_perfect = true;
  for (const auto& r : reports) {
    if (r.sisdr) {
      sisdr_sum += r.sisdr->db;
      all_perfect = all_perfect && r.sisdr->perfect;
      ++n_sisdr;
    }
    if (r.rt60_abs_err_s) {
      rt_sum += *r.rt60_abs_err_s;
      ++n_rt;
    }
    if (r.drr_abs_err_db) {
      drr_sum += *r.drr_abs_err_db;
      ++n_drr;
    }
  }
  MetricReport m;
  if (n_sisdr) m.sisdr = SisdrResult{sisdr_sum / static_cast<double>(n_sisdr), all_perfect};
  if (n_rt) m.rt60_abs_err_s = rt_sum / static_cast<double>(n_rt);
  if (n_drr) m.drr_abs_err_db = drr_sum / static_cast<double>(n_drr);
  return m;
}

}  // namespace reverbmatch
