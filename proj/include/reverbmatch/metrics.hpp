#pragma once

#include <optional>
#include <span>

#include "reverbmatch/blind.hpp"
#include "reverbmatch/keyvalue.hpp"
#include "reverbmatch/rir.hpp"
#include "reverbmatch/signal.hpp"

namespace reverbmatch {

inline constexpr double kSisdrCapDb = 100.0;

struct SisdrResult {
  double db = 0.0;       // capped at kSisdrCapDb
  bool perfect = false;  // residual energy exactly zero
};

/// Scale-invariant SDR: a = <est, ref> / ||ref||^2,
///   10 log10(||a ref||^2 / ||est - a ref||^2).
/// Throws std::invalid_argument on length mismatch or a zero reference.
SisdrResult sisdr(std::span<const double> est, std::span<const double> ref);
SisdrResult sisdr(const Signal& est, const Signal& ref);

struct MetricReport {
  std::optional<SisdrResult> sisdr;
  std::optional<double> rt60_abs_err_s;
  std::optional<double> drr_abs_err_db;

  KeyValueRecord to_record() const;
};

MetricReport param_errors(const BlindEstimate& est, const AcousticParams& truth);
MetricReport param_errors(const EdcAnalysis& est, const AcousticParams& truth);

/// Field-wise mean over reports; a field is present when any report has it.
MetricReport mean_report(std::span<const MetricReport> reports);

}  // namespace reverbmatch
