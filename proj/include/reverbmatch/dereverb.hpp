#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "reverbmatch/keyvalue.hpp"
#include "reverbmatch/loss.hpp"
#include "reverbmatch/rir.hpp"
#include "reverbmatch/signal.hpp"

namespace reverbmatch {

enum class StepRule { fixed, adam };

std::string_view to_string(StepRule rule);
StepRule parse_step_rule(std::string_view text);

struct SolverConfig {
  std::size_t max_iters = 500;
  StepRule step_rule = StepRule::adam;
  double step_size = 5e-2;
  /// Stop once the loss decreased by less than this fraction over the last
  /// `stop_window` iterations.
  double stop_rel_tol = 1e-4;
  std::size_t stop_window = 10;
  /// Abort when the loss exceeds this multiple of the initial loss.
  double divergence_factor = 10.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  LossConfig loss;
  std::uint64_t seed = 0;

  void validate() const;
  KeyValueRecord to_record() const;
  /// Reads the keys written by to_record(); missing keys keep their defaults.
  static SolverConfig from_record(const KeyValueRecord& record);
};

struct IterationRecord {
  std::size_t iter = 0;
  LossReport report;
};

/// Loss values are those of the normalized problem (observation scaled to unit
/// RMS bin magnitude), so traces are comparable across input levels.
struct SolveTrace {
  std::vector<IterationRecord> records;
  LossReport final_report;  // report of the returned iterate
  std::size_t best_iter = 0;
  std::size_t iterations_used = 0;
  double scale = 1.0;  // RMS bin magnitude of the observation

  double initial_total() const { return records.front().report.total; }
  double best_total() const { return final_report.total; }
  /// One line per iteration: iter, l_complex, l_mag, alpha, total.
  std::string to_records() const;
};

struct SolveResult {
  Spectrogram s_hat;
  SolveTrace trace;
};

class SolverDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training-less dereverberation: minimizes the reverberation-matching loss
/// over the dry STFT for one observation.
///
/// Shat starts at Y. Iteration k evaluates the loss and its gradient at the
/// current iterate with seed derive_seed(cfg.seed, streams::kSolverIter, k), so
/// probabilistic samplers see fresh draws each iteration. Stops at max_iters,
/// when the loss is already zero to 1e-12 relative at the start, or on the
/// stop_rel_tol rule. Returns the iterate with the lowest evaluated loss.
/// Throws SolverDiverged when the loss exceeds divergence_factor times its
/// initial value.
SolveResult trainingless_dereverb(const Spectrogram& y, std::shared_ptr<const RirSampler> sampler,
                                  const SolverConfig& cfg);
SolveResult trainingless_dereverb(const Spectrogram& y, const AcousticParams& params, const SolverConfig& cfg);

}  // namespace reverbmatch
