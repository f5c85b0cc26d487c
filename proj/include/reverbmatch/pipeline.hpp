#pragma once

#include <optional>

#include "reverbmatch/blind.hpp"
#include "reverbmatch/dereverb.hpp"
#include "reverbmatch/signal.hpp"

namespace reverbmatch {

struct PipelineConfig {
  BlindConfig blind;
  SolverConfig solver;
  AcousticParams model;  // n_d and noise_mode of the solver's sampler; rt60/drr come from the analyzer
};

struct PipelineResult {
  Signal output;
  BlindEstimate estimate;
  /// Empty when the input was passed through.
  std::optional<SolveTrace> trace;
  bool passthrough() const { return !trace.has_value(); }
};

/// stft -> analyze_blind -> trainingless_dereverb -> istft, trimmed to the
/// input length. A flagged blind estimate (no usable reverberation) returns
/// the input unchanged.
PipelineResult dereverb_pipeline(const Signal& y, const Rt60Calibration& cal, const PipelineConfig& cfg = {},
                                 std::shared_ptr<const StftConfig> stft_config = StftConfig::make_default());

}  // namespace reverbmatch
