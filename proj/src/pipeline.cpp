#include "reverbmatch/pipeline.hpp"

namespace reverbmatch {

PipelineResult dereverb_pipeline(const Signal& y, const Rt60Calibration& cal, const PipelineConfig& cfg,
                                 std::shared_ptr<const StftConfig> stft_config) {
  y.validate();
  const Spectrogram spec = stft(y, stft_config);

  PipelineResult result;
  result.estimate = analyze_blind(spec, cal, cfg.blind);
  if (result.estimate.flagged) {
    result.output = y;
    return result;
  }

  AcousticParams params = cfg.model;
  params.rt60 = result.estimate.rt60;
  params.drr_db = result.estimate.drr_db;
  params.sample_rate = y.sample_rate;
  SolveResult solved = trainingless_dereverb(spec, params, cfg.solver);
  result.output = istft(solved.s_hat, y.size());
  result.trace = std::move(solved.trace);
  return result;
}

}  // namespace reverbmatch
