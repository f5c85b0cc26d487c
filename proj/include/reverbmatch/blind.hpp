#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "reverbmatch/dereverb.hpp"
#include "reverbmatch/keyvalue.hpp"
#include "reverbmatch/signal.hpp"

namespace reverbmatch {

/// No decaying region was found (silence, growing energy, too short input).
class InsufficientDecayEvidence : public std::runtime_error {
 public:
  InsufficientDecayEvidence() : std::runtime_error("insufficient decay evidence") {}
  using std::runtime_error::runtime_error;
};

struct DecayAnalysisConfig {
  /// Positive-frequency bins 1..N/2 are split into this many equal groups.
  std::size_t num_subbands = 16;
  /// Shortest strictly decreasing run of log-energy frames that is fitted.
  std::size_t min_run = 3;
  /// Frames more than this far below the loudest subband frame count as
  /// silence and break runs.
  double floor_db = 100.0;
  /// Runs whose total level drop is smaller than this are fluctuations, not
  /// decays, and are skipped.
  double min_drop_db = 6.0;

  void validate() const;
};

/// Median decay time in seconds over all maximal strictly decreasing
/// log-energy runs (>= min_run frames) of all subbands. Each run gets a
/// least-squares line; its decay time is -60 dB / slope.
double raw_decay_estimate(const Spectrogram& y, const DecayAnalysisConfig& cfg = {});

struct PolynomialFit {
  std::vector<double> coeffs;  // c0, c1, ...
  double residual = 0.0;       // root-mean-square fit error
};

/// Least-squares polynomial through (x, y). Throws std::invalid_argument when
/// there are fewer points than coefficients or the design matrix is rank
/// deficient.
PolynomialFit fit_polynomial(std::span<const double> x, std::span<const double> y, std::size_t order);

/// Quadratic map from the raw decay estimate to RT60 in seconds.
struct Rt60Calibration {
  double c0 = 0.0, c1 = 1.0, c2 = 0.0;
  double residual = 0.0;
  std::size_t n_pairs = 0;
  /// Range of raw estimates seen during calibration.
  double raw_min = 0.0, raw_max = 0.0;

  double map(double raw) const { return c0 + raw * (c1 + raw * c2); }

  KeyValueRecord to_record() const;
  static Rt60Calibration from_record(const KeyValueRecord& record);
  void save(const std::filesystem::path& path) const;
  static Rt60Calibration load(const std::filesystem::path& path);
};

/// Fits rt60 ~ c0 + c1 r + c2 r^2 on raw estimates r. Needs at least 3 pairs
/// and at least 3 distinct raw values.
Rt60Calibration calibrate_rt60_raw(std::span<const double> raw, std::span<const double> rt60);
Rt60Calibration calibrate_rt60(std::span<const std::pair<Spectrogram, double>> pairs,
                               const DecayAnalysisConfig& cfg = {});

struct DrrSearchConfig {
  std::vector<double> grid_db{-6.0, -3.0, 0.0, 3.0, 6.0, 10.0};
  /// Iteration budget of the inner solve run at every grid point.
  std::size_t inner_iters = 10;
  /// Solver used at every grid point; its max_iters is replaced by inner_iters.
  SolverConfig solver;
  std::size_t n_d = 40;
  NoiseMode noise_mode = NoiseMode::centered_gaussian;
  /// Losses within this relative distance of the minimum count as ties.
  double tie_rel_tol = 1e-9;
  std::uint64_t seed = 0;

  void validate() const;
};

struct DrrSearchResult {
  double drr_db = 0.0;
  std::size_t index = 0;
  std::vector<double> losses;  // per grid point
};

/// Grid search over DRR: each grid point runs a short training-less solve
/// with a Polack sampler at (rt60, drr) and scores the best loss it reached.
/// Every grid point uses the same draw seeds, so points differ only in their
/// DRR. Ties go to the lowest DRR.
DrrSearchResult blind_drr_search(const Spectrogram& y, double rt60, const DrrSearchConfig& cfg);
double blind_drr(const Spectrogram& y, double rt60, const DrrSearchConfig& cfg);

struct BlindConfig {
  DecayAnalysisConfig decay;
  DrrSearchConfig drr;
  /// Calibrated RT60 values below this are clamped and flagged.
  double rt60_floor = 0.1;
};

struct BlindEstimate {
  double rt60 = 0.0;
  double drr_db = 0.0;
  double raw_median_decay = 0.0;
  double rm_loss_at_estimate = 0.0;
  /// Set when the input shows no usable reverberation; `reason` says why.
  bool flagged = false;
  std::string reason;

  KeyValueRecord to_record() const;
};

/// raw_decay_estimate -> calibration -> blind_drr. The estimate is flagged,
/// without running the DRR search, when there is no decay evidence, when the
/// calibrated RT60 is below the floor or when the raw decay lies below the
/// calibrated range. A flagged estimate carries RT60 >= floor and the highest
/// grid DRR.
BlindEstimate analyze_blind(const Spectrogram& y, const Rt60Calibration& cal, const BlindConfig& cfg = {});

}  // namespace reverbmatch
