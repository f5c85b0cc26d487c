#include <catch_amalgamated.hpp>

#include "reverbmatch/metrics.hpp"
#include "test_support.hpp"

using namespace reverbmatch;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("SISDR of the reference itself is perfect", "[metrics]") {
  const auto x = rm_test::white_noise(1000, 1);
  const SisdrResult r = sisdr(x, x);
  CHECK(r.perfect);
  CHECK(r.db == kSisdrCapDb);
  std::vector<double> doubled(x);
  for (double& v : doubled) v *= 2.0;
  CHECK(sisdr(doubled, x).perfect);
  CHECK(sisdr(doubled, x).db == 100.0);
}

TEST_CASE("SISDR matches hand-computed values", "[metrics]") {
  // a = 1/2, target [0.5, 0.5], residual [0.5, -0.5]: equal energies.
  CHECK_THAT(sisdr(std::vector<double>{1.0, 0.0}, std::vector<double>{1.0, 1.0}).db, WithinAbs(0.0, 1e-12));
  // Residual orthogonal to the reference: 10 log10(2 / 0.02) = 20 dB.
  CHECK_THAT(sisdr(std::vector<double>{1.0, 1.0, 0.1, -0.1}, std::vector<double>{1.0, 1.0, 0.0, 0.0}).db,
             WithinAbs(20.0, 1e-12));
  // Orthogonal estimate: no target component.
  CHECK(sisdr(std::vector<double>{0.0, 1.0}, std::vector<double>{1.0, 0.0}).db == -kSisdrCapDb);
  // A sign flip projects exactly but is not counted as perfect.
  const SisdrResult flipped = sisdr(std::vector<double>{-1.0, -2.0}, std::vector<double>{1.0, 2.0});
  CHECK(flipped.db == kSisdrCapDb);
  CHECK_FALSE(flipped.perfect);
}

TEST_CASE("SISDR is invariant to the estimate scale", "[metrics]") {
  const auto ref = rm_test::white_noise(2000, 2);
  auto est = rm_test::white_noise(2000, 3, 0.3);
  for (std::size_t i = 0; i < est.size(); ++i) est[i] += ref[i];
  const double base = sisdr(est, ref).db;
  for (double& v : est) v *= 7.5;
  CHECK_THAT(sisdr(est, ref).db, WithinRel(base, 1e-12));
  // Noise at 0.3 of unit variance: about 10 log10(1 / 0.09) dB.
  CHECK_THAT(base, WithinAbs(10.0 * std::log10(1.0 / 0.09), 0.5));
}

TEST_CASE("SISDR rejects mismatched or empty references", "[metrics]") {
  CHECK_THROWS_AS(sisdr(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(sisdr(std::vector<double>{1.0, 2.0}, std::vector<double>{0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("parameter errors are absolute differences", "[metrics]") {
  AcousticParams truth;
  truth.rt60 = 0.5;
  truth.drr_db = -3.0;
  BlindEstimate est;
  est.rt60 = 0.62;
  est.drr_db = 4.0;
  const MetricReport m = param_errors(est, truth);
  CHECK_THAT(*m.rt60_abs_err_s, WithinAbs(0.12, 1e-15));
  CHECK(*m.drr_abs_err_db == 7.0);
  CHECK_FALSE(m.sisdr.has_value());

  EdcAnalysis edc;
  edc.rt60_est = 0.45;
  edc.drr_est_db = -3.5;
  const MetricReport e = param_errors(edc, truth);
  CHECK_THAT(*e.rt60_abs_err_s, WithinAbs(0.05, 1e-15));
  CHECK(*e.drr_abs_err_db == 0.5);
}

TEST_CASE("mean report averages the fields that are present", "[metrics]") {
  std::vector<MetricReport> reports(3);
  reports[0].sisdr = SisdrResult{10.0, false};
  reports[1].sisdr = SisdrResult{20.0, true};
  reports[0].rt60_abs_err_s = 0.1;
  reports[2].rt60_abs_err_s = 0.3;
  const MetricReport m = mean_report(reports);
  CHECK(m.sisdr->db == 15.0);
  CHECK_FALSE(m.sisdr->perfect);
  CHECK_THAT(*m.rt60_abs_err_s, WithinRel(0.2, 1e-15));
  CHECK_FALSE(m.drr_abs_err_db.has_value());
  const KeyValueRecord r = m.to_record();
  CHECK(r.get_double("sisdr_db") == 15.0);
  CHECK(r.get("sisdr_perfect") == "0");
  CHECK_FALSE(r.has("drr_abs_err_db"));
  CHECK_FALSE(mean_report({}).sisdr.has_value());
}
