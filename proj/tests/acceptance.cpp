// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
// Usage: acceptance [criterion ...]   (default: all of 1..12)

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "reverbmatch/blind.hpp"
#include "reverbmatch/dereverb.hpp"
#include "reverbmatch/loss.hpp"
#include "reverbmatch/metrics.hpp"
#include "reverbmatch/rir.hpp"
#include "reverbmatch/seeding.hpp"
#include "reverbmatch/tfconv.hpp"
#include "reverbmatch/wav.hpp"
#include "test_support.hpp"

using namespace reverbmatch;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::shared_ptr<const StftConfig> hann_config(std::size_t n, std::size_t hop) {
  const auto ga = hann_window(n);
  return std::make_shared<const StftConfig>(ga, canonical_dual_window(ga, hop), hop);
}

double brute_complex(const Spectrogram& a, const Spectrogram& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::norm(a.data()[i] - b.data()[i]);
  return acc;
}

double brute_mag(const Spectrogram& a, const Spectrogram& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::log(1.0 + std::abs(a.data()[i])) - std::log(1.0 + std::abs(b.data()[i]));
    acc += d * d;
  }
  return acc;
}

// Central differences of f over the real and imaginary part of every entry.
std::vector<double> fd_gradient(Spectrogram x, const std::function<double(const Spectrogram&)>& f, double eps) {
  std::vector<double> g;
  for (std::size_t i = 0; i < x.size(); ++i) {
    Complex& v = x.data()[i];
    const Complex keep = v;
    for (Complex step : {Complex(eps, 0.0), Complex(0.0, eps)}) {
      v = keep + step;
      const double plus = f(x);
      v = keep - step;
      const double minus = f(x);
      g.push_back((plus - minus) / (2.0 * eps));
    }
    v = keep;
  }
  return g;
}

double norm2(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

// ---------------------------------------------------------------------------

struct OperatorInstance {
  std::vector<double> s, h;
  Spectrogram y_ref, s_spec;
};

std::vector<OperatorInstance>& operator_instances() {
  static std::vector<OperatorInstance> cases = [] {
    const auto cfg = StftConfig::make_default();
    std::vector<OperatorInstance> out(50);
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> len(1, 2000);
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i].s = rm_test::white_noise(16000, 10 + i);
      out[i].h = rm_test::random_rir(len(rng), 70 + i);
      out[i].y_ref = stft(rm_test::direct_convolution(out[i].s, out[i].h), cfg);
      out[i].s_spec = stft(out[i].s, cfg);
    }
    return out;
  }();
  return cases;
}

Outcome criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = StftConfig::make_default();
  const KernelBuilder builder(cfg, BandRadius::full());
  double worst = 0.0;
  for (const auto& c : operator_instances()) {
    const Spectrogram y = apply(builder.build(c.h), c.s_spec, c.y_ref.num_frames());
    worst = std::max(worst, rm_test::relative_error(y, c.y_ref));
  }
  const double elapsed = seconds_since(t0);
  return {worst <= 1e-8 && elapsed <= 300.0,
          fmt("operator exactness: max relative error %.3g over 50 pairs (limit 1e-8), %.1f s (limit 300 s)", worst,
              elapsed)};
}

std::string run_cli(const std::string& args, int* code = nullptr);

Outcome criterion_2() {
  const auto cfg = StftConfig::make_default();
  const std::vector<BandRadius> bands{BandRadius(1), BandRadius(2),  BandRadius(4),
                                      BandRadius(8), BandRadius(16), BandRadius::full()};
  const auto& cases = operator_instances();
  std::vector<std::vector<double>> err(bands.size(), std::vector<double>(cases.size()));
  for (std::size_t b = 0; b < bands.size(); ++b) {
    const KernelBuilder builder(cfg, bands[b]);
    for (std::size_t i = 0; i < cases.size(); ++i)
      err[b][i] = rm_test::relative_error(apply(builder.build(cases[i].h), cases[i].s_spec, cases[i].y_ref.num_frames()),
                                          cases[i].y_ref);
  }
  std::size_t violations = 0;
  std::printf("    band_radius,width,mean_rel_error,max_rel_error\n");
  for (std::size_t b = 0; b < bands.size(); ++b) {
    double mean = 0.0, mx = 0.0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
      mean += err[b][i] / static_cast<double>(cases.size());
      mx = std::max(mx, err[b][i]);
      if (b > 0 && err[b][i] > err[b - 1][i]) ++violations;
    }
    std::printf("    %s,%zu,%.3g,%.3g\n", bands[b].to_string().c_str(), bands[b].width(512), mean, mx);
  }
  int code = 0;
  const std::string bench = run_cli("bench --instances 3", &code);
  std::istringstream lines(bench);
  for (std::string line; std::getline(lines, line);) std::printf("    bench | %s\n", line.c_str());
  const bool bench_ok = code == 0 && bench.find("# monotone=yes") != std::string::npos;
  return {violations == 0 && bench_ok,
          fmt("band-truncation monotonicity: %zu increases over 5 steps x 50 instances; CLI bench table %s",
              violations, bench_ok ? "monotone" : "NOT monotone or failed")};
}

Outcome criterion_3() {
  const auto cfg = hann_config(8, 4);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> frames(1, 6), taps(1, 24), radius(0, 4);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t r = radius(rng);
    const BandRadius band = r == 4 ? BandRadius::full() : BandRadius(r);
    const ConvKernel k = KernelBuilder(cfg, band).build(rm_test::white_noise(taps(rng), 300 + i));
    const std::size_t t_s = frames(rng), t_y = frames(rng);
    const Spectrogram s = rm_test::random_spectrogram(cfg, t_s, 500 + i);
    const Spectrogram g = rm_test::random_spectrogram(cfg, t_y, 700 + i);
    const Spectrogram as = apply(k, s, t_y);
    const Spectrogram ag = apply_adjoint(k, g, t_s);
    Complex lhs = 0.0, rhs = 0.0;
    for (std::size_t j = 0; j < as.size(); ++j) lhs += as.data()[j] * std::conj(g.data()[j]);
    for (std::size_t j = 0; j < s.size(); ++j) rhs += s.data()[j] * std::conj(ag.data()[j]);
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300));
  }
  return {worst <= 1e-10, fmt("adjoint identity: max relative mismatch %.3g over 100 instances (limit 1e-10)", worst)};
}

Outcome criterion_4() {
  const auto cfg = hann_config(6, 3);
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> taps(1, 8);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Rir h{rm_test::white_noise(taps(rng), 900 + i), 16000.0};
    const Spectrogram s_hat = rm_test::random_spectrogram(cfg, 4, 1000 + i);
    const ConvKernel k = KernelBuilder(cfg, BandRadius::full()).build(h);
    const std::size_t t_y = 4 + k.causal_frames() - 1;
    const Spectrogram y = rm_test::random_spectrogram(cfg, t_y, 1100 + i);
    LossConfig lc;
    lc.band_radius = BandRadius::full();
    Spectrogram grad;
    const LossReport r = ReverbMatchingLoss(dirac_sampler(h), cfg, lc).evaluate(y, s_hat, 0, &grad);
    const auto fd = fd_gradient(
        s_hat,
        [&](const Spectrogram& s) {
          const Spectrogram y_hat = apply(k, s, t_y);
          return brute_complex(y, y_hat) + r.alpha * brute_mag(y, y_hat);
        },
        1e-6);
    std::vector<double> diff(fd.size());
    for (std::size_t j = 0; j < grad.size(); ++j) {
      diff[2 * j] = grad.data()[j].real() - fd[2 * j];
      diff[2 * j + 1] = grad.data()[j].imag() - fd[2 * j + 1];
    }
    worst = std::max(worst, norm2(diff) / norm2(fd));
  }
  return {worst <= 1e-5,
          fmt("gradient check: max relative error %.3g vs central differences on 20 6x4 instances (limit 1e-5)",
              worst)};
}

Outcome criterion_5() {
  const auto cfg = hann_config(6, 3);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Rir h{rm_test::white_noise(5, 1200 + i), 16000.0};
    const ConvKernel k = KernelBuilder(cfg, BandRadius::full()).build(h);
    const Spectrogram s_hat = rm_test::random_spectrogram(cfg, 4, 1300 + i);
    const std::size_t t_y = 4 + k.causal_frames() - 1;
    const Spectrogram y = rm_test::random_spectrogram(cfg, t_y, 1400 + i);
    LossConfig lc;
    lc.band_radius = BandRadius::full();
    const LossReport r = ReverbMatchingLoss(dirac_sampler(h), cfg, lc).evaluate(y, s_hat, 0);
    // Output-space gradient norms by central differences, independent of the library.
    const Spectrogram y_hat = apply(k, s_hat, t_y);
    const double gc = norm2(fd_gradient(y_hat, [&](const Spectrogram& v) { return brute_complex(y, v); }, 1e-6));
    const double gm = norm2(fd_gradient(y_hat, [&](const Spectrogram& v) { return brute_mag(y, v); }, 1e-6));
    worst = std::max(worst, std::abs(gc - r.alpha * gm) / gc);
  }
  return {worst <= 1e-6, fmt("GradNorm balance: max | ||grad L_C|| - alpha ||grad L_MAG|| | / ||grad L_C|| = %.3g "
                             "over 20 instances (limit 1e-6)",
                             worst)};
}

Outcome criterion_6() {
  int failures = 0;
  std::string worst;
  double worst_rt = 0.0, worst_drr = 0.0;
  for (double rt60 : {0.2, 0.5, 1.0})
    for (double drr : {-6.0, 0.0, 10.0}) {
      AcousticParams p;
      p.rt60 = rt60;
      p.drr_db = drr;
      std::vector<double> rt, dr;
      for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const EdcAnalysis a = analyze_rir(sample_rir(p, min_rir_length(p), 5000 + seed), p.n_d);
        rt.push_back(a.rt60_est);
        dr.push_back(a.drr_est_db);
      }
      const double rt_err = std::abs(rm_test::median(rt) - rt60) / rt60;
      const double drr_err = std::abs(rm_test::median(dr) - drr);
      worst_rt = std::max(worst_rt, rt_err);
      worst_drr = std::max(worst_drr, drr_err);
      if (rt_err > 0.1 || drr_err > 1.5) ++failures;
    }
  return {failures == 0, fmt("Polack round trip: worst median RT60 error %.1f%% (limit 10%%), worst median DRR error "
                             "%.2f dB (limit 1.5 dB), %d of 9 settings failing",
                             100.0 * worst_rt, worst_drr, failures)};
}

Outcome criterion_7() {
  AcousticParams p;
  p.rt60 = 0.5;
  p.drr_db = 0.0;
  const double expected = polack_tail_energy(sigma_from_drr(p.drr_db, tau_from_rt60(p.rt60, p.sample_rate), p.n_d),
                                             tau_from_rt60(p.rt60, p.sample_rate), p.n_d);
  double worst = 0.0;
  std::string detail;
  for (NoiseMode mode : {NoiseMode::centered_gaussian, NoiseMode::half_normal}) {
    p.noise_mode = mode;
    const std::size_t n = min_rir_length(p);
    double mean = 0.0;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
      const Rir h = sample_rir(p, n, seed);
      double e = 0.0;
      for (std::size_t k = p.n_d + 1; k < h.size(); ++k) e += h.taps[k] * h.taps[k];
      mean += e / 10000.0;
    }
    const double rel = std::abs(mean - expected) / expected;
    worst = std::max(worst, rel);
    detail += fmt(" %s %.4f", std::string(to_string(mode)).c_str(), mean);
  }
  return {worst <= 0.03, fmt("half-normal energy equivalence: expected %.4f, mean tail energy%s; worst deviation %.2f%% "
                             "(limit 3%%)",
                             expected, detail.c_str(), 100.0 * worst)};
}

Outcome criterion_8() {
  // Pinned pre-build: median absolute error 0.076 s on this exact setup.
  const auto cfg = StftConfig::make_default();
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> urt(0.2, 1.0), udrr(-6.0, 10.0);
  std::vector<std::pair<Spectrogram, double>> train, test;
  for (std::uint64_t i = 0; i < 150; ++i) {
    AcousticParams p;
    p.rt60 = urt(rng);
    p.drr_db = udrr(rng);
    const auto s = rm_test::speech_shaped_noise(32000, 500 + i);
    const Rir h = sample_rir(p, min_rir_length(p), 900 + i);
    (i < 100 ? train : test).emplace_back(stft(convolve(s, h.taps), cfg), p.rt60);
  }
  const Rt60Calibration cal = calibrate_rt60(train);
  BlindConfig bc;
  bc.drr.grid_db = {0.0};
  std::vector<double> err;
  for (const auto& [y, rt60] : test) err.push_back(std::abs(analyze_blind(y, cal, bc).rt60 - rt60));
  const double med = rm_test::median(err);
  return {med <= 0.15, fmt("blind RT60: median absolute error %.3f s on 50 held-out samples after calibrating on 100 "
                           "(limit 0.15 s; pinned pre-build 0.076 s)",
                           med)};
}

// Conjugate gradients on C^H C x = C^H y from x = 0; returns the first iterate
// whose residual ||C x - y||^2 is at most `target`.
Spectrogram cg_least_squares(const ConvKernel& k, const Spectrogram& y, double target, std::size_t* iters) {
  const std::size_t t = y.num_frames();
  Spectrogram x(y.config_ptr(), t);
  Spectrogram r = apply_adjoint(k, y, t);
  Spectrogram p = r;
  double rs = frobenius_norm_squared(r);
  for (std::size_t it = 1; it <= 1000; ++it) {
    const Spectrogram ap = apply_adjoint(k, apply(k, p, t), t);
    const double a = rs / inner_product(p, ap).real();
    x += a * p;
    r -= a * ap;
    const double rn = frobenius_norm_squared(r);
    p = r + (rn / rs) * p;
    rs = rn;
    if (frobenius_norm_squared(apply(k, x, t) - y) <= target) {
      *iters = it;
      return x;
    }
  }
  *iters = 0;
  return x;
}

Outcome criterion_9() {
  const auto cfg = StftConfig::make_default();
  const auto s = rm_test::speech_shaped_noise(16000, 7);
  AcousticParams p;
  p.rt60 = 0.5;
  p.drr_db = 0.0;
  const Rir h = sample_rir(p, min_rir_length(p), 3);
  const auto wet = convolve(s, h.taps);
  const Spectrogram y = stft(wet, cfg);
  auto dry_sisdr = [&](const Spectrogram& est) {
    Signal e = istft(est, wet.size());
    e.samples.resize(s.size());
    return reverbmatch::sisdr(e.samples, s).db;
  };

  const SolverConfig sc;  // default budget
  const auto t0 = std::chrono::steady_clock::now();
  const SolveResult r = trainingless_dereverb(y, dirac_sampler(h), sc);
  const double elapsed = seconds_since(t0);
  const double ratio = r.trace.final_report.l_complex / r.trace.records.front().report.l_complex;
  const double solver_db = dry_sisdr(r.s_hat);

  // Oracle: least squares with the same kernel, stopped at the same residual target.
  const ConvKernel k = KernelBuilder(cfg, sc.loss.band_radius).build(h);
  const double lc0 = frobenius_norm_squared(apply(k, y, y.num_frames()) - y);
  std::size_t cg_iters = 0;
  const double oracle_db = dry_sisdr(cg_least_squares(k, y, 1e-3 * lc0, &cg_iters));

  return {ratio <= 1e-3 && cg_iters > 0 && solver_db > oracle_db,
          fmt("Dirac oracle: L_C ratio %.3g (limit 1e-3) in %zu iterations (%.0f s); SISDR %.2f dB vs least-squares "
              "oracle %.2f dB at %zu CG iterations (pinned pre-build 18.1 dB)",
              ratio, r.trace.iterations_used, elapsed, solver_db, oracle_db, cg_iters)};
}

Outcome criterion_10() {
  const auto cfg = StftConfig::make_default();
  int ok = 0;
  double worst = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    const auto s = rm_test::speech_shaped_noise(16000, 100 + seed);
    AcousticParams p;
    p.rt60 = 0.2 + 0.04 * seed;
    p.drr_db = -6.0 + (seed % 5) * 4.0;
    const Rir h = sample_rir(p, min_rir_length(p), 1000 + seed);
    SolverConfig sc;
    sc.max_iters = 20;
    sc.seed = static_cast<std::uint64_t>(seed);
    const SolveResult r = trainingless_dereverb(stft(convolve(s, h.taps), cfg), p, sc);
    const double rel = r.trace.best_total() / r.trace.initial_total();
    worst = std::max(worst, rel);
    ok += r.trace.best_total() < r.trace.initial_total();
  }
  return {ok == 20, fmt("probabilistic solve: best < initial loss on %d/20 seeded runs (20-iteration budget); worst "
                        "best/initial %.4f",
                        ok, worst)};
}

Outcome criterion_11() {
  const auto cfg = StftConfig::make_default();
  int ok = 0;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    AcousticParams p;
    p.rt60 = 0.3 + 0.03 * i;
    p.drr_db = -6.0 + (i % 5) * 4.0;
    const Rir h = sample_rir(p, min_rir_length(p), 2000 + i);
    const Spectrogram y = stft(convolve(rm_test::speech_shaped_noise(16000, 200 + i), h.taps), cfg);
    const auto sampler = std::make_shared<const PolackSampler>(p);
    LossConfig avg, best;
    avg.variant = LossVariant::average;
    best.variant = LossVariant::best;
    avg.num_draws = best.num_draws = kDefaultNumDraws;
    const std::uint64_t seed = 3000 + i;  // same seed, same draw set
    const double l_avg = rm_loss(y, y, sampler, avg, seed).total;
    const double l_best = rm_loss(y, y, sampler, best, seed).total;
    ok += l_best <= l_avg;
    worst = std::max(worst, l_best / l_avg);
  }
  return {ok == 20, fmt("loss-variant ordering: L_best <= L_avg on %d/20 samples with shared draws (I = 10); worst "
                        "L_best/L_avg %.4f",
                        ok, worst)};
}

// ---------------------------------------------------------------------------

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "reverbmatch_acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string run_cli(const std::string& args, int* code) {
  const fs::path out = work_dir() / "cli_stdout.txt";
  const std::string cmd = std::string(REVERBMATCH_CLI) + " " + args + " > " + out.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  if (code) *code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return slurp(out);
}

Outcome criterion_12() {
  const fs::path d = work_dir();
  auto at = [&](const std::string& name) { return (d / name).string(); };

  // Inputs shared by all runs.
  const auto cfg = StftConfig::make_default();
  write_wav(d / "dry.wav", Signal{rm_test::speech_shaped_noise(16000, 1), 16000.0});
  std::ofstream manifest(d / "pairs.txt");
  for (int i = 0; i < 4; ++i) {
    AcousticParams p;
    p.rt60 = 0.3 + 0.2 * i;
    p.drr_db = 0.0;
    const Rir h = sample_rir(p, min_rir_length(p), 40 + i);
    write_wav(d / ("cal" + std::to_string(i) + ".wav"),
              Signal{convolve(rm_test::speech_shaped_noise(32000, 60 + i), h.taps), 16000.0});
    manifest << "cal" << i << ".wav " << p.rt60 << '\n';
  }
  manifest.close();
  std::ofstream(d / "truth.txt") << "rt60=0.4\ndrr_db=2\n";

  // {name, arguments with @ replaced by the run tag, output files}
  struct Command {
    std::string name, args;
    std::vector<std::string> outputs;
  };
  const std::vector<Command> commands{
      {"sample-rir", "--seed 7 sample-rir --rt60 0.4 --drr 2 -o " + at("h@.txt"), {"h@.txt"}},
      {"analyze-rir", "analyze-rir --rir " + at("h_ref.txt"), {}},
      {"reverberate-time", "reverberate -i " + at("dry.wav") + " --rir " + at("h_ref.txt") + " -o " + at("wt@.wav"),
       {"wt@.wav"}},
      {"reverberate-operator",
       "reverberate --path operator -i " + at("dry.wav") + " --rir " + at("h_ref.txt") + " -o " + at("wo@.wav"),
       {"wo@.wav"}},
      {"calibrate", "calibrate --pairs " + at("pairs.txt") + " -o " + at("cal@.txt"), {"cal@.txt"}},
      {"analyze-blind",
       "--seed 3 --report " + at("blind@.txt") + " analyze-blind -i " + at("wet_ref.wav") + " --calibration " +
           at("cal_ref.txt") + " --inner-iters 3 --drr-grid 0,6",
       {"blind@.txt"}},
      {"dereverb-dirac",
       "dereverb -i " + at("wet_ref.wav") + " --rir " + at("h_ref.txt") + " --max-iters 5 -o " + at("dd@.wav") +
           " --trace " + at("td@.txt"),
       {"dd@.wav", "td@.txt"}},
      {"dereverb-params",
       "--variant average --draws 4 --seed 11 dereverb -i " + at("wet_ref.wav") +
           " --rt60 0.4 --drr 2 --max-iters 4 -o " + at("dp@.wav"),
       {"dp@.wav"}},
      {"dereverb-blind",
       "--seed 5 dereverb -i " + at("wet_ref.wav") + " --calibration " + at("cal_ref.txt") +
           " --max-iters 3 --inner-iters 2 --drr-grid 0,6 -o " + at("db@.wav"),
       {"db@.wav"}},
      {"eval", "eval --est " + at("wet_ref.wav") + " --ref " + at("dry_pad.wav") + " --estimate " + at("blind_ref.txt") +
                   " --truth " + at("truth.txt"),
       {}},
      {"bench", "--seed 2 bench --instances 2", {}},
  };

  auto tagged = [](std::string s, const std::string& tag) {
    for (std::size_t pos; (pos = s.find('@')) != std::string::npos;) s.replace(pos, 1, tag);
    return s;
  };

  // Reference artifacts consumed by later commands.
  int code = 0;
  run_cli("--seed 7 sample-rir --rt60 0.4 --drr 2 -o " + at("h_ref.txt"), &code);
  if (code != 0) return {false, "reproducibility: could not create reference RIR"};
  run_cli("reverberate -i " + at("dry.wav") + " --rir " + at("h_ref.txt") + " -o " + at("wet_ref.wav"), &code);
  run_cli("calibrate --pairs " + at("pairs.txt") + " -o " + at("cal_ref.txt"), &code);
  run_cli("--seed 3 --report " + at("blind_ref.txt") + " analyze-blind -i " + at("wet_ref.wav") + " --calibration " +
              at("cal_ref.txt") + " --inner-iters 3 --drr-grid 0,6",
          &code);
  {
    Signal dry = read_wav(d / "dry.wav");
    dry.samples.resize(read_wav(d / "wet_ref.wav").size(), 0.0);
    write_wav(d / "dry_pad.wav", dry);
  }

  std::vector<std::string> mismatched;
  for (const Command& c : commands) {
    std::vector<std::string> results;
    bool failed = false;
    for (const auto& [tag, workers] : {std::pair{"a", 1}, std::pair{"b", 1}, std::pair{"c", 4}}) {
      int rc = 0;
      std::string blob = run_cli("--workers " + std::to_string(workers) + " " + tagged(c.args, tag), &rc);
      failed = failed || rc != 0;
      for (const auto& o : c.outputs) blob += "\n--" + o + "--\n" + slurp(d / tagged(o, tag));
      results.push_back(std::move(blob));
    }
    if (failed || results[0] != results[1] || results[0] != results[2]) mismatched.push_back(c.name);
  }
  std::string names;
  for (const auto& n : mismatched) names += " " + n;
  return {mismatched.empty(),
          fmt("reproducibility: %zu CLI commands run 3 times (workers 1, 1, 4), %zu with differing bytes or errors%s",
              commands.size(), mismatched.size(), names.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  std::setvbuf(stdout, nullptr, _IONBF, 0);
  const std::vector<std::function<Outcome()>> criteria{criterion_1, criterion_2, criterion_3,  criterion_4,
                                                       criterion_5, criterion_6, criterion_7,  criterion_8,
                                                       criterion_9, criterion_10, criterion_11, criterion_12};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %d: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str(), seconds_since(t0));
    failed += !o.pass;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
