// reverbmatch: command-line front end.
//
// Every command reads its settings from an optional key=value file
// (--config) overlaid with command-line flags, validates them, and only then
// computes. Reports go to stdout as key=value lines (or CSV for bench) and,
// with --report, to a file. Output files are written atomically.
//
// Exit codes: 0 success, 2 validation error, 1 runtime error.

#include <charconv>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "reverbmatch/blind.hpp"
#include "reverbmatch/dereverb.hpp"
#include "reverbmatch/keyvalue.hpp"
#include "reverbmatch/metrics.hpp"
#include "reverbmatch/parallel.hpp"
#include "reverbmatch/pipeline.hpp"
#include "reverbmatch/rir.hpp"
#include "reverbmatch/seeding.hpp"
#include "reverbmatch/signal.hpp"
#include "reverbmatch/tfconv.hpp"
#include "reverbmatch/wav.hpp"

namespace fs = std::filesystem;
using namespace reverbmatch;

namespace {

constexpr double kCliRate = 16000.0;

// Command-line flags that override keys of the config file.
class Overrides {
 public:
  CLI::Option* add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    CLI::Option* opt = app->add_option(flag, values_[key], help);
    bindings_.emplace_back(key, opt);
    return opt;
  }

  void apply(KeyValueRecord& kv) const {
    for (const auto& [key, opt] : bindings_)
      if (opt->count() > 0) kv.set(key, values_.at(key));
  }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::pair<std::string, CLI::Option*>> bindings_;
};

struct Settings {
  KeyValueRecord kv;

  std::string str(std::string_view key, std::string fallback) const {
    return kv.find(key).value_or(std::move(fallback));
  }
  double num(std::string_view key, double fallback) const { return kv.has(key) ? kv.get_double(key) : fallback; }
  std::size_t count(std::string_view key, std::size_t fallback) const {
    if (!kv.has(key)) return fallback;
    const auto v = kv.get_int(key);
    if (v < 0) throw std::invalid_argument(std::string(key) + " must be >= 0");
    return static_cast<std::size_t>(v);
  }
  std::uint64_t seed() const {
    const std::string s = str("seed", "0");
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw std::invalid_argument("seed must be an unsigned integer");
    return v;
  }
  fs::path path(std::string_view key) const {
    const auto v = kv.find(key);
    if (!v || v->empty()) throw std::invalid_argument("missing required setting '" + std::string(key) + "'");
    return *v;
  }
  BandRadius band() const { return BandRadius::parse(str("band_radius", std::to_string(kDefaultBandRadius))); }
};

AcousticParams acoustic_params(const Settings& s) {
  AcousticParams p;
  p.rt60 = s.num("rt60", p.rt60);
  p.drr_db = s.num("drr_db", p.drr_db);
  p.n_d = s.count("n_d", p.n_d);
  p.sample_rate = kCliRate;
  p.noise_mode = parse_noise_mode(s.str("noise_mode", std::string(to_string(p.noise_mode))));
  p.validate();
  return p;
}

SolverConfig solver_config(const Settings& s) {
  KeyValueRecord kv = s.kv;
  const LossVariant variant = parse_loss_variant(s.str("variant", "single"));
  if (variant != LossVariant::single && !kv.has("draws")) kv.set("draws", kDefaultNumDraws);
  kv.set("seed", std::to_string(s.seed()));
  return SolverConfig::from_record(kv);
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) grid.push_back(parse_double(item, "drr_grid"));
  if (grid.empty()) throw std::invalid_argument("drr_grid: empty");
  return grid;
}

BlindConfig blind_config(const Settings& s) {
  BlindConfig b;
  b.decay.num_subbands = s.count("num_subbands", b.decay.num_subbands);
  b.decay.min_run = s.count("min_run", b.decay.min_run);
  b.decay.validate();
  if (s.kv.has("drr_grid")) b.drr.grid_db = parse_grid(s.kv.get("drr_grid"));
  b.drr.inner_iters = s.count("inner_iters", b.drr.inner_iters);
  b.drr.solver = solver_config(s);
  const AcousticParams p = acoustic_params(s);
  b.drr.n_d = p.n_d;
  b.drr.noise_mode = p.noise_mode;
  b.drr.seed = s.seed();
  b.drr.validate();
  b.rt60_floor = s.num("rt60_floor", b.rt60_floor);
  return b;
}

Rir load_cli_rir(const fs::path& path) {
  if (path.extension() == ".wav") {
    Signal s = read_wav(path, kCliRate);
    return Rir{std::move(s.samples), s.sample_rate};
  }
  return read_rir_text(path, kCliRate);
}

void write_rir(const fs::path& path, const Rir& h) {
  if (path.extension() == ".wav")
    write_wav(path, Signal{h.taps, h.sample_rate});
  else
    write_rir_text(path, h);
}

// Report to stdout and, when requested, to a file.
void emit(const Settings& s, const std::string& text) {
  std::cout << text;
  if (s.kv.has("report")) write_file_atomic(s.path("report"), text);
}

std::string one_line(const KeyValueRecord& r) {
  std::string out;
  for (const auto& [k, v] : r.entries()) {
    if (!out.empty()) out += ' ';
    out += k + '=' + v;
  }
  return out + '\n';
}

int cmd_sample_rir(const Settings& s) {
  const AcousticParams p = acoustic_params(s);
  const std::size_t length = s.count("length", 0);
  const fs::path out = s.path("out");
  const std::size_t n = length == 0 ? min_rir_length(p) : length;
  const Rir h = sample_rir(p, n, s.seed());
  write_rir(out, h);
  KeyValueRecord r = p.to_record();
  r.set("length", n);
  r.set("seed", std::to_string(s.seed()));
  emit(s, r.to_string());
  return 0;
}

int cmd_analyze_rir(const Settings& s) {
  const Rir h = load_cli_rir(s.path("rir"));
  const std::size_t n_d = s.count("n_d", 40);
  const EdcAnalysis a = analyze_rir(h, n_d);
  KeyValueRecord r;
  r.set("rt60_est", a.rt60_est);
  r.set("drr_est_db", a.drr_est_db);
  r.set("sigma_est", a.sigma_est);
  r.set("t5", a.t5);
  r.set("t25", a.t25);
  r.set("e_5_25", a.e_5_25);
  emit(s, r.to_string());
  return 0;
}

int cmd_calibrate(const Settings& s) {
  const fs::path manifest = s.path("pairs");
  const fs::path out = s.path("out");
  const BlindConfig cfg = blind_config(s);

  // Manifest lines: <reverberant wav> <rt60 seconds>; relative paths resolve
  // against the manifest's directory.
  std::ifstream in(manifest);
  if (!in) throw std::invalid_argument("cannot open manifest: " + manifest.string());
  std::vector<fs::path> paths;
  std::vector<double> rt60;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string path, value;
    if (!(fields >> path >> value)) throw std::invalid_argument("malformed manifest line: " + line);
    fs::path p(path);
    paths.push_back(p.is_absolute() ? p : manifest.parent_path() / p);
    rt60.push_back(parse_double(value, "manifest rt60"));
  }
  if (paths.size() < 3) throw std::invalid_argument("insufficient calibration data: need at least 3 pairs");

  const auto config = StftConfig::make_default();
  std::vector<Signal> signals(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) signals[i] = read_wav(paths[i], kCliRate);
  std::vector<double> raw(paths.size());
  parallel_for(0, paths.size(), [&](std::size_t i) { raw[i] = raw_decay_estimate(stft(signals[i], config), cfg.decay); });

  const Rt60Calibration cal = calibrate_rt60_raw(raw, rt60);
  cal.save(out);
  emit(s, cal.to_record().to_string());
  return 0;
}

int cmd_analyze_blind(const Settings& s) {
  const Signal y = read_wav(s.path("in"), kCliRate);
  const Rt60Calibration cal = Rt60Calibration::load(s.path("calibration"));
  const BlindConfig cfg = blind_config(s);
  const BlindEstimate est = analyze_blind(stft(y, StftConfig::make_default()), cal, cfg);
  emit(s, est.to_record().to_string());
  return 0;
}

int cmd_reverberate(const Settings& s) {
  const std::string path = s.str("path", "time");
  if (path != "time" && path != "operator")
    throw std::invalid_argument("path must be 'time' or 'operator', got '" + path + "'");
  const BandRadius band = s.band();
  const fs::path out = s.path("out");
  const Signal x = read_wav(s.path("in"), kCliRate);
  const Rir h = load_cli_rir(s.path("rir"));

  const std::size_t length = x.size() + h.size() - 1;
  Signal y;
  y.sample_rate = kCliRate;
  if (path == "time") {
    y.samples = convolve(x.samples, h.taps);
  } else {
    const auto config = StftConfig::make_default();
    const ConvKernel kernel = build_kernel(h, config, band);
    y = istft(apply(kernel, stft(x, config)), length);
  }
  write_wav(out, y);
  KeyValueRecord r;
  r.set("path", path);
  if (path == "operator") r.set("band_radius", band.to_string());
  r.set("length", length);
  emit(s, r.to_string());
  return 0;
}

int cmd_dereverb(const Settings& s) {
  const Signal y = read_wav(s.path("in"), kCliRate);
  const fs::path out = s.path("out");
  const SolverConfig solver = solver_config(s);
  const auto config = StftConfig::make_default();

  KeyValueRecord r;
  Signal result;
  std::optional<SolveTrace> trace;
  if (s.kv.has("rir")) {
    // Dirac oracle: the RIR is known.
    const Rir h = load_cli_rir(s.path("rir"));
    SolveResult solved = trainingless_dereverb(stft(y, config), dirac_sampler(h), solver);
    result = istft(solved.s_hat, y.size());
    trace = std::move(solved.trace);
    r.set("mode", "dirac");
  } else if (s.kv.has("rt60")) {
    // Oracle acoustic parameters.
    const AcousticParams p = acoustic_params(s);
    SolveResult solved = trainingless_dereverb(stft(y, config), p, solver);
    result = istft(solved.s_hat, y.size());
    trace = std::move(solved.trace);
    r.set("mode", "params");
    r.merge(p.to_record());
  } else {
    PipelineConfig pc;
    pc.blind = blind_config(s);
    pc.solver = solver;
    pc.model = acoustic_params(s);
    PipelineResult res = dereverb_pipeline(y, Rt60Calibration::load(s.path("calibration")), pc, config);
    result = std::move(res.output);
    trace = std::move(res.trace);
    r.set("mode", res.passthrough() ? "passthrough" : "blind");
    r.merge(res.estimate.to_record());
  }
  write_wav(out, result);
  if (trace) {
    r.set("iterations_used", trace->iterations_used);
    r.set("best_iter", trace->best_iter);
    r.set("initial_total", trace->initial_total());
    r.set("best_total", trace->best_total());
    r.set("l_complex", trace->final_report.l_complex);
    r.set("l_mag", trace->final_report.l_mag);
    r.set("alpha", trace->final_report.alpha);
    if (s.kv.has("trace")) write_file_atomic(s.path("trace"), trace->to_records());
  }
  emit(s, r.to_string());
  return 0;
}

int cmd_eval(const Settings& s) {
  std::vector<std::pair<fs::path, fs::path>> items;
  if (s.kv.has("list")) {
    const fs::path manifest = s.path("list");
    std::ifstream in(manifest);
    if (!in) throw std::invalid_argument("cannot open list: " + manifest.string());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::istringstream fields(line);
      std::string est, ref;
      if (!(fields >> est >> ref)) throw std::invalid_argument("malformed list line: " + line);
      auto resolve = [&](const fs::path& p) { return p.is_absolute() ? p : manifest.parent_path() / p; };
      items.emplace_back(resolve(est), resolve(ref));
    }
    if (items.empty()) throw std::invalid_argument("empty evaluation list");
  } else {
    items.emplace_back(s.path("est"), s.path("ref"));
  }

  std::vector<Signal> est(items.size()), ref(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    est[i] = read_wav(items[i].first, kCliRate);
    ref[i] = read_wav(items[i].second, kCliRate);
    if (est[i].size() != ref[i].size())
      throw std::invalid_argument("length mismatch: " + items[i].first.string() + " vs " + items[i].second.string());
  }
  std::vector<MetricReport> reports(items.size());
  parallel_for(0, items.size(), [&](std::size_t i) { reports[i].sisdr = sisdr(est[i], ref[i]); });

  // Optional parameter errors: --estimate is a record with rt60 and drr_db
  // (analyze-blind output) or rt60_est and drr_est_db (analyze-rir output).
  if (s.kv.has("estimate") && s.kv.has("truth")) {
    const KeyValueRecord e = KeyValueRecord::load(s.path("estimate"));
    const AcousticParams truth = AcousticParams::from_record(KeyValueRecord::load(s.path("truth")));
    BlindEstimate b;
    b.rt60 = e.has("rt60") ? e.get_double("rt60") : e.get_double("rt60_est");
    b.drr_db = e.has("drr_db") ? e.get_double("drr_db") : e.get_double("drr_est_db");
    const MetricReport pe = param_errors(b, truth);
    for (auto& r : reports) {
      r.rt60_abs_err_s = pe.rt60_abs_err_s;
      r.drr_abs_err_db = pe.drr_abs_err_db;
    }
  }

  std::string text;
  if (items.size() == 1) {
    text = reports[0].to_record().to_string();
  } else {
    for (std::size_t i = 0; i < items.size(); ++i) {
      KeyValueRecord r;
      r.set("est", items[i].first.string());
      r.set("ref", items[i].second.string());
      r.merge(reports[i].to_record());
      text += one_line(r);
    }
    KeyValueRecord mean;
    mean.set("mean_over", items.size());
    mean.merge(mean_report(reports).to_record());
    text += one_line(mean);
  }
  emit(s, text);
  return 0;
}

int cmd_bench(const Settings& s, bool timing) {
  const std::size_t instances = s.count("instances", 5);
  const std::size_t signal_len = s.count("signal_len", 16000);
  const std::size_t rir_len = s.count("rir_len", 2000);
  if (instances < 1 || signal_len < 1 || rir_len < 1)
    throw std::invalid_argument("instances, signal_len and rir_len must be >= 1");
  const auto config = StftConfig::make_default();
  const std::vector<BandRadius> bands{BandRadius(1), BandRadius(2),  BandRadius(4),
                                      BandRadius(8), BandRadius(16), BandRadius::full()};

  struct Instance {
    Spectrogram s, y;
    Rir h;
  };
  std::vector<Instance> cases(instances);
  for (std::size_t i = 0; i < instances; ++i) {
    std::mt19937_64 rng(derive_seed(s.seed(), streams::kBench, i));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> x(signal_len);
    for (double& v : x) v = normal(rng);
    Rir h;
    h.taps.resize(rir_len);
    const double tau = static_cast<double>(rir_len) / 5.0;
    for (std::size_t n = 0; n < rir_len; ++n) h.taps[n] = 0.3 * normal(rng) * std::exp(-static_cast<double>(n) / tau);
    h.taps[0] = 1.0;
    cases[i] = {stft(x, config), stft(convolve(x, h.taps), config), std::move(h)};
  }

  std::ostringstream out;
  out << "band_radius,width,rel_error" << (timing ? ",build_ms,apply_ms,frames_per_s" : "") << '\n';
  double previous = std::numeric_limits<double>::infinity();
  bool monotone = true;
  for (const BandRadius& band : bands) {
    const KernelBuilder builder(config, band);
    double err = 0.0, build_s = 0.0, apply_s = 0.0, frames = 0.0;
    for (const Instance& c : cases) {
      const auto t0 = std::chrono::steady_clock::now();
      const ConvKernel k = builder.build(c.h);
      const auto t1 = std::chrono::steady_clock::now();
      const Spectrogram y_hat = apply(k, c.s, c.y.num_frames());
      const auto t2 = std::chrono::steady_clock::now();
      err += frobenius_norm(y_hat - c.y) / frobenius_norm(c.y);
      build_s += std::chrono::duration<double>(t1 - t0).count();
      apply_s += std::chrono::duration<double>(t2 - t1).count();
      frames += static_cast<double>(y_hat.num_frames());
    }
    err /= static_cast<double>(instances);
    monotone = monotone && err <= previous;
    previous = err;
    out << band.to_string() << ',' << band.width(config->num_bins()) << ',' << format_double(err);
    if (timing) {
      const double n = static_cast<double>(instances);
      out << ',' << format_double(1e3 * build_s / n) << ',' << format_double(1e3 * apply_s / n) << ','
          << format_double(frames / apply_s);
    }
    out << '\n';
  }
  out << "# monotone=" << (monotone ? "yes" : "no") << '\n';
  emit(s, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-based dereverberation: RIR sampling, STFT-domain convolution, reverberation matching"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides ov;
  std::string config_path;
  unsigned workers = 1;
  app.add_option("--config", config_path, "key=value settings file (flags override it)");
  app.add_option("--workers", workers, "worker threads (0 = hardware count)");
  ov.add(&app, "--seed", "seed", "global seed");
  ov.add(&app, "--band-radius", "band_radius", "kernel band radius B or 'full' (default 8)");
  ov.add(&app, "--variant", "variant", "loss variant: single, average, best");
  ov.add(&app, "--draws", "draws", "Monte-Carlo draws per loss evaluation (default 10 for average/best)");
  ov.add(&app, "--noise-mode", "noise_mode", "centered-gaussian or half-normal");
  ov.add(&app, "--report", "report", "also write the report to this file");

  auto* sample = app.add_subcommand("sample-rir", "draw a Polack RIR from (rt60, drr)");
  ov.add(sample, "--rt60", "rt60", "seconds");
  ov.add(sample, "--drr", "drr_db", "dB");
  ov.add(sample, "--n-d", "n_d", "direct-path delay in samples (default 40)");
  ov.add(sample, "--length", "length", "taps (default: tail-capture minimum)");
  ov.add(sample, "-o,--out", "out", "output RIR (.wav float32 or text)");

  auto* analyze = app.add_subcommand("analyze-rir", "EDC analysis of a known RIR");
  ov.add(analyze, "--rir", "rir", "RIR file (.wav or text)");
  ov.add(analyze, "--n-d", "n_d", "direct-path delay in samples (default 40)");

  auto* calibrate = app.add_subcommand("calibrate", "fit the blind RT60 calibration");
  ov.add(calibrate, "--pairs", "pairs", "manifest: '<reverberant wav> <rt60>' per line");
  ov.add(calibrate, "-o,--out", "out", "calibration file");

  auto* blind = app.add_subcommand("analyze-blind", "estimate (rt60, drr) from a reverberant recording");
  ov.add(blind, "-i,--in", "in", "reverberant wav");
  ov.add(blind, "--calibration", "calibration", "calibration file");
  ov.add(blind, "--inner-iters", "inner_iters", "solver iterations per DRR grid point");
  ov.add(blind, "--drr-grid", "drr_grid", "comma-separated DRR grid in dB");

  auto* reverb = app.add_subcommand("reverberate", "convolve a dry signal with an RIR");
  ov.add(reverb, "-i,--in", "in", "dry wav");
  ov.add(reverb, "--rir", "rir", "RIR file");
  ov.add(reverb, "--path", "path", "time (direct convolution) or operator (STFT-domain kernel)");
  ov.add(reverb, "-o,--out", "out", "reverberant wav");

  auto* derev = app.add_subcommand("dereverb", "training-less dereverberation");
  ov.add(derev, "-i,--in", "in", "reverberant wav");
  ov.add(derev, "-o,--out", "out", "dry estimate wav");
  ov.add(derev, "--rir", "rir", "known RIR (Dirac oracle)");
  ov.add(derev, "--rt60", "rt60", "oracle RT60 in seconds");
  ov.add(derev, "--drr", "drr_db", "oracle DRR in dB");
  ov.add(derev, "--calibration", "calibration", "calibration file (blind mode)");
  ov.add(derev, "--inner-iters", "inner_iters", "blind mode: solver iterations per DRR grid point");
  ov.add(derev, "--drr-grid", "drr_grid", "blind mode: comma-separated DRR grid in dB");
  ov.add(derev, "--max-iters", "max_iters", "iteration budget");
  ov.add(derev, "--step-size", "step_size", "step size");
  ov.add(derev, "--step-rule", "step_rule", "adam or fixed");
  ov.add(derev, "--trace", "trace", "write per-iteration records here");

  auto* eval = app.add_subcommand("eval", "SISDR and parameter errors");
  ov.add(eval, "--est", "est", "estimate wav");
  ov.add(eval, "--ref", "ref", "reference wav");
  ov.add(eval, "--list", "list", "manifest: '<est wav> <ref wav>' per line");
  ov.add(eval, "--estimate", "estimate", "parameter estimate record");
  ov.add(eval, "--truth", "truth", "true AcousticParams record");

  auto* bench = app.add_subcommand("bench", "kernel accuracy (and throughput) versus band radius");
  bool timing = false;
  bench->add_flag("--timing", timing, "add wall-clock columns (not reproducible)");
  ov.add(bench, "--instances", "instances", "random (s, h) pairs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Settings s;
    if (!config_path.empty()) s.kv = KeyValueRecord::load(config_path);
    ov.apply(s.kv);
    set_num_threads(workers);

    if (*sample) return cmd_sample_rir(s);
    if (*analyze) return cmd_analyze_rir(s);
    if (*calibrate) return cmd_calibrate(s);
    if (*blind) return cmd_analyze_blind(s);
    if (*reverb) return cmd_reverberate(s);
    if (*derev) return cmd_dereverb(s);
    if (*eval) return cmd_eval(s);
    if (*bench) return cmd_bench(s, timing);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
