// liff: light-field feature detection, matching, synthetic evaluation and
// benchmarking. Exit codes: 0 success, 2 input error, 3 parameter error.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "liff/liff.hpp"
#include "liff/lightfield_io.hpp"

namespace fs = std::filesystem;
using namespace liff;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitParameter = 3;

std::vector<double> parse_slopes(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  require(parts.size() == 3, ErrorKind::invalid_parameter,
          "slopes must be given as min:max:count");
  try {
    const double lo = std::stod(parts[0]);
    const double hi = std::stod(parts[1]);
    const int count = std::stoi(parts[2]);
    return linear_slopes(lo, hi, count);
  } catch (const std::logic_error&) {
    fail(ErrorKind::invalid_parameter, "slopes must be given as min:max:count");
  }
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(p, &used));
      require(used == p.size(), ErrorKind::invalid_parameter, "");
    } catch (const std::exception&) {
      fail(ErrorKind::invalid_parameter, std::string("bad number '") + p + "' in " + what);
    }
  }
  require(!out.empty(), ErrorKind::invalid_parameter, std::string(what) + " is empty");
  return out;
}

std::vector<DetectorKind> parse_detectors(const std::string& text) {
  std::vector<DetectorKind> out;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) out.push_back(detector_from_string(p));
  require(!out.empty(), ErrorKind::invalid_parameter, "detector list is empty");
  return out;
}

struct ParamFlags {
  std::string slopes;
  double peak = 0.0066;
  double edge = 10.0;
  int octaves = 4;
  int levels = 3;
  int first_octave = -1;
  double agreement = 0.25;

  void add_to(CLI::App& app) {
    app.add_option("--slopes", slopes, "Slope list min:max:count (default: one per view row over [-1,1])");
    app.add_option("--peak-threshold", peak, "DoG peak threshold")->capture_default_str();
    app.add_option("--edge-threshold", edge, "Edge rejection ratio")->capture_default_str();
    app.add_option("--octaves", octaves, "Number of octaves")->capture_default_str();
    app.add_option("--levels", levels, "Levels per octave")->capture_default_str();
    app.add_option("--first-octave", first_octave, "First octave (-1 upsamples)")
        ->capture_default_str();
    app.add_option("--agreement", agreement, "Repeated SIFT: fraction of agreeing views")
        ->capture_default_str();
  }

  DetectorParams params() const {
    DetectorParams p;
    p.peak_threshold = peak;
    p.edge_threshold = edge;
    p.num_octaves = octaves;
    p.levels_per_octave = levels;
    p.first_octave = first_octave;
    if (!slopes.empty()) p.slopes = parse_slopes(slopes);
    p.validate();
    return p;
  }

  ConsolidationParams consolidation() const {
    ConsolidationParams cp;
    cp.agreement = agreement;
    cp.validate();
    return cp;
  }
};

// A lone PNG becomes a 1x1-view light field.
LightField load_input(const fs::path& path) {
  require(fs::exists(path), ErrorKind::invalid_input,
          "invalid light field: " + path.string() + " does not exist");
  LightField lf;
  if (path.extension() == ".png") {
    const Image img = load_image_png(path);
    lf = LightField({1, 1, img.nu(), img.nv()}, 1, 0.0);
    lf.set_view(0, 0, img);
  } else {
    lf = load_lightfield(path);
  }
  if (!lf.is_grayscale()) lf = to_grayscale(lf);
  return lf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorKind::invalid_input,
          "cannot open " + path.string() + " for writing");
  os << text;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

int cmd_detect(const std::string& detector, const ParamFlags& flags, const fs::path& input,
               const fs::path& output) {
  const DetectorKind kind = detector_from_string(detector);
  DetectorParams params = flags.params();
  const LightField lf = load_input(input);
  if (lf.dims().views() == 1 && params.slopes.empty()) params.slopes = {0.0};
  StageTimings timings;
  const auto features =
      run_detector(kind, lf, params, flags.consolidation(), &timings, worker_count());
  save_features(features, output);
  std::fprintf(stderr, "%zu features (%s) in %.3f s\n", features.size(), detector.c_str(),
               timings.total());
  return 0;
}

int cmd_match(const fs::path& a, const fs::path& b, double ratio, const fs::path& out) {
  require(ratio > 0.0 && ratio <= 1.0, ErrorKind::invalid_parameter,
          "ratio must lie in (0, 1]");
  const auto fa = load_features(a);
  const auto fb = load_features(b);
  std::string text = "a,b,distance\n";
  for (const auto& m : match_features(fa, fb, ratio))
    text += std::to_string(m.a) + "," + std::to_string(m.b) + "," + fmt(m.distance) + "\n";
  write_text(out, text);
  return 0;
}

SyntheticScene load_scene(const std::string& path) {
  if (path.empty()) return standard_scene();
  std::ifstream is(path);
  require(static_cast<bool>(is), ErrorKind::invalid_input, "cannot open " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::invalid_parameter, std::string("invalid scene config: ") + e.what());
  }
  return scene_from_json(j);
}

int cmd_synth_eval(const std::string& config, const std::string& variances,
                   const std::string& thresholds, int trials, std::uint64_t seed,
                   const std::string& detectors, const ParamFlags& flags,
                   const fs::path& out) {
  SweepConfig cfg;
  cfg.variances = parse_list(variances, "variances");
  cfg.thresholds = parse_list(thresholds, "thresholds");
  cfg.trials = trials;
  cfg.seed = seed;
  cfg.detectors = parse_detectors(detectors);
  cfg.params = flags.params();
  cfg.consolidation = flags.consolidation();
  const SyntheticScene scene = load_scene(config);
  if (cfg.params.slopes.empty()) cfg.params.slopes = default_slopes(scene.dims);

  std::ofstream os(out, std::ios::binary);
  require(static_cast<bool>(os), ErrorKind::invalid_input,
          "cannot open " + out.string() + " for writing");
  os << "kind,detector,variance,threshold,trial,seed,tp_rate,tp,fp,slope_rmse\n";
  const auto results = run_sweep(scene, cfg, [&](const TrialResult& r) {
    os << "trial," << to_string(r.detector) << ',' << fmt(r.variance) << ','
       << fmt(r.threshold) << ',' << r.trial << ',' << r.seed << ','
       << fmt(r.report.tp_rate) << ',' << r.report.tp_count << ',' << r.report.fp_count
       << ',' << fmt(r.report.slope_rmse) << '\n';
    os.flush();
    std::fprintf(stderr, "%s var %g thr %g trial %d: tp %d fp %d\n",
                 to_string(r.detector).c_str(), r.variance, r.threshold, r.trial,
                 r.report.tp_count, r.report.fp_count);
  });
  for (const auto& m : summarize(results))
    os << "mean," << to_string(m.detector) << ',' << fmt(m.variance) << ','
       << fmt(m.threshold) << ",," << ',' << fmt(m.tp_rate) << ",," << fmt(m.fp_count)
       << ',' << fmt(m.slope_rmse) << '\n';
  return 0;
}

int cmd_bench(const fs::path& input, const std::string& detectors, int repeats,
              const ParamFlags& flags, const fs::path& out) {
  require(repeats >= 1, ErrorKind::invalid_parameter, "repeats must be at least 1");
  const auto kinds = parse_detectors(detectors);
  DetectorParams params = flags.params();
  const LightField lf = load_input(input);
  if (params.slopes.empty()) params.slopes = default_slopes(lf.dims());
  const int workers = worker_count();

  std::string text = "detector,repeat,focal_stack,dog,extrema,descriptors,total,features\n";
  std::vector<std::pair<DetectorKind, double>> best_dog;
  for (DetectorKind kind : kinds) {
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < repeats; ++r) {
      StageTimings t;
      const auto f = run_detector(kind, lf, params, flags.consolidation(), &t, workers);
      best = std::min(best, t.dog);
      text += to_string(kind) + "," + std::to_string(r) + "," + fmt(t.focal_stack) + "," +
              fmt(t.dog) + "," + fmt(t.extrema) + "," + fmt(t.descriptors) + "," +
              fmt(t.total()) + "," + std::to_string(f.size()) + "\n";
    }
    best_dog.emplace_back(kind, best);
  }
  auto dog_of = [&](DetectorKind k) {
    for (const auto& [kind, t] : best_dog)
      if (kind == k) return t;
    return -1.0;
  };
  const double predicted = work_ratio(lf.dims(), static_cast<int>(params.slopes.size()));
  const double l = dog_of(DetectorKind::liff);
  const double r = dog_of(DetectorKind::repeated_sift);
  std::string ratio_row = "ratio,predicted," + fmt(predicted) + ",measured,";
  ratio_row += (l > 0 && r > 0) ? fmt(r / l) : std::string("nan");
  text += ratio_row + "\n";
  if (out.empty())
    std::cout << text;
  else
    write_text(out, text);
  std::fprintf(stderr, "predicted DoG work ratio %.3g, measured %s\n", predicted,
               (l > 0 && r > 0) ? fmt(r / l).c_str() : "n/a (needs liff and repeated-sift)");
  return 0;
}

int cmd_scene(const fs::path& out) {
  write_text(out, scene_to_json(standard_scene()).dump(2) + "\n");
  return 0;
}

int cmd_render(const std::string& config, double variance, std::uint64_t seed,
               const fs::path& out) {
  const SyntheticScene scene = load_scene(config);
  const LightField lf = add_noise(render_lf(scene), variance, seed);
  if (out.extension().empty())
    save_view_grid(lf, out);
  else
    save_packed(lf, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Light-field feature detection in scale and slope"};
  app.require_subcommand(1);

  ParamFlags detect_flags, eval_flags, bench_flags;

  auto* detect = app.add_subcommand("detect", "Detect features in a light field or image");
  std::string detector = "liff";
  std::string detect_in, detect_out;
  detect->add_option("--detector", detector, "liff, sift or repeated-sift")
      ->capture_default_str();
  detect_flags.add_to(*detect);
  detect->add_option("input", detect_in, "View-grid directory, packed file or PNG")->required();
  detect->add_option("output", detect_out, "Feature file (.csv or .bin)")->required();

  auto* match = app.add_subcommand("match", "Match two feature files");
  std::string match_a, match_b, match_out = "matches.csv";
  double ratio = 0.8;
  match->add_option("a", match_a)->required();
  match->add_option("b", match_b)->required();
  match->add_option("--ratio", ratio, "Nearest/second-nearest ratio")->capture_default_str();
  match->add_option("--out", match_out, "Match CSV")->capture_default_str();

  auto* eval = app.add_subcommand("synth-eval", "Noise sweep on a synthetic scene");
  std::string eval_config, eval_vars = "1e-3", eval_thr = "0.0066",
                           eval_det = "liff,sift", eval_out = "report.csv";
  int eval_trials = 25;
  std::uint64_t eval_seed = 1;
  eval->add_option("--config", eval_config, "Scene JSON (default: standard scene)");
  eval->add_option("--variances", eval_vars, "Comma-separated noise variances")
      ->capture_default_str();
  eval->add_option("--thresholds", eval_thr, "Comma-separated peak thresholds")
      ->capture_default_str();
  eval->add_option("--trials", eval_trials)->capture_default_str();
  eval->add_option("--seed", eval_seed)->capture_default_str();
  eval->add_option("--detectors", eval_det)->capture_default_str();
  eval->add_option("--out", eval_out)->capture_default_str();
  eval_flags.add_to(*eval);

  auto* bench = app.add_subcommand("bench", "Stage timings and DoG work ratio");
  std::string bench_in, bench_det = "liff,repeated-sift", bench_out;
  int repeats = 1;
  bench->add_option("input", bench_in)->required();
  bench->add_option("--detectors", bench_det)->capture_default_str();
  bench->add_option("--repeats", repeats)->capture_default_str();
  bench->add_option("--out", bench_out, "Timing CSV (default: stdout)");
  bench_flags.add_to(*bench);

  auto* scene = app.add_subcommand("scene", "Write the standard scene as JSON");
  std::string scene_out;
  scene->add_option("output", scene_out)->required();

  auto* render = app.add_subcommand("render", "Render a scene to a light field");
  std::string render_config, render_out;
  double render_var = 0.0;
  std::uint64_t render_seed = 1;
  render->add_option("--config", render_config, "Scene JSON (default: standard scene)");
  render->add_option("--variance", render_var)->capture_default_str();
  render->add_option("--seed", render_seed)->capture_default_str();
  render->add_option("output", render_out,
                     "Directory for a view grid, or a file path for packed output")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParameter;
  }

  try {
    if (*detect) return cmd_detect(detector, detect_flags, detect_in, detect_out);
    if (*match) return cmd_match(match_a, match_b, ratio, match_out);
    if (*eval)
      return cmd_synth_eval(eval_config, eval_vars, eval_thr, eval_trials, eval_seed,
                            eval_det, eval_flags, eval_out);
    if (*bench) return cmd_bench(bench_in, bench_det, repeats, bench_flags, bench_out);
    if (*scene) return cmd_scene(scene_out);
    if (*render) return cmd_render(render_config, render_var, render_seed, render_out);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.kind() == ErrorKind::invalid_input ? kExitInput : kExitParameter;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  }
  return 0;
}
