// epiclust: command-line front end.
//
//   epiclust synth            write a synthetic match file and its ground-truth sidecar
//   epiclust estimate         estimate F from a match file
//   epiclust decision-figure  export per-point (rho, delta, gamma) records
//   epiclust evaluate         ground-truth distance d1 between two F files
//   epiclust benchmark        compare estimators, optionally sweeping the threshold
//
// Exit codes: 0 success, 2 input or flag error, 3 estimation failure.

#include <epiclust/epiclust.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace epiclust;

constexpr int kExitInput = 2;
constexpr int kExitEstimation = 3;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return in;
}

/// Writes `fn(stream)` to `path`, or to stdout when the path is empty or "-".
template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  fn(out);
}

std::vector<MatchPair> load_matches(const std::string& path) {
  auto in = open_input(path);
  try {
    return io::read_matches(in);
  } catch (const ParseError& e) {
    throw InputError(path + ": " + e.what());
  }
}

struct EstimateOptions {
  std::string matches;
  std::string method = "proposed";
  std::string out;
  double th = 1.0;
  double confidence = 0.99;
  double alpha = 0.011;
  std::uint64_t seed = 0;
  std::size_t max_iter = 100000;
  std::size_t lmeds_trials = 1000;
  double dc_fraction = 0.02;
  bool no_normalize = false;
};

int run_estimate(const EstimateOptions& o) {
  const auto method = parse_method(o.method);
  if (!method) throw InputError("unknown method '" + o.method + "'");
  const auto pairs = load_matches(o.matches);
  if (pairs.size() < 8) {
    throw InputError(o.matches + ": estimation needs at least 8 pairs, found " + std::to_string(pairs.size()));
  }

  RansacConfig rc;
  rc.threshold = o.th;
  rc.confidence = o.confidence;
  rc.max_iterations = o.max_iter;
  rc.seed = o.seed;
  rc.normalize = !o.no_normalize;

  std::optional<EstimateResult> est;
  std::optional<PipelineReport> report;
  switch (*method) {
    case Method::EightPoint: est = eight_point_estimate(pairs, rc.normalize); break;
    case Method::SevenPoint: est = seven_point_estimate(pairs, rc.normalize); break;
    case Method::Lmeds: est = lmeds(pairs, o.lmeds_trials, o.seed, rc.normalize); break;
    case Method::Ransac: est = ransac(pairs, rc); break;
    case Method::Proposed: {
      PipelineConfig pc;
      pc.alpha = o.alpha;
      pc.dc_fraction = o.dc_fraction;
      pc.ransac = rc;
      report = clustering_assisted_estimate(pairs, pc);
      est = report->estimate;
      break;
    }
  }

  with_output(o.out, [&](std::ostream& out) { io::write_fmatrix(out, est->f_matrix); });

  std::cerr << "method: " << method_name(*method) << '\n'
            << "pairs: " << pairs.size() << '\n'
            << "inliers: " << est->inlier_count() << '\n'
            << "iterations: " << est->iterations_used << '\n'
            << "mean_error_px: " << io::format_double(est->mean_inlier_error) << '\n'
            << "time_ms: " << io::format_time_ms(est->elapsed.count() * 1e3) << '\n';
  if (report) {
    std::cerr << "cluster_selected: " << report->cluster_selection.inlier_indices.size() << '\n'
              << "cluster_threshold: " << io::format_double(report->cluster_selection.threshold_value) << '\n'
              << "d_c: " << io::format_double(report->density.d_c) << '\n'
              << "stage_cluster_ms: " << io::format_time_ms(report->stage_timings.cluster.count() * 1e3) << '\n'
              << "stage_ransac_ms: " << io::format_time_ms(report->stage_timings.ransac.count() * 1e3) << '\n'
              << "stage_refit_ms: " << io::format_time_ms(report->stage_timings.refit.count() * 1e3) << '\n';
  }
  return 0;
}

struct SynthOptions {
  SyntheticSceneConfig scene;
  std::string matches_out;
  std::string truth_out;
};

int run_synth(const SynthOptions& o) {
  try {
    o.scene.validate();
  } catch (const Error& e) {
    throw InputError(e.what());
  }
  const auto scene = generate_scene(o.scene);
  with_output(o.matches_out, [&](std::ostream& out) { io::write_matches(out, scene.pairs); });
  with_output(o.truth_out, [&](std::ostream& out) { io::write_ground_truth(out, scene.f0, scene.truth_mask); });
  return 0;
}

struct FigureOptions {
  std::string matches;
  std::string out;
  std::string svg;
  double alpha = 0.011;
  double dc_fraction = 0.02;
};

int run_decision_figure(const FigureOptions& o) {
  const auto pairs = load_matches(o.matches);
  PipelineConfig pc;
  pc.alpha = o.alpha;
  pc.dc_fraction = o.dc_fraction;
  const auto fig = decision_figure(pairs, pc);
  with_output(o.out, [&](std::ostream& out) { io::write_decision_figure(out, fig); });
  if (!o.svg.empty()) {
    with_output(o.svg, [&](std::ostream& out) { io::write_decision_svg(out, fig); });
  }
  return 0;
}

struct EvaluateOptions {
  std::string f0;
  std::string f1;
  EvaluationConfig config;
};

FundamentalMatrix load_fmatrix(const std::string& path) {
  auto in = open_input(path);
  try {
    // The ground-truth reader also accepts a bare fmatrix file.
    return io::read_ground_truth(in).f0;
  } catch (const ParseError& e) {
    throw InputError(path + ": " + e.what());
  }
}

int run_evaluate(const EvaluateOptions& o) {
  const auto f0 = load_fmatrix(o.f0);
  const auto f1 = load_fmatrix(o.f1);
  const auto report = zhang_error(f0, f1, o.config);
  std::cout << "d1_px: " << io::format_double(report.d1) << '\n'
            << "trials: " << report.per_trial.size() << '\n'
            << "retries: " << report.retries_used << '\n';
  return 0;
}

struct BenchmarkOptions {
  std::string matches;
  std::string truth;
  std::string out;
  std::vector<std::string> methods;
  std::vector<double> sweep_th;
  std::vector<double> sweep_alpha;
  double th = 2.2;
  double alpha = 0.011;
  SyntheticSceneConfig scene;
  BenchmarkConfig config;
};

int run_benchmark(BenchmarkOptions o) {
  if (o.methods.empty()) throw InputError("no methods given");
  std::vector<Method> methods;
  for (const auto& name : o.methods) {
    const auto m = parse_method(name);
    if (!m) throw InputError("unknown method '" + name + "'");
    methods.push_back(*m);
  }
  o.config.thresholds = o.sweep_th.empty() ? std::vector<double>{o.th} : o.sweep_th;
  o.config.alphas = o.sweep_alpha.empty() ? std::vector<double>{o.alpha} : o.sweep_alpha;
  if (o.config.alphas.size() != 1 && o.config.alphas.size() != o.config.thresholds.size()) {
    throw InputError("--sweep-alpha needs one value per threshold");
  }

  Dataset data;
  if (!o.matches.empty()) {
    data.pairs = load_matches(o.matches);
    if (!o.truth.empty()) {
      auto in = open_input(o.truth);
      try {
        data.f0 = io::read_ground_truth(in).f0;
      } catch (const ParseError& e) {
        throw InputError(o.truth + ": " + e.what());
      }
    }
  } else {
    try {
      o.scene.validate();
    } catch (const Error& e) {
      throw InputError(e.what());
    }
    auto scene = generate_scene(o.scene);
    data.pairs = std::move(scene.pairs);
    data.f0 = scene.f0;
  }
  o.config.evaluation.width = o.scene.width;
  o.config.evaluation.height = o.scene.height;

  const auto rows = benchmark(data, methods, o.config);
  with_output(o.out, [&](std::ostream& out) { io::write_benchmark(out, rows); });
  const bool any_ok = std::any_of(rows.begin(), rows.end(), [](const BenchmarkRow& r) { return r.status == "ok"; });
  return any_ok ? 0 : kExitEstimation;
}

void add_scene_flags(CLI::App* cmd, SyntheticSceneConfig& scene) {
  cmd->add_option("--n", scene.num_points, "Number of correspondences")->capture_default_str();
  cmd->add_option("--sigma", scene.noise_sigma, "Gaussian pixel noise (per coordinate)")->capture_default_str();
  cmd->add_option("--outliers", scene.outlier_fraction, "Fraction of planted mismatches in [0,1)")
      ->capture_default_str();
  cmd->add_option("--width", scene.width, "Image width in pixels")->capture_default_str();
  cmd->add_option("--height", scene.height, "Image height in pixels")->capture_default_str();
  cmd->add_option("--focal", scene.focal, "Focal length in pixels")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fundamental-matrix estimation with a density-peaks prefilter"};
  app.require_subcommand(1);

  EstimateOptions est;
  auto* estimate = app.add_subcommand("estimate", "Estimate F from a match file");
  estimate->add_option("matches", est.matches, "Match file (x y x' y' per line)")->required();
  estimate->add_option("--method", est.method, "eight-point | seven-point | ransac | lmeds | proposed")
      ->capture_default_str();
  estimate->add_option("--th", est.th, "Inlier threshold in pixels")->capture_default_str();
  estimate->add_option("--confidence", est.confidence, "RANSAC confidence p")->capture_default_str();
  estimate->add_option("--alpha", est.alpha, "Cluster threshold coefficient")->capture_default_str();
  estimate->add_option("--seed", est.seed, "RNG seed")->capture_default_str();
  estimate->add_option("--max-iter", est.max_iter, "RANSAC iteration cap")->capture_default_str();
  estimate->add_option("--lmeds-trials", est.lmeds_trials, "LMedS sample count")->capture_default_str();
  estimate->add_option("--dc-fraction", est.dc_fraction, "Cutoff-distance target fraction")->capture_default_str();
  estimate->add_flag("--no-normalize", est.no_normalize, "Solve in raw pixel coordinates");
  estimate->add_option("--out", est.out, "Write F here instead of stdout");

  SynthOptions syn;
  auto* synth = app.add_subcommand("synth", "Write a synthetic scene");
  add_scene_flags(synth, syn.scene);
  synth->add_option("--seed", syn.scene.seed, "RNG seed")->capture_default_str();
  synth->add_option("--matches-out", syn.matches_out, "Match file to write")->required();
  synth->add_option("--truth-out", syn.truth_out, "Ground-truth sidecar to write")->required();

  FigureOptions fig;
  auto* figure = app.add_subcommand("decision-figure", "Export density-peaks decision records");
  figure->add_option("matches", fig.matches, "Match file")->required();
  figure->add_option("--alpha", fig.alpha, "Cluster threshold coefficient")->capture_default_str();
  figure->add_option("--dc-fraction", fig.dc_fraction, "Cutoff-distance target fraction")->capture_default_str();
  figure->add_option("--out", fig.out, "CSV output (stdout by default)");
  figure->add_option("--svg", fig.svg, "Also write a scatter plot as SVG");

  EvaluateOptions ev;
  auto* evaluate = app.add_subcommand("evaluate", "Ground-truth distance between two F files");
  evaluate->add_option("--f0", ev.f0, "Ground-truth F file (fmatrix or groundtruth format)")->required();
  evaluate->add_option("--f1", ev.f1, "Estimated F file")->required();
  evaluate->add_option("--trials", ev.config.trials, "Sampled point pairs")->capture_default_str();
  evaluate->add_option("--seed", ev.config.seed, "RNG seed")->capture_default_str();
  evaluate->add_option("--width", ev.config.width, "Image width")->capture_default_str();
  evaluate->add_option("--height", ev.config.height, "Image height")->capture_default_str();

  BenchmarkOptions bench;
  auto* bm = app.add_subcommand("benchmark", "Compare estimators on a match file or a synthetic scene");
  bm->add_option("--matches", bench.matches, "Match file (synthesizes a scene when omitted)");
  bm->add_option("--truth", bench.truth, "Ground-truth sidecar for d1");
  bm->add_option("--methods", bench.methods, "Comma-separated method list")->delimiter(',');
  bm->add_option("--th", bench.th, "Inlier threshold")->capture_default_str();
  bm->add_option("--sweep-th", bench.sweep_th, "Comma-separated thresholds")->delimiter(',');
  bm->add_option("--alpha", bench.alpha, "Cluster threshold coefficient")->capture_default_str();
  bm->add_option("--sweep-alpha", bench.sweep_alpha, "One alpha per swept threshold")->delimiter(',');
  bm->add_option("--seed", bench.config.seed, "Estimator RNG seed")->capture_default_str();
  bm->add_option("--scene-seed", bench.scene.seed, "Synthetic scene seed")->capture_default_str();
  bm->add_option("--confidence", bench.config.confidence, "RANSAC confidence")->capture_default_str();
  bm->add_option("--max-iter", bench.config.max_iterations, "RANSAC iteration cap")->capture_default_str();
  bm->add_option("--lmeds-trials", bench.config.lmeds_trials, "LMedS sample count")->capture_default_str();
  bm->add_option("--dc-fraction", bench.config.dc_fraction, "Cutoff-distance target fraction")
      ->capture_default_str();
  bm->add_option("--eval-trials", bench.config.evaluation.trials, "Ground-truth metric trials")
      ->capture_default_str();
  bm->add_option("--eval-seed", bench.config.evaluation.seed, "Ground-truth metric seed")->capture_default_str();
  bm->add_option("--out", bench.out, "CSV output (stdout by default)");
  add_scene_flags(bm, bench.scene);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*estimate) return run_estimate(est);
    if (*synth) return run_synth(syn);
    if (*figure) return run_decision_figure(fig);
    if (*evaluate) return run_evaluate(ev);
    if (*bm) return run_benchmark(bench);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::InvalidArgument || e.kind() == ErrorKind::Parse ? kExitInput : kExitEstimation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitEstimation;
  }
  return kExitInput;
}
