// repmax command-line tool: corpus generation, the filtering pipeline,
// coefficient fitting, cross-validation, and the analysis reports. Every
// file-producing command writes a run manifest alongside its outputs;
// `repmax rerun <manifest>` replays a recorded run.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "repmax/analysis.hpp"
#include "repmax/crossval.hpp"
#include "repmax/io.hpp"
#include "repmax/manifest.hpp"
#include "repmax/rng.hpp"
#include "repmax/metric.hpp"
#include "repmax/optimizer.hpp"
#include "repmax/pipeline.hpp"
#include "repmax/synth.hpp"
#include "repmax/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace repmax;

namespace {

// Exit codes: 0 success, 2 input/usage error, 3 computation error.
constexpr int kExitInput = 2;
constexpr int kExitCompute = 3;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int run_cli(std::vector<std::string> args);

std::string resolve_out_dir(const std::string& out) {
  std::string dir = out;
  if (dir.empty()) {
    if (const char* env = std::getenv("REPMAX_OUT_DIR")) dir = env;
  }
  if (dir.empty())
    throw InputError("no output directory: pass --out or set REPMAX_OUT_DIR");
  fs::create_directories(dir);
  return dir;
}

struct OutputSet {
  std::string dir;
  std::string prefix;  // "<run-id>." when --run-id is set
  std::vector<std::string> written;

  std::string path(const std::string& name) {
    std::string p = (fs::path(dir) / (prefix + name)).string();
    written.push_back(p);
    return p;
  }
};

struct ManifestBuilder {
  RunManifest m;

  ManifestBuilder(const std::string& command,
                  const std::vector<std::string>& argv) {
    m.tool = kToolName;
    m.version = kToolVersion;
    m.command = command;
    m.argv = argv;
    m.cwd = fs::current_path().string();
    m.params = json::object();
  }

  void input(const std::string& path) {
    try {
      m.inputs.push_back({path, sha256_file_hex(path)});
    } catch (const std::exception& e) {
      throw InputError(e.what());
    }
  }

  void finish(OutputSet& out) {
    m.outputs = out.written;
    write_manifest(out.path("manifest.json"), m);
  }
};

// Spec selection shared by the analysis commands: either explicit
// coefficients (default: the fitted full-sample values) or a spec/fit JSON.
struct SpecOpts {
  double alpha = kDefaultAlpha;
  double a = -2.55;
  double b = 4.58;
  double k = 0.0;  // > 0 selects the fixed-k model
  double k_floor = kDefaultKFloor;
  std::string spec_file;
};

void add_spec_options(CLI::App* cmd, SpecOpts& opts) {
  cmd->add_option("--alpha", opts.alpha, "Rep exponent");
  cmd->add_option("--a", opts.a, "k(w) intercept");
  cmd->add_option("--b", opts.b, "k(w) slope on ln(weight)");
  cmd->add_option("--k", opts.k, "Fixed conversion factor (overrides --a/--b)");
  cmd->add_option("--k-floor", opts.k_floor, "Lower bound on k(w)");
  cmd->add_option("--spec-file", opts.spec_file,
                  "Formula spec JSON (or a fit.json; its 'spec' field is used)");
}

FormulaSpec resolve_spec(const SpecOpts& opts) {
  if (!opts.spec_file.empty()) {
    json j = read_json(opts.spec_file);
    if (j.contains("spec")) j = j["spec"];
    return formula_spec_from_json(j);
  }
  if (opts.k > 0.0)
    return FormulaSpec::fixed(opts.alpha, opts.k, opts.k_floor);
  return FormulaSpec::log_linear(opts.alpha, opts.a, opts.b, opts.k_floor);
}

SdConvention parse_convention(const std::string& name) {
  if (name == "sample") return SdConvention::sample;
  if (name == "population") return SdConvention::population;
  throw InputError("unknown SD convention: " + name);
}

std::vector<ObservationTuple> load_tuples_checked(const std::string& path) {
  std::vector<ObservationTuple> tuples;
  try {
    tuples = load_tuples(path);
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }
  if (tuples.empty()) throw InputError("no tuples in " + path);
  return tuples;
}

PipelineInputs load_pipeline_inputs(const std::string& sets_path,
                                    const std::string& users_path,
                                    const std::string& exercises_path) {
  PipelineInputs inputs;
  LoadResult<RawSetRecord> sets;
  LoadResult<UserProfile> users;
  LoadResult<ExerciseMeta> exercises;
  try {
    sets = load_sets(sets_path);
    users = load_users(users_path);
    exercises = load_exercises(exercises_path);
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }
  for (const auto& e : sets.errors)
    std::cerr << "warning: " << sets_path << ":" << e << "\n";
  for (const auto& e : users.errors)
    std::cerr << "warning: " << users_path << ":" << e << "\n";
  for (const auto& e : exercises.errors)
    std::cerr << "warning: " << exercises_path << ":" << e << "\n";
  if (sets.rows.empty())
    throw InputError("no set records parsed from " + sets_path +
                     " (expected JSONL or CSV with the documented fields)");
  inputs.records = std::move(sets.rows);
  inputs.profiles = std::move(users.rows);
  inputs.exercises = std::move(exercises.rows);
  inputs.malformed = sets.malformed;
  return inputs;
}

json fit_params_json(double alpha, const FitOptions& options) {
  json j;
  j["alpha"] = alpha;
  j["k_floor"] = options.k_floor;
  j["sd_convention"] = sd_convention_name(options.convention);
  j["threads"] = options.threads;
  j["coarse_grid"] = {{"a_min", options.coarse.a_min},
                      {"a_max", options.coarse.a_max},
                      {"a_step", options.coarse.a_step},
                      {"b_min", options.coarse.b_min},
                      {"b_max", options.coarse.b_max},
                      {"b_step", options.coarse.b_step}};
  j["refine"] = {{"a_half", options.refine_a_half},
                 {"a_step", options.refine_a_step},
                 {"b_half", options.refine_b_half},
                 {"b_step", options.refine_b_step}};
  return j;
}

// ---------------------------------------------------------------------------
// Subcommand drivers
// ---------------------------------------------------------------------------

int cmd_estimate(const std::vector<std::string>& argv, double weight,
                 const std::string& unit, int reps, const std::string& formula,
                 const SpecOpts& spec_opts, const std::string& out) {
  const double weight_kg = unit == "lb" ? weight * kLbToKg : weight;
  Estimator estimator;
  if (formula == "proposed") {
    estimator = resolve_spec(spec_opts);
  } else if (formula == "brzycki") {
    estimator = ClassicalFormula::brzycki;
  } else if (formula == "epley") {
    estimator = ClassicalFormula::epley;
  } else if (formula == "wathen") {
    estimator = ClassicalFormula::wathen;
  } else {
    estimator = ClassicalFormula::mayhew;
  }

  const double est = estimate(estimator, weight_kg, reps);
  std::printf("estimated 1RM: %.2f kg (%s, %.2f kg x %d reps)\n", est,
              formula.c_str(), weight_kg, reps);

  if (!out.empty() || std::getenv("REPMAX_OUT_DIR")) {
    OutputSet outputs{resolve_out_dir(out), "", {}};
    ManifestBuilder manifest("estimate", argv);
    manifest.m.params = {{"weight", weight},
                         {"unit", unit},
                         {"weight_kg", weight_kg},
                         {"reps", reps},
                         {"formula", formula}};
    json result;
    result["formula"] = formula;
    result["weight_kg"] = weight_kg;
    result["reps"] = reps;
    result["estimate_kg"] = est;
    if (formula == "proposed")
      result["spec"] = formula_spec_json(resolve_spec(spec_opts));
    write_json(outputs.path("estimate.json"), result);
    manifest.finish(outputs);
  }
  return 0;
}

int cmd_synth(const std::vector<std::string>& argv, const SynthConfig& config,
              const std::string& out, const std::string& run_id) {
  OutputSet outputs{resolve_out_dir(out),
                    run_id.empty() ? "" : run_id + ".", {}};
  ManifestBuilder manifest("synth", argv);

  SynthCorpus corpus;
  try {
    corpus = generate_corpus(config);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }

  write_sets_jsonl(outputs.path("sets.jsonl"), corpus.records);
  write_users_jsonl(outputs.path("users.jsonl"), corpus.profiles);
  write_exercises_jsonl(outputs.path("exercises.jsonl"), corpus.exercises);
  write_json(outputs.path("ground_truth.json"),
             ground_truth_json(corpus.truth));

  manifest.m.params = {{"seed", config.seed},
                       {"n_users", config.n_users},
                       {"rep_noise_sd", config.rep_noise_sd},
                       {"amrap_rate", config.amrap_rate},
                       {"sessions_per_user", config.sessions_per_user},
                       {"session_gap_days", config.session_gap_days},
                       {"exercises_per_user", config.exercises_per_user},
                       {"start_date", format_date(config.start_date)},
                       {"start_jitter_days", config.start_jitter_days},
                       {"minor_fraction", config.minor_fraction},
                       {"weight_increment_kg", config.weight_increment_kg},
                       {"truth", formula_spec_json(config.truth)},
                       {"prng", kPrngName}};
  manifest.finish(outputs);

  std::printf("synth: %lld sets, %d users, %zu exercises\n",
              static_cast<long long>(corpus.truth.stats.n_sets),
              config.n_users, corpus.exercises.size());
  std::printf("  near-failure sets: %lld (mean reps %.2f, median %.1f, "
              "mean weight %.1f kg)\n",
              static_cast<long long>(corpus.truth.stats.n_nf_sets),
              corpus.truth.stats.mean_reps, corpus.truth.stats.median_reps,
              corpus.truth.stats.mean_weight_kg);
  return 0;
}

int cmd_pipeline(const std::vector<std::string>& argv,
                 const std::string& sets_path, const std::string& users_path,
                 const std::string& exercises_path, int window_days,
                 int subsample_pct, const std::string& out,
                 const std::string& run_id) {
  OutputSet outputs{resolve_out_dir(out),
                    run_id.empty() ? "" : run_id + ".", {}};
  ManifestBuilder manifest("pipeline", argv);
  manifest.input(sets_path);
  manifest.input(users_path);
  manifest.input(exercises_path);

  const PipelineInputs inputs =
      load_pipeline_inputs(sets_path, users_path, exercises_path);
  PipelineOptions options;
  options.window_days = window_days;
  if (subsample_pct >= 0) options.subsample_pct = subsample_pct;

  const PipelineResult result = run_pipeline(inputs, options);

  write_tuples_jsonl(outputs.path("tuples.jsonl"), result.tuples);
  write_nf_sets_jsonl(outputs.path("deduped_sets.jsonl"), result.deduped_sets);
  write_json(outputs.path("filter_report.json"),
             filter_report_json(result.report));

  manifest.m.params = {{"window_days", window_days},
                       {"subsample_pct", subsample_pct >= 0
                                             ? json(subsample_pct)
                                             : json(nullptr)}};
  manifest.finish(outputs);

  std::printf("%-5s %-32s %10s %8s\n", "step", "description", "sets", "users");
  for (const auto& s : result.report.steps)
    std::printf("%-5d %-32s %10lld %8lld\n", s.step, s.description.c_str(),
                static_cast<long long>(s.sets),
                static_cast<long long>(s.users));
  std::printf("tuples: %lld\n", static_cast<long long>(result.report.tuples));
  return 0;
}

int cmd_fit(const std::vector<std::string>& argv, const std::string& tuples_path,
            double alpha, const FitOptions& options, const std::string& out,
            const std::string& run_id) {
  OutputSet outputs{resolve_out_dir(out),
                    run_id.empty() ? "" : run_id + ".", {}};
  ManifestBuilder manifest("fit", argv);
  manifest.input(tuples_path);

  const auto tuples = load_tuples_checked(tuples_path);
  std::printf("fitting %zu tuples: %lld coarse + 441 refinement points, "
              "alpha=%.2f\n",
              tuples.size(),
              static_cast<long long>(options.coarse.point_count()), alpha);
  std::fflush(stdout);
  const FitResult result = fit(tuples, alpha, options);

  write_json(outputs.path("fit.json"), fit_result_json(result));
  write_surface_csv(outputs.path("coarse_surface.csv"), result.coarse_surface);
  write_surface_csv(outputs.path("refine_surface.csv"), result.refine_surface);

  manifest.m.params = fit_params_json(alpha, options);
  manifest.finish(outputs);

  std::printf("fit: a=%.4f b=%.4f objective=%.6f (%zu tuples, %zu+%zu grid "
              "points)\n",
              result.a_opt, result.b_opt, result.objective, tuples.size(),
              result.coarse_surface.size(), result.refine_surface.size());
  return 0;
}

int cmd_cv(const std::vector<std::string>& argv, const std::string& tuples_path,
           int folds, std::uint64_t seed, double alpha,
           const FitOptions& options, const std::string& out,
           const std::string& run_id) {
  OutputSet outputs{resolve_out_dir(out),
                    run_id.empty() ? "" : run_id + ".", {}};
  ManifestBuilder manifest("cv", argv);
  manifest.input(tuples_path);

  const auto tuples = load_tuples_checked(tuples_path);
  const CvReport report = run_cv(tuples, folds, seed, alpha, options);

  write_json(outputs.path("cv.json"), cv_report_json(report));
  write_cv_csv(outputs.path("cv.csv"), report);

  manifest.m.params = fit_params_json(alpha, options);
  manifest.m.params["n_folds"] = folds;
  manifest.m.params["seed"] = seed;
  manifest.m.params["prng"] = report.prng;
  manifest.finish(outputs);

  std::printf("%-5s %9s %9s %10s %10s %11s %11s\n", "fold", "a", "b",
              "train_sd", "test_sd", "vs_brzycki", "overfit%");
  for (const auto& f : report.folds)
    std::printf("%-5d %9.4f %9.4f %10.6f %10.6f %+10.2f%% %+10.2f%%\n",
                f.fold + 1, f.a, f.b, f.train_sd, f.test_sd,
                f.improvement_vs.at("brzycki"), f.overfit_pct);
  std::printf("mean  %9.4f %9.4f %10.6f %10.6f %+10.2f%% %+10.2f%%\n",
              report.mean_a, report.mean_b, report.mean_train_sd,
              report.mean_test_sd, report.mean_improvement_vs.at("brzycki"),
              report.mean_overfit_pct);
  return 0;
}

int cmd_ablate(const std::vector<std::string>& argv,
               const std::string& tuples_path, double alpha,
               const FitOptions& options, const std::string& out,
               const std::string& run_id) {
  OutputSet outputs{resolve_out_dir(out),
                    run_id.empty() ? "" : run_id + ".", {}};
  ManifestBuilder manifest("ablate", argv);
  manifest.input(tuples_path);

  const auto tuples = load_tuples_checked(tuples_path);
  const auto rows = ablation(tuples, alpha, options);

  write_json(outputs.path("ablation.json"), ablation_json(rows));
  write_ablation_csv(outputs.path("ablation.csv"), rows);

  manifest.m.params = fit_params_json(alpha, options);
  manifest.finish(outputs);

  for (const auto& r : rows) {
    std::printf("%-12s objective=%.6f", r.model.c_str(), r.objective);
    if (r.improvement_vs_brzycki)
      std::printf(" vs_brzycki=%+.2f%%", *r.improvement_vs_brzycki);
    std::printf("\n");
  }
  return 0;
}

int cmd_sweep_alpha(const std::vector<std::string>& argv,
                    const std::string& tuples_path, const FitOptions& options,
                    const std::string& out, const std::string& run_id) {
  OutputSet outputs{resolve_out_dir(out),
                    run_id.empty() ? "" : run_id + ".", {}};
  ManifestBuilder manifest("sweep-alpha", argv);
  manifest.input(tuples_path);

  const auto tuples = load_tuples_checked(tuples_path);
  const auto rows = alpha_sweep(tuples, default_alpha_grid(), options);

  write_json(outputs.path("alpha_sweep.json"), alpha_sweep_json(rows));
  write_alpha_sweep_csv(outputs.path("alpha_sweep.csv"), rows);

  manifest.m.params = fit_params_json(kDefaultAlpha, options);
  manifest.finish(outputs);

  for (const auto& r : rows)
    std::printf("alpha=%.2f a=%.4f b=%.4f objective=%.6f vs_brzycki=%+.2f%%\n",
                r.alpha, r.a_opt, r.b_opt, r.objective,
                r.improvement_vs_brzycki);
  return 0;
}

int cmd_stratify(const std::vector<std::string>& argv, const std::string& by,
                 const std::string& tuples_path,
                 const std::string& exercises_path,
                 const std::string& sets_path, const std::string& users_path,
                 const std::vector<int>& windows, const SpecOpts& spec_opts,
                 const std::string& convention, const std::string& out,
                 const std::string& run_id) {
  OutputSet outputs{resolve_out_dir(out),
                    run_id.empty() ? "" : run_id + ".", {}};
  ManifestBuilder manifest("stratify", argv);
  const FormulaSpec spec = resolve_spec(spec_opts);
  const SdConvention conv = parse_convention(convention);

  std::vector<StratumRow> rows;
  StrataTable table;
  if (by == "size") {
    manifest.input(tuples_path);
    const auto tuples = load_tuples_checked(tuples_path);
    rows = stratify_tuple_size(tuples, spec, conv);
    table = StrataTable::tuple_size;
  } else if (by == "equipment") {
    manifest.input(tuples_path);
    manifest.input(exercises_path);
    const auto tuples = load_tuples_checked(tuples_path);
    LoadResult<ExerciseMeta> exercises;
    try {
      exercises = load_exercises(exercises_path);
    } catch (const std::exception& e) {
      throw InputError(e.what());
    }
    rows = stratify_equipment(tuples, exercises.rows, spec, conv);
    table = StrataTable::equipment;
  } else if (by == "window") {
    manifest.input(sets_path);
    manifest.input(users_path);
    manifest.input(exercises_path);
    const PipelineInputs inputs =
        load_pipeline_inputs(sets_path, users_path, exercises_path);
    rows = stratify_window(inputs, spec, windows, {}, conv);
    table = StrataTable::window;
  } else {
    throw InputError("--by must be one of size, window, equipment");
  }

  const std::string stem = "strata_" + by;
  write_json(outputs.path(stem + ".json"), strata_json(rows));
  write_strata_csv(outputs.path(stem + ".csv"), rows, table);

  manifest.m.params = {{"by", by},
                       {"spec", formula_spec_json(spec)},
                       {"sd_convention", convention}};
  if (by == "window") manifest.m.params["windows"] = windows;
  manifest.finish(outputs);

  for (const auto& r : rows)
    std::printf("%-10s tuples=%lld sd_brzycki=%.6f sd_ours=%.6f "
                "improvement=%+.2f%%\n",
                r.stratum.c_str(), static_cast<long long>(r.n_tuples),
                r.sd_benchmark, r.sd_ours, r.improvement);
  return 0;
}

int cmd_per_exercise(const std::vector<std::string>& argv,
                     const std::string& tuples_path,
                     const std::string& exercises_path, int min_tuples,
                     const SpecOpts& spec_opts, const std::string& convention,
                     const std::string& out, const std::string& run_id) {
  OutputSet outputs{resolve_out_dir(out),
                    run_id.empty() ? "" : run_id + ".", {}};
  ManifestBuilder manifest("per-exercise", argv);
  manifest.input(tuples_path);
  manifest.input(exercises_path);

  const FormulaSpec spec = resolve_spec(spec_opts);
  const auto tuples = load_tuples_checked(tuples_path);
  LoadResult<ExerciseMeta> exercises;
  try {
    exercises = load_exercises(exercises_path);
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }

  const PerExerciseResult result = per_exercise_improvement(
      tuples, exercises.rows, spec, min_tuples, parse_convention(convention));

  json j = per_exercise_json(result);
  if (result.rows.size() >= 3) {
    try {
      j["weight_improvement_correlation_r"] =
          weight_improvement_correlation(result.rows);
    } catch (const std::domain_error&) {
      j["weight_improvement_correlation_r"] = nullptr;
    }
  } else {
    j["weight_improvement_correlation_r"] = nullptr;
  }
  write_json(outputs.path("per_exercise.json"), j);
  write_per_exercise_csv(outputs.path("per_exercise.csv"), result);

  manifest.m.params = {{"min_tuples", min_tuples},
                       {"spec", formula_spec_json(spec)},
                       {"sd_convention", convention}};
  manifest.finish(outputs);

  for (const auto& r : result.rows)
    std::printf("%-32s %-9s tuples=%-6lld mean_wt=%6.1f vs_brzycki=%+.2f%%\n",
                r.name.c_str(), r.type.c_str(),
                static_cast<long long>(r.n_tuples), r.mean_weight_kg,
                r.improvement_vs.at("brzycki"));
  if (!j["weight_improvement_correlation_r"].is_null())
    std::printf("weight-improvement correlation r=%.3f\n",
                j["weight_improvement_correlation_r"].get<double>());
  return 0;
}

int cmd_floor_report(const std::vector<std::string>& argv,
                     const std::string& deduped_path, const SpecOpts& spec_opts,
                     const std::string& out, const std::string& run_id) {
  OutputSet outputs{resolve_out_dir(out),
                    run_id.empty() ? "" : run_id + ".", {}};
  ManifestBuilder manifest("floor-report", argv);
  manifest.input(deduped_path);

  const FormulaSpec spec = resolve_spec(spec_opts);
  std::vector<NearFailureSet> sets;
  try {
    sets = load_nf_sets(deduped_path);
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }

  const FloorActivationReport report = floor_activation_report(sets, spec);
  write_json(outputs.path("floor_report.json"), floor_report_json(report));

  manifest.m.params = {{"spec", formula_spec_json(spec)}};
  manifest.finish(outputs);

  std::printf("floor activation: %lld of %lld sets (%.4f%%)\n",
              static_cast<long long>(report.n_floored),
              static_cast<long long>(report.n_sets), report.pct);
  if (report.k_zero_at_weight_kg)
    std::printf("k(w)=0 at w=%.3f kg; k(w)=floor at w=%.3f kg\n",
                *report.k_zero_at_weight_kg, *report.k_floor_at_weight_kg);
  return 0;
}

int cmd_rerun(const std::string& manifest_path, const std::string& out) {
  RunManifest m;
  try {
    m = load_manifest(manifest_path);
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }
  std::vector<std::string> args = m.argv;
  if (!out.empty()) {
    bool replaced = false;
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
      if (args[i] == "--out") {
        args[i + 1] = out;
        replaced = true;
        break;
      }
    }
    if (!replaced) {
      args.push_back("--out");
      args.push_back(out);
    }
  }
  std::error_code ec;
  fs::current_path(m.cwd, ec);
  if (ec)
    throw InputError("cannot enter recorded working directory: " + m.cwd);
  return run_cli(std::move(args));
}

// ---------------------------------------------------------------------------
// Argument wiring
// ---------------------------------------------------------------------------

int run_cli(std::vector<std::string> args) {
  const std::vector<std::string> argv_record = args;

  CLI::App app{"1RM estimation: training-log pipeline, consistency metric, "
               "coefficient fitting, and analyses"};
  app.set_version_flag("--version",
                       std::string(kToolName) + " " + kToolVersion);
  app.require_subcommand(1);

  std::string out, run_id;
  unsigned threads = 0;
  std::string convention = "sample";

  auto add_common = [&](CLI::App* cmd, bool with_threads = true) {
    cmd->add_option("--out", out, "Output directory (or env REPMAX_OUT_DIR)");
    cmd->add_option("--run-id", run_id, "Prefix for output file names");
    if (with_threads)
      cmd->add_option("--threads", threads,
                      "Worker threads (0 = all available cores)");
  };

  // estimate
  double weight = 0.0;
  int reps = 0;
  std::string unit = "kg", formula = "proposed";
  SpecOpts spec_opts;
  auto* estimate_cmd =
      app.add_subcommand("estimate", "Estimate a 1RM from a single set");
  estimate_cmd->add_option("--weight", weight, "Weight lifted")->required();
  estimate_cmd->add_option("--unit", unit, "kg or lb")
      ->check(CLI::IsMember({"kg", "lb"}));
  estimate_cmd->add_option("--reps", reps, "Repetitions completed")->required();
  estimate_cmd
      ->add_option("--formula", formula,
                   "proposed, brzycki, epley, wathen, or mayhew")
      ->check(CLI::IsMember({"proposed", "brzycki", "epley", "wathen",
                             "mayhew"}));
  add_spec_options(estimate_cmd, spec_opts);
  estimate_cmd->add_option("--out", out, "Optional output directory");

  // synth
  SynthConfig synth_config;
  double truth_alpha = kDefaultAlpha, truth_a = -2.55, truth_b = 4.58;
  std::string start_date = format_date(synth_config.start_date);
  auto* synth_cmd =
      app.add_subcommand("synth", "Generate a synthetic training-log corpus");
  synth_cmd->add_option("--seed", synth_config.seed, "Master seed");
  synth_cmd->add_option("--users", synth_config.n_users, "Number of users");
  synth_cmd->add_option("--noise", synth_config.rep_noise_sd,
                        "SD of rep noise before rounding");
  synth_cmd->add_option("--amrap-rate", synth_config.amrap_rate,
                        "Probability a planted set is AMRAP-flagged");
  synth_cmd->add_option("--sessions", synth_config.sessions_per_user,
                        "Sessions per user");
  synth_cmd->add_option("--gap-days", synth_config.session_gap_days,
                        "Days between sessions");
  synth_cmd->add_option("--exercises-per-user",
                        synth_config.exercises_per_user,
                        "Exercises per user");
  synth_cmd->add_option("--start-date", start_date, "First session date");
  synth_cmd->add_option("--jitter-days", synth_config.start_jitter_days,
                        "Per-user stagger of the first session");
  synth_cmd->add_option("--minor-fraction", synth_config.minor_fraction,
                        "Fraction of users generated under 18");
  synth_cmd->add_option("--increment", synth_config.weight_increment_kg,
                        "Weight snap increment (kg)");
  synth_cmd->add_option("--alpha", truth_alpha, "Truth rep exponent");
  synth_cmd->add_option("--a", truth_a, "Truth k(w) intercept");
  synth_cmd->add_option("--b", truth_b, "Truth k(w) slope");
  add_common(synth_cmd, false);

  // pipeline
  std::string sets_path, users_path, exercises_path;
  int window_days = kDefaultWindowDays;
  int subsample_pct = -1;
  auto* pipeline_cmd = app.add_subcommand(
      "pipeline", "Filter raw records into observation tuples");
  pipeline_cmd->add_option("--sets", sets_path, "Sets file (JSONL or CSV)")
      ->required();
  pipeline_cmd->add_option("--users", users_path, "Users file")->required();
  pipeline_cmd->add_option("--exercises", exercises_path, "Exercises file")
      ->required();
  pipeline_cmd->add_option("--window", window_days, "Window length in days");
  pipeline_cmd->add_option("--subsample-pct", subsample_pct,
                           "Keep users with fnv1a64(user_id) %% 100 < pct");
  add_common(pipeline_cmd, false);

  // fit
  std::string tuples_path;
  double alpha = kDefaultAlpha;
  FitOptions fit_options;
  auto* fit_cmd =
      app.add_subcommand("fit", "Two-stage grid search for (a, b)");
  fit_cmd->add_option("--tuples", tuples_path, "Tuples file")->required();
  fit_cmd->add_option("--alpha", alpha, "Rep exponent (fixed during the fit)");
  fit_cmd->add_option("--k-floor", fit_options.k_floor, "Lower bound on k(w)");
  fit_cmd->add_option("--convention", convention, "sample or population")
      ->check(CLI::IsMember({"sample", "population"}));
  fit_cmd->add_option("--a-min", fit_options.coarse.a_min, "Coarse grid");
  fit_cmd->add_option("--a-max", fit_options.coarse.a_max, "Coarse grid");
  fit_cmd->add_option("--a-step", fit_options.coarse.a_step, "Coarse grid");
  fit_cmd->add_option("--b-min", fit_options.coarse.b_min, "Coarse grid");
  fit_cmd->add_option("--b-max", fit_options.coarse.b_max, "Coarse grid");
  fit_cmd->add_option("--b-step", fit_options.coarse.b_step, "Coarse grid");
  add_common(fit_cmd);

  // cv
  int folds = 5;
  std::uint64_t seed = 1;
  auto* cv_cmd =
      app.add_subcommand("cv", "User-level k-fold cross-validation");
  cv_cmd->add_option("--tuples", tuples_path, "Tuples file")->required();
  cv_cmd->add_option("--folds", folds, "Number of folds");
  cv_cmd->add_option("--seed", seed, "Fold-assignment seed");
  cv_cmd->add_option("--alpha", alpha, "Rep exponent");
  cv_cmd->add_option("--k-floor", fit_options.k_floor, "Lower bound on k(w)");
  cv_cmd->add_option("--convention", convention, "sample or population")
      ->check(CLI::IsMember({"sample", "population"}));
  add_common(cv_cmd);

  // ablate
  auto* ablate_cmd = app.add_subcommand(
      "ablate", "Decompose the rep-exponent and k(w) contributions");
  ablate_cmd->add_option("--tuples", tuples_path, "Tuples file")->required();
  ablate_cmd->add_option("--alpha", alpha, "Rep exponent of the full model");
  add_common(ablate_cmd);

  // sweep-alpha
  auto* sweep_cmd = app.add_subcommand(
      "sweep-alpha", "Refit (a, b) at each alpha in 0.50..1.00");
  sweep_cmd->add_option("--tuples", tuples_path, "Tuples file")->required();
  add_common(sweep_cmd);

  // stratify
  std::string by;
  std::vector<int> windows = {7, 14, 28};
  auto* stratify_cmd = app.add_subcommand(
      "stratify", "Consistency by tuple size, window length, or equipment");
  stratify_cmd->add_option("--by", by, "size, window, or equipment")
      ->required()
      ->check(CLI::IsMember({"size", "window", "equipment"}));
  stratify_cmd->add_option("--tuples", tuples_path,
                           "Tuples file (size/equipment)");
  stratify_cmd->add_option("--exercises", exercises_path,
                           "Exercises file (equipment/window)");
  stratify_cmd->add_option("--sets", sets_path, "Sets file (window)");
  stratify_cmd->add_option("--users", users_path, "Users file (window)");
  stratify_cmd->add_option("--windows", windows, "Window lengths in days");
  stratify_cmd->add_option("--convention", convention,
                           "sample or population")
      ->check(CLI::IsMember({"sample", "population"}));
  add_spec_options(stratify_cmd, spec_opts);
  add_common(stratify_cmd, false);

  // per-exercise
  int min_tuples = kDefaultMinTuplesPerExercise;
  auto* perex_cmd = app.add_subcommand(
      "per-exercise", "Per-exercise consistency improvement");
  perex_cmd->add_option("--tuples", tuples_path, "Tuples file")->required();
  perex_cmd->add_option("--exercises", exercises_path, "Exercises file")
      ->required();
  perex_cmd->add_option("--min-tuples", min_tuples,
                        "Minimum tuples per exercise");
  perex_cmd->add_option("--convention", convention, "sample or population")
      ->check(CLI::IsMember({"sample", "population"}));
  add_spec_options(perex_cmd, spec_opts);
  add_common(perex_cmd, false);

  // floor-report
  std::string deduped_path;
  auto* floor_cmd = app.add_subcommand(
      "floor-report", "How often the k(w) floor activates");
  floor_cmd->add_option("--deduped", deduped_path,
                        "Post-dedup near-failure sets file")
      ->required();
  add_spec_options(floor_cmd, spec_opts);
  add_common(floor_cmd, false);

  // rerun
  std::string manifest_path;
  auto* rerun_cmd =
      app.add_subcommand("rerun", "Replay a run recorded in a manifest");
  rerun_cmd->add_option("manifest", manifest_path, "Manifest file")
      ->required();
  rerun_cmd->add_option("--out", out, "Override the output directory");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);  // prints help text or the parse error
    return rc == 0 ? 0 : kExitInput;
  }

  fit_options.convention = parse_convention(convention);
  fit_options.threads = threads;

  if (*estimate_cmd)
    return cmd_estimate(argv_record, weight, unit, reps, formula, spec_opts,
                        out);
  if (*synth_cmd) {
    const auto date = parse_date(start_date);
    if (!date) throw InputError("invalid --start-date: " + start_date);
    synth_config.start_date = *date;
    synth_config.truth =
        FormulaSpec::log_linear(truth_alpha, truth_a, truth_b);
    return cmd_synth(argv_record, synth_config, out, run_id);
  }
  if (*pipeline_cmd)
    return cmd_pipeline(argv_record, sets_path, users_path, exercises_path,
                        window_days, subsample_pct, out, run_id);
  if (*fit_cmd)
    return cmd_fit(argv_record, tuples_path, alpha, fit_options, out, run_id);
  if (*cv_cmd)
    return cmd_cv(argv_record, tuples_path, folds, seed, alpha, fit_options,
                  out, run_id);
  if (*ablate_cmd)
    return cmd_ablate(argv_record, tuples_path, alpha, fit_options, out,
                      run_id);
  if (*sweep_cmd)
    return cmd_sweep_alpha(argv_record, tuples_path, fit_options, out, run_id);
  if (*stratify_cmd)
    return cmd_stratify(argv_record, by, tuples_path, exercises_path,
                        sets_path, users_path, windows, spec_opts, convention,
                        out, run_id);
  if (*perex_cmd)
    return cmd_per_exercise(argv_record, tuples_path, exercises_path,
                            min_tuples, spec_opts, convention, out, run_id);
  if (*floor_cmd)
    return cmd_floor_report(argv_record, deduped_path, spec_opts, out, run_id);
  if (*rerun_cmd) return cmd_rerun(manifest_path, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return run_cli(std::move(args));
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cerr << "run 'repmax --help' for usage\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCompute;
  }
}
