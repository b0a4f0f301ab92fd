// Acceptance suite: runs every gate criterion end to end and prints one
// pass/fail line per criterion. Exits with the number of failed criteria.
//
// Usage: acceptance --cli /path/to/repmax [--keep]

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "repmax/analysis.hpp"
#include "repmax/crossval.hpp"
#include "repmax/io.hpp"
#include "repmax/metric.hpp"
#include "repmax/optimizer.hpp"
#include "repmax/pipeline.hpp"
#include "repmax/rng.hpp"
#include "repmax/synth.hpp"

namespace fs = std::filesystem;
using namespace repmax;
using nlohmann::json;

namespace {

const std::string kFixtures = REPMAX_FIXTURE_DIR;
const FormulaSpec kReferenceSpec = FormulaSpec::log_linear(0.85, -2.55, 4.58);

int g_failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

void report(int criterion, bool pass, const std::string& what,
            const std::string& detail, double seconds) {
  std::printf("[%s] %2d. %s — %s (%.1fs)\n", pass ? "PASS" : "FAIL", criterion,
              what.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return std::string(buf);
}

struct Corpus {
  std::vector<ObservationTuple> tuples;
  std::vector<ExerciseMeta> exercises;
};

Corpus make_corpus(std::uint64_t seed, int users, double noise) {
  SynthConfig config;
  config.seed = seed;
  config.n_users = users;
  config.rep_noise_sd = noise;
  auto raw = generate_corpus(config);
  PipelineInputs inputs{std::move(raw.records), std::move(raw.profiles),
                        raw.exercises, 0};
  Corpus corpus;
  corpus.tuples = run_pipeline(inputs).tuples;
  corpus.exercises = std::move(raw.exercises);
  return corpus;
}

// --- criterion 1: formula golden values -------------------------------------

void criterion_1() {
  Timer timer;
  bool pass = true;
  const std::pair<double, double> table[] = {{10, 8.0},  {15, 9.9},  {25, 12.2},
                                             {55, 15.8}, {70, 16.9}, {80, 17.5},
                                             {150, 20.4}};
  for (const auto& [w, k] : table)
    pass = pass && std::abs(k_of_w(w, kReferenceSpec) - k) <= 0.05;
  const double proposed = estimate_proposed(13, 10, kReferenceSpec);
  const double brzycki = estimate_classical(ClassicalFormula::brzycki, 13, 10);
  pass = pass && proposed >= 21.9 && proposed <= 22.4;
  pass = pass && brzycki >= 17.1 && brzycki <= 17.6;
  report(1, pass, "formula golden values",
         fmt("k(w) matches at 7 weights; proposed(13,10)=%.2f, "
             "brzycki(13,10)=%.2f",
             proposed, brzycki),
         timer.seconds());
}

// --- criterion 2: identity and floor -----------------------------------------

void criterion_2() {
  Timer timer;
  bool identity = true;
  SplitMix64 rng(2);
  for (int i = 0; i < 1000; ++i) {
    const double w = rng.uniform(0.5, 400.0);
    identity = identity && estimate_proposed(w, 1, kReferenceSpec) == w;
  }
  const auto roots =
      floor_activation_report(std::vector<NearFailureSet>{}, kReferenceSpec);
  const bool floor_ok =
      roots.k_floor_at_weight_kg &&
      std::abs(*roots.k_floor_at_weight_kg - 1.95) <= 0.01 &&
      roots.k_zero_at_weight_kg &&
      std::abs(*roots.k_zero_at_weight_kg - 1.75) <= 0.01;
  report(2, identity && floor_ok, "identity at one rep and k(w) floor roots",
         fmt("1000 exact identities; k=0 at %.3f kg, k=floor at %.3f kg",
             roots.k_zero_at_weight_kg.value_or(0.0),
             roots.k_floor_at_weight_kg.value_or(0.0)),
         timer.seconds());
}

// --- criterion 3: metric immunity --------------------------------------------

void criterion_3() {
  Timer timer;
  SplitMix64 rng(3);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    ObservationTuple t;
    t.user_id = "u";
    t.exercise_id = "e";
    const int n = 2 + static_cast<int>(rng.uniform_int(4));
    for (int s = 0; s < n; ++s)
      t.sets.push_back(NearFailureSet{"u", "e", Date{2024, 1, 1 + s}, s,
                                      rng.uniform(2.0, 200.0),
                                      1 + static_cast<int>(rng.uniform_int(30)),
                                      NearFailureReason::amrap});
    const double c = std::exp(rng.uniform(-3.0, 3.0));
    const double base = tuple_sd_log_fn(t, [&](double w, int r) {
      return estimate_proposed(w, r, kReferenceSpec);
    });
    const double scaled = tuple_sd_log_fn(t, [&](double w, int r) {
      return c * estimate_proposed(w, r, kReferenceSpec);
    });
    worst = std::max(worst, std::abs(base - scaled));
  }
  report(3, worst < 1e-12, "multiplicative scaling immunity",
         fmt("max |delta SD| over 1000 random tuples = %.2e", worst),
         timer.seconds());
}

// --- criterion 4: improvement arithmetic -------------------------------------

void criterion_4() {
  Timer timer;
  const double brzycki = improvement(0.1028, 0.0847);
  const double mayhew = improvement(0.1084, 0.0847);
  const bool pass =
      std::abs(brzycki - 17.6) <= 0.05 && std::abs(mayhew - 21.9) <= 0.05;
  report(4, pass, "improvement arithmetic",
         fmt("(0.1028, 0.0847) -> %+.2f%%; (0.1084, 0.0847) -> %+.2f%%",
             brzycki, mayhew),
         timer.seconds());
}

// --- criterion 5: pipeline fixture -------------------------------------------

void criterion_5() {
  Timer timer;
  auto sets = load_sets(kFixtures + "/sets.jsonl");
  auto users = load_users(kFixtures + "/users.jsonl");
  auto exercises = load_exercises(kFixtures + "/exercises.jsonl");
  PipelineInputs inputs{std::move(sets.rows), std::move(users.rows),
                        std::move(exercises.rows), sets.malformed};
  const auto result = run_pipeline(inputs);

  const json report_golden =
      read_json(kFixtures + "/golden/filter_report.json");
  bool pass = filter_report_json(result.report) == report_golden;

  const auto tuples_golden = load_tuples(kFixtures + "/golden/tuples.jsonl");
  pass = pass && result.tuples.size() == tuples_golden.size();
  if (pass) {
    for (std::size_t i = 0; i < tuples_golden.size() && pass; ++i) {
      const auto& got = result.tuples[i];
      const auto& want = tuples_golden[i];
      pass = got.user_id == want.user_id &&
             got.exercise_id == want.exercise_id &&
             got.window_index == want.window_index &&
             got.sets.size() == want.sets.size();
      for (std::size_t s = 0; pass && s < want.sets.size(); ++s)
        pass = got.sets[s].workout_date == want.sets[s].workout_date &&
               got.sets[s].set_index == want.sets[s].set_index &&
               got.sets[s].weight_kg == want.sets[s].weight_kg &&
               got.sets[s].reps == want.sets[s].reps &&
               got.sets[s].reason == want.sets[s].reason;
    }
  }
  report(5, pass, "pipeline fixture golden",
         fmt("filter report and %zu tuples reproduced exactly",
             result.tuples.size()),
         timer.seconds());
}

// --- criteria 6-10 on the synthetic corpora ----------------------------------

void criteria_6_to_10(const std::string& tmp) {
  // Criterion 6: coefficient recovery.
  Timer t6;
  const Corpus clean = make_corpus(101, 2000, 0.0);
  const FitResult fit_clean = fit(clean.tuples, 0.85);
  const double da0 = std::abs(fit_clean.a_opt - (-2.55));
  const double db0 = std::abs(fit_clean.b_opt - 4.58);
  bool pass6 = da0 <= 0.25 && db0 <= 0.10;

  const Corpus noisy = make_corpus(202, 2000, 0.5);
  const FitResult fit_noisy = fit(noisy.tuples, 0.85);
  const double da5 = std::abs(fit_noisy.a_opt - (-2.55));
  const double db5 = std::abs(fit_noisy.b_opt - 4.58);
  pass6 = pass6 && da5 <= 0.5 && db5 <= 0.2;
  report(6, pass6, "end-to-end coefficient recovery",
         fmt("noiseless (%.2f, %.2f), err (%.2f, %.2f) vs (0.25, 0.10); "
             "noisy (%.2f, %.2f), err (%.2f, %.2f) vs (0.5, 0.2)",
             fit_clean.a_opt, fit_clean.b_opt, da0, db0, fit_noisy.a_opt,
             fit_noisy.b_opt, da5, db5),
         t6.seconds());

  // Criterion 7: cross-validation properties.
  Timer t7;
  const CvReport cv = run_cv(clean.tuples, 5, 42, 0.85);
  std::vector<std::string> cv_users;
  for (const auto& t : clean.tuples) cv_users.push_back(t.user_id);
  const FoldAssignment fa = assign_folds(cv_users, 5, 42);
  bool disjoint = true;
  for (const auto& row : cv.folds) {
    std::set<std::string> train, test;
    for (const auto& t : clean.tuples)
      (fa.user_to_fold.at(t.user_id) == row.fold ? test : train)
          .insert(t.user_id);
    for (const auto& u : test) disjoint = disjoint && train.count(u) == 0;
    disjoint =
        disjoint && train.size() + test.size() == fa.user_to_fold.size();
  }
  bool coeffs_ok = true;
  for (const auto& row : cv.folds)
    coeffs_ok = coeffs_ok && std::abs(row.a - (-2.55)) <= 0.25 &&
                std::abs(row.b - 4.58) <= 0.10;
  const bool overfit_ok = cv.mean_abs_overfit_pct < 3.0;
  report(7, disjoint && coeffs_ok && overfit_ok, "user-level cross-validation",
         fmt("folds disjoint; per-fold coefficients in tolerance; mean "
             "|overfit| = %.2f%% < 3%%",
             cv.mean_abs_overfit_pct),
         t7.seconds());

  // Criterion 8: ablation ordering.
  Timer t8;
  const auto ab = ablation(clean.tuples, 0.85);
  const double alpha_only = *ab[1].improvement_vs_brzycki;
  const double kw_only = *ab[2].improvement_vs_brzycki;
  report(8, kw_only > alpha_only && alpha_only > 0.0, "ablation ordering",
         fmt("k(w)-only %+.1f%% > alpha-only %+.1f%% > 0", kw_only,
             alpha_only),
         t8.seconds());

  // Criterion 9: per-exercise positivity and the weight correlation.
  Timer t9;
  const auto per_ex = per_exercise_improvement(clean.tuples, clean.exercises,
                                               fit_clean.spec(), 50);
  bool positive = !per_ex.rows.empty();
  for (const auto& row : per_ex.rows)
    for (const auto& [name, pct] : row.improvement_vs)
      positive = positive && pct > 0.0;
  double r = 0.0;
  bool r_ok = false;
  if (per_ex.rows.size() >= 3) {
    r = weight_improvement_correlation(per_ex.rows);
    r_ok = r < 0.0;
  }
  report(9, positive && r_ok, "per-exercise positivity and correlation",
         fmt("%zu exercises positive vs all 4 benchmarks; r = %.2f < 0",
             per_ex.rows.size(), r),
         t9.seconds());

  // Criterion 10: grid cardinalities via the surface exports.
  Timer t10;
  const std::string coarse_csv = tmp + "/coarse_surface.csv";
  const std::string refine_csv = tmp + "/refine_surface.csv";
  write_surface_csv(coarse_csv, fit_clean.coarse_surface);
  write_surface_csv(refine_csv, fit_clean.refine_surface);
  auto data_rows = [](const std::string& path) {
    std::ifstream in(path);
    std::string line;
    long rows = -1;  // exclude the header
    while (std::getline(in, line))
      if (!line.empty()) ++rows;
    return rows;
  };
  const long coarse_rows = data_rows(coarse_csv);
  const long refine_rows = data_rows(refine_csv);
  report(10, coarse_rows == 9800 && refine_rows == 441, "grid cardinalities",
         fmt("coarse surface %ld rows; refinement %ld rows", coarse_rows,
             refine_rows),
         t10.seconds());
}

// --- criterion 11: CLI determinism across thread counts ----------------------

bool same_bytes(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  if (!fa || !fb) return false;
  std::ostringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  return sa.str() == sb.str();
}

void criterion_11(const std::string& cli, const std::string& tmp) {
  Timer timer;
  bool pass = true;
  std::string detail;

  for (const std::string threads : {"1", "8"}) {
    const std::string dir = tmp + "/run_t" + threads;
    fs::create_directories(dir);
    std::ostringstream script;
    script << "\"" << cli << "\" synth --seed 7 --users 250 --out \"" << dir
           << "\" >/dev/null && \"" << cli << "\" pipeline --sets \"" << dir
           << "/sets.jsonl\" --users \"" << dir << "/users.jsonl\""
           << " --exercises \"" << dir << "/exercises.jsonl\" --out \"" << dir
           << "\" >/dev/null && \"" << cli << "\" fit --tuples \"" << dir
           << "/tuples.jsonl\" --threads " << threads
           << " --run-id fit --out \"" << dir << "\" >/dev/null && \"" << cli
           << "\" cv --tuples \"" << dir
           << "/tuples.jsonl\" --folds 5 --seed 1 --threads " << threads
           << " --run-id cv --out \"" << dir << "\" >/dev/null";
    if (std::system(script.str().c_str()) != 0) {
      pass = false;
      detail = "CLI chain for --threads " + threads + " failed";
      break;
    }
  }

  if (pass) {
    const fs::path a = tmp + "/run_t1";
    const fs::path b = tmp + "/run_t8";
    int compared = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
      const std::string name = entry.path().filename().string();
      if (name.find("manifest.json") != std::string::npos)
        continue;  // manifests record argv, which differs in --threads
      if (!same_bytes(entry.path(), b / name)) {
        pass = false;
        detail = "files differ: " + name;
        break;
      }
      ++compared;
    }
    if (pass)
      detail = fmt("%d report files byte-identical across --threads 1 vs 8",
                   compared);
  }
  report(11, pass, "CLI determinism across thread counts", detail,
         timer.seconds());
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  bool keep = false;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) cli = argv[++i];
    if (arg == "--keep") keep = true;
  }

  const std::string tmp =
      (fs::temp_directory_path() /
       ("repmax_acceptance_" + std::to_string(::getpid())))
          .string();
  fs::create_directories(tmp);

  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criteria_6_to_10(tmp);
  if (cli.empty()) {
    report(11, false, "CLI determinism across thread counts",
           "no --cli path given", 0.0);
  } else {
    criterion_11(cli, tmp);
  }

  if (!keep) {
    std::error_code ec;
    fs::remove_all(tmp, ec);
  }

  if (g_failures == 0)
    std::printf("acceptance: all 11 criteria passed\n");
  else
    std::printf("acceptance: %d criteria FAILED\n", g_failures);
  return g_failures;
}
