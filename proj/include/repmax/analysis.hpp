#pragma once

// Ablation, sensitivity, stratification, and per-exercise breakdowns of the
// consistency comparison. Every row carries the two SDs it was derived from,
// so reported improvements can always be recomputed.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "repmax/metric.hpp"
#include "repmax/optimizer.hpp"
#include "repmax/pipeline.hpp"
#include "repmax/records.hpp"

namespace repmax {

inline constexpr int kDefaultMinTuplesPerExercise = 50;

struct ExerciseImprovementRow {
  std::string exercise_id;
  std::string name;
  std::string type;  // "compound" | "isolation"
  std::int64_t n_tuples = 0;
  double mean_weight_kg = 0.0;  // over all sets in the exercise's tuples
  double sd_ours = 0.0;
  std::map<std::string, double> sd_classical;
  std::map<std::string, double> improvement_vs;
};

struct PerExerciseResult {
  std::vector<ExerciseImprovementRow> rows;  // sorted by n_tuples descending
  std::int64_t n_below_threshold = 0;
  int min_tuples = kDefaultMinTuplesPerExercise;
};

// Per-exercise consistency improvement under a fitted spec, for exercises
// with at least min_tuples tuples.
PerExerciseResult per_exercise_improvement(
    std::span<const ObservationTuple> tuples,
    const std::vector<ExerciseMeta>& exercises, const FormulaSpec& spec,
    int min_tuples = kDefaultMinTuplesPerExercise,
    SdConvention conv = kDefaultSdConvention);

// Pearson correlation between mean exercise weight and improvement vs the
// Brzycki benchmark. Requires >= 3 rows and non-degenerate variance.
double weight_improvement_correlation(
    const std::vector<ExerciseImprovementRow>& rows);

struct AblationRow {
  std::string model;  // "brzycki", "alpha_only", "kw_only", "full"
  double objective = 0.0;
  std::optional<double> improvement_vs_brzycki;  // absent for the baseline
  std::optional<double> a;
  std::optional<double> b;
  std::optional<double> k;
  std::optional<double> alpha;
};

// Decomposes the two structural changes: sub-linear reps (alpha-only, fixed
// optimized k), weight-dependent conversion (k(w)-only at alpha = 1), and
// the full model, all against the Brzycki baseline.
std::vector<AblationRow> ablation(std::span<const ObservationTuple> tuples,
                                  double alpha = kDefaultAlpha,
                                  const FitOptions& fit_options = {});

struct AlphaSweepRow {
  double alpha = 0.0;
  double a_opt = 0.0;
  double b_opt = 0.0;
  double objective = 0.0;
  double improvement_vs_brzycki = 0.0;
};

std::vector<double> default_alpha_grid();  // 0.50 .. 1.00 step 0.05

// Reoptimizes (a, b) from scratch at each alpha.
std::vector<AlphaSweepRow> alpha_sweep(
    std::span<const ObservationTuple> tuples,
    const std::vector<double>& alphas = default_alpha_grid(),
    const FitOptions& fit_options = {});

struct StratumRow {
  std::string stratum;
  std::int64_t n_tuples = 0;
  std::int64_t n_sets = 0;
  std::int64_t n_exercises = 0;     // equipment stratification only
  double mean_weight_kg = 0.0;      // where applicable
  double pct_of_total = 0.0;        // tuple-size stratification only
  double sd_benchmark = 0.0;        // Brzycki
  double sd_ours = 0.0;
  double improvement = 0.0;
};

// Tuple-size strata: n = 2 and n >= 3; empty strata are omitted.
std::vector<StratumRow> stratify_tuple_size(
    std::span<const ObservationTuple> tuples, const FormulaSpec& spec,
    SdConvention conv = kDefaultSdConvention);

// Re-runs the pipeline per window size; tuple qualification changes with the
// window, so this starts from raw inputs rather than tuples.
std::vector<StratumRow> stratify_window(
    const PipelineInputs& inputs, const FormulaSpec& spec,
    const std::vector<int>& windows = {7, 14, 28},
    const PipelineOptions& base_options = {},
    SdConvention conv = kDefaultSdConvention);

enum class EquipmentType { barbell, cable, dumbbell, machine, other };

std::string equipment_name(EquipmentType e);

// Case-insensitive substring match on the exercise name, first hit in the
// priority order Barbell, Dumbbell, Cable, Machine; anything else is Other.
EquipmentType classify_equipment(const std::string& exercise_name);

std::vector<StratumRow> stratify_equipment(
    std::span<const ObservationTuple> tuples,
    const std::vector<ExerciseMeta>& exercises, const FormulaSpec& spec,
    SdConvention conv = kDefaultSdConvention);

struct FloorActivationReport {
  std::int64_t n_sets = 0;
  std::int64_t n_floored = 0;  // sets whose unguarded k(w) < k_floor
  double pct = 0.0;
  std::optional<double> max_floored_weight_kg;
  // Roots of the unguarded k(w); absent for fixed-k specs.
  std::optional<double> k_zero_at_weight_kg;
  std::optional<double> k_floor_at_weight_kg;
};

FloorActivationReport floor_activation_report(
    std::span<const NearFailureSet> deduped_sets, const FormulaSpec& spec);

}  // namespace repmax
