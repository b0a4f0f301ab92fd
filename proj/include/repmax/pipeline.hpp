#pragma once

// The six-step filter sequence that turns raw training-log records into
// qualified observation tuples:
//
//   0  optional deterministic user subsample (fnv1a64(user_id) % 100 < pct)
//   1  extraction-level filters
//   2  remove users ever under 18
//   3  quality filters
//   4  near-failure selection (AMRAP flag or same-weight rep decline)
//   5  first near-failure set per (user, exercise, workout day)
//   6  window assignment and tuple qualification
//
// Within steps 1 and 3 each removal is attributed to the first failing
// predicate, in this fixed order:
//   step 1: duplicate_key, warmup, zero_weight, rep_cap, unknown_exercise,
//           custom_exercise, non_resistance, bodyweight_or_assisted,
//           missing_profile
//   step 3: unclassified_exercise, weight_cap, ball_name

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "repmax/records.hpp"

namespace repmax {

inline constexpr Date kWindowAnchor{2000, 1, 1};
inline constexpr int kDefaultWindowDays = 14;
inline constexpr double kWeightCapKg = 500.0;
inline constexpr int kRepCap = 30;
inline constexpr int kAdultAge = 18;

struct FilterReport {
  struct StepRow {
    int step = 0;
    std::string description;
    std::int64_t sets = 0;
    std::int64_t users = 0;
  };

  int window_days = kDefaultWindowDays;
  std::optional<int> subsample_pct;
  std::int64_t malformed = 0;       // unparseable input lines (filled by io)
  std::int64_t subsampled_out = 0;  // sets dropped by the user subsample
  std::vector<StepRow> steps;       // steps 0..6 in order
  std::int64_t tuples = 0;
  std::map<std::string, std::int64_t> removals;  // predicate -> count
  std::map<std::string, std::int64_t> near_failure_reasons;
};

struct PipelineOptions {
  int window_days = kDefaultWindowDays;
  std::optional<int> subsample_pct;  // keep users with fnv1a64 % 100 < pct
  Date anchor = kWindowAnchor;
};

struct PipelineInputs {
  std::vector<RawSetRecord> records;
  std::vector<UserProfile> profiles;
  std::vector<ExerciseMeta> exercises;
  std::int64_t malformed = 0;  // rejected at parse time, carried into the report
};

struct PipelineResult {
  std::vector<ObservationTuple> tuples;
  std::vector<NearFailureSet> deduped_sets;  // post-step-5, pre-qualification
  FilterReport report;
};

// Steps 1 and 3 composed: emits only sets passing every extraction-level and
// quality predicate, weights converted to kg. Removal counts accumulate into
// `removals` keyed by the first failing predicate.
std::vector<CleanSet> filter_extraction(
    const std::vector<RawSetRecord>& records,
    const std::vector<UserProfile>& profiles,
    const std::vector<ExerciseMeta>& exercises,
    std::map<std::string, std::int64_t>& removals);

// Step 2: a user whose year-level age (workout_year - birth_year) is below 18
// on any record loses all records.
std::vector<CleanSet> exclude_minors(
    std::vector<CleanSet> sets, const std::vector<UserProfile>& profiles,
    std::map<std::string, std::int64_t>& removals);

// Step 4: a set qualifies if flagged AMRAP, or if any earlier set of the same
// workout group used the same weight for strictly more reps.
std::vector<NearFailureSet> detect_near_failure(
    const std::vector<CleanSet>& sets);

// Step 5: keep the qualifying set with the lowest set_index per
// (user, exercise, workout_date).
std::vector<NearFailureSet> dedup_first_per_workout(
    const std::vector<NearFailureSet>& sets);

// Step 6a: fixed calendar buckets; floor division, so pre-anchor dates get
// negative indices.
std::int64_t assign_window(const Date& date, int window_days,
                           const Date& anchor = kWindowAnchor);

// Step 6b: groups by (user, exercise, window) and keeps groups with at least
// two distinct rep counts and two distinct weights. Output is sorted by
// (user_id, exercise_id, window_index); sets within a tuple by
// (workout_date, set_index).
std::vector<ObservationTuple> build_tuples(
    const std::vector<NearFailureSet>& deduped_sets, int window_days,
    const Date& anchor = kWindowAnchor);

// Full orchestration, steps 0-6, with per-step counts in the report.
PipelineResult run_pipeline(const PipelineInputs& inputs,
                            const PipelineOptions& options = {});

}  // namespace repmax
