#pragma once

// Synthetic training-log corpora with a known ground-truth formula. The
// generator plants near-failure sets whose rep counts come from inverting the
// truth spec (plus optional Gaussian noise before rounding), so the optimizer
// and analyses can be checked against coefficients that are known exactly.
//
// Per-session set layout for one (user, exercise):
//   idx 0  warmup (dropped by the pipeline)
//   idx 1  work set: a distinct weight at sub-maximal reps, or the same
//          weight at planted reps + 1 to stage a rep decline
//   idx 2  the near-failure set (AMRAP-flagged or fatigue-detectable)
//   idx 3  occasional trailing work set at another distinct weight
// Only idx 2 qualifies and survives first-per-workout dedup, so every set
// reaching the tuple stage is formula-consistent by construction.

#include <cstdint>
#include <string>
#include <vector>

#include "repmax/formulas.hpp"
#include "repmax/records.hpp"

namespace repmax {

struct SynthExercise {
  std::string name;
  std::string muscle_group;
  bool is_compound = true;
  double weight_min_kg = 20.0;  // working-weight band the exercise lives in
  double weight_max_kg = 100.0;
};

std::vector<SynthExercise> default_synth_exercises();

struct SynthConfig {
  std::uint64_t seed = 1;
  int n_users = 100;
  std::vector<SynthExercise> exercises = default_synth_exercises();
  FormulaSpec truth = FormulaSpec::log_linear(kDefaultAlpha, -2.55, 4.58);
  double rep_noise_sd = 0.0;   // SD of additive rep noise before rounding
  double amrap_rate = 0.5;     // probability a planted set is AMRAP-flagged
  int sessions_per_user = 8;
  int session_gap_days = 3;
  int exercises_per_user = 3;
  Date start_date{2024, 1, 6};
  int start_jitter_days = 14;      // per-user stagger of the first session
  double minor_fraction = 0.0;     // users generated under 18 for filter tests
  double weight_increment_kg = 2.5;  // weights snap to this increment
};

// Throws std::invalid_argument naming every inconsistent field.
void validate(const SynthConfig& config);

// Real-valued rep count r solving estimate(w, r) = latent_1rm:
// r = 1 + (k(w) * (latent/w - 1))^(1/alpha). Requires latent >= w > 0.
double invert_formula(double latent_1rm_kg, double weight_kg,
                      const FormulaSpec& spec);

struct GroundTruth {
  FormulaSpec truth{};
  std::string prng;
  std::vector<std::string> minors;  // users the age filter must remove

  struct Latent {
    std::string user_id;
    std::string exercise_id;
    double latent_1rm_kg = 0.0;
  };
  std::vector<Latent> latents;

  struct NfLabel {
    std::string user_id;
    std::string exercise_id;
    Date workout_date;
    int set_index = 0;
    NearFailureReason reason = NearFailureReason::amrap;
  };
  std::vector<NfLabel> nf_labels;  // planted near-failure sets

  struct Stats {
    std::int64_t n_sets = 0;       // all generated sets
    std::int64_t n_nf_sets = 0;    // planted near-failure sets
    double mean_reps = 0.0;        // over planted near-failure sets
    double median_reps = 0.0;
    double mean_weight_kg = 0.0;
    double median_weight_kg = 0.0;
  };
  Stats stats;
};

struct SynthCorpus {
  std::vector<RawSetRecord> records;  // sorted by (user, date, exercise, set)
  std::vector<UserProfile> profiles;
  std::vector<ExerciseMeta> exercises;
  GroundTruth truth;
};

// Deterministic under config.seed: per-user streams are derived from the
// master seed, so output is identical regardless of generation order.
SynthCorpus generate_corpus(const SynthConfig& config);

}  // namespace repmax
