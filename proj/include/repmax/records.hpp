#pragma once

// Training-log domain types at their successive pipeline stages.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "repmax/dates.hpp"

namespace repmax {

enum class WeightUnit { kg, lb };

// One logged set exactly as it arrives from the input files.
struct RawSetRecord {
  std::string user_id;
  std::string exercise_id;
  Date workout_date;
  int set_index = 0;  // 0-based order within (user, exercise, workout_date)
  double weight = 0.0;
  WeightUnit unit = WeightUnit::kg;
  int reps = 1;
  bool is_amrap = false;
  bool is_warmup = false;
};

struct UserProfile {
  std::string user_id;
  std::optional<std::string> gender;
  std::optional<Date> date_of_birth;
};

struct ExerciseMeta {
  std::string exercise_id;
  std::string name;
  std::string muscle_group;
  std::optional<bool> is_compound;  // absent = unclassified
  bool is_custom = false;
  bool is_resistance = true;
  bool is_bodyweight_or_assisted = false;
};

// A set that survived the extraction and quality predicates; weight in kg.
struct CleanSet {
  std::string user_id;
  std::string exercise_id;
  Date workout_date;
  int set_index = 0;
  double weight_kg = 0.0;
  int reps = 1;
  bool is_amrap = false;
};

enum class NearFailureReason { amrap, fatigue, both };

std::string reason_name(NearFailureReason r);
std::optional<NearFailureReason> parse_reason(const std::string& s);

struct NearFailureSet {
  std::string user_id;
  std::string exercise_id;
  Date workout_date;
  int set_index = 0;
  double weight_kg = 0.0;
  int reps = 1;
  NearFailureReason reason = NearFailureReason::amrap;
};

// All qualifying near-failure sets for one (user, exercise, time window).
// The unit over which estimate consistency is measured.
struct ObservationTuple {
  std::string user_id;
  std::string exercise_id;
  std::int64_t window_index = 0;
  std::vector<NearFailureSet> sets;  // ordered by (workout_date, set_index)
};

// Weight equality for fatigue detection and tuple distinctness compares kg
// rounded to two decimals; lb conversion would otherwise leave float noise.
std::int64_t weight_key(double weight_kg);

// Throws std::logic_error when a tuple invariant is violated: >= 2 sets,
// >= 2 distinct rep counts, >= 2 distinct weights, consistent identifiers.
void validate(const ObservationTuple& t);

}  // namespace repmax
