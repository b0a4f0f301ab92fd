#include "repmax/pipeline.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "repmax/formulas.hpp"
#include "repmax/rng.hpp"

namespace repmax {

namespace {

using Removals = std::map<std::string, std::int64_t>;

struct Lookups {
  std::unordered_map<std::string, const UserProfile*> profiles;
  std::unordered_map<std::string, const ExerciseMeta*> exercises;
};

Lookups build_lookups(const std::vector<UserProfile>& profiles,
                      const std::vector<ExerciseMeta>& exercises) {
  Lookups lk;
  lk.profiles.reserve(profiles.size());
  for (const auto& p : profiles) lk.profiles.emplace(p.user_id, &p);
  lk.exercises.reserve(exercises.size());
  for (const auto& e : exercises) lk.exercises.emplace(e.exercise_id, &e);
  return lk;
}

double to_kg(double weight, WeightUnit unit) {
  return unit == WeightUnit::kg ? weight : weight * kLbToKg;
}

// Step 1 predicates, first failing one wins. Returns the reason or nullptr.
const char* step1_reject_reason(const RawSetRecord& r, const Lookups& lk) {
  if (r.is_warmup) return "warmup";
  if (r.weight <= 0.0) return "zero_weight";
  if (r.reps > kRepCap) return "rep_cap";
  const auto ex = lk.exercises.find(r.exercise_id);
  if (ex == lk.exercises.end()) return "unknown_exercise";
  if (ex->second->is_custom) return "custom_exercise";
  if (!ex->second->is_resistance) return "non_resistance";
  if (ex->second->is_bodyweight_or_assisted) return "bodyweight_or_assisted";
  const auto pr = lk.profiles.find(r.user_id);
  if (pr == lk.profiles.end() || !pr->second->gender.has_value() ||
      !pr->second->date_of_birth.has_value())
    return "missing_profile";
  return nullptr;
}

// Step 3 predicates over a converted set.
const char* step3_reject_reason(const CleanSet& s, const Lookups& lk) {
  const auto ex = lk.exercises.find(s.exercise_id);
  if (ex == lk.exercises.end() || !ex->second->is_compound.has_value())
    return "unclassified_exercise";
  if (s.weight_kg >= kWeightCapKg) return "weight_cap";
  if (ex->second->name.find("Ball") != std::string::npos) return "ball_name";
  return nullptr;
}

std::vector<CleanSet> apply_step1(const std::vector<RawSetRecord>& records,
                                  const Lookups& lk, Removals& removals) {
  std::vector<CleanSet> out;
  out.reserve(records.size());
  // Duplicate (user, exercise, date, set_index) keys: the later record in
  // input order is rejected.
  std::set<std::tuple<std::string, std::string, std::int64_t, int>> seen;
  for (const auto& r : records) {
    if (!seen.emplace(r.user_id, r.exercise_id, days_from_civil(r.workout_date),
                      r.set_index)
             .second) {
      ++removals["duplicate_key"];
      continue;
    }
    if (const char* reason = step1_reject_reason(r, lk)) {
      ++removals[reason];
      continue;
    }
    out.push_back(CleanSet{r.user_id, r.exercise_id, r.workout_date,
                           r.set_index, to_kg(r.weight, r.unit), r.reps,
                           r.is_amrap});
  }
  return out;
}

std::vector<CleanSet> apply_step3(std::vector<CleanSet> sets, const Lookups& lk,
                                  Removals& removals) {
  std::vector<CleanSet> out;
  out.reserve(sets.size());
  for (auto& s : sets) {
    if (const char* reason = step3_reject_reason(s, lk)) {
      ++removals[reason];
      continue;
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::int64_t distinct_users(const std::vector<CleanSet>& sets) {
  std::unordered_set<std::string> users;
  for (const auto& s : sets) users.insert(s.user_id);
  return static_cast<std::int64_t>(users.size());
}

std::int64_t distinct_users_nf(const std::vector<NearFailureSet>& sets) {
  std::unordered_set<std::string> users;
  for (const auto& s : sets) users.insert(s.user_id);
  return static_cast<std::int64_t>(users.size());
}

bool workout_group_less(const CleanSet& a, const CleanSet& b) {
  return std::tie(a.user_id, a.exercise_id, a.workout_date, a.set_index) <
         std::tie(b.user_id, b.exercise_id, b.workout_date, b.set_index);
}

}  // namespace

std::vector<CleanSet> filter_extraction(
    const std::vector<RawSetRecord>& records,
    const std::vector<UserProfile>& profiles,
    const std::vector<ExerciseMeta>& exercises, Removals& removals) {
  const Lookups lk = build_lookups(profiles, exercises);
  return apply_step3(apply_step1(records, lk, removals), lk, removals);
}

std::vector<CleanSet> exclude_minors(std::vector<CleanSet> sets,
                                     const std::vector<UserProfile>& profiles,
                                     Removals& removals) {
  std::unordered_map<std::string, int> birth_year;
  for (const auto& p : profiles)
    if (p.date_of_birth) birth_year.emplace(p.user_id, p.date_of_birth->year);

  std::unordered_set<std::string> minors;
  for (const auto& s : sets) {
    const auto it = birth_year.find(s.user_id);
    if (it == birth_year.end())
      throw std::logic_error("exclude_minors: user without date of birth");
    if (s.workout_date.year - it->second < kAdultAge) minors.insert(s.user_id);
  }

  std::vector<CleanSet> out;
  out.reserve(sets.size());
  for (auto& s : sets) {
    if (minors.count(s.user_id)) {
      ++removals["minor_user"];
      continue;
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<NearFailureSet> detect_near_failure(
    const std::vector<CleanSet>& sets) {
  std::vector<const CleanSet*> ordered;
  ordered.reserve(sets.size());
  for (const auto& s : sets) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(),
            [](const CleanSet* a, const CleanSet* b) {
              return workout_group_less(*a, *b);
            });

  std::vector<NearFailureSet> out;
  for (std::size_t lo = 0; lo < ordered.size();) {
    std::size_t hi = lo + 1;
    while (hi < ordered.size() &&
           ordered[hi]->user_id == ordered[lo]->user_id &&
           ordered[hi]->exercise_id == ordered[lo]->exercise_id &&
           ordered[hi]->workout_date == ordered[lo]->workout_date)
      ++hi;

    for (std::size_t i = lo; i < hi; ++i) {
      const CleanSet& s = *ordered[i];
      bool fatigue = false;
      for (std::size_t j = lo; j < i && !fatigue; ++j) {
        const CleanSet& prev = *ordered[j];
        fatigue = weight_key(prev.weight_kg) == weight_key(s.weight_kg) &&
                  prev.reps > s.reps;
      }
      if (!s.is_amrap && !fatigue) continue;
      NearFailureReason reason =
          s.is_amrap ? (fatigue ? NearFailureReason::both
                                : NearFailureReason::amrap)
                     : NearFailureReason::fatigue;
      out.push_back(NearFailureSet{s.user_id, s.exercise_id, s.workout_date,
                                   s.set_index, s.weight_kg, s.reps, reason});
    }
    lo = hi;
  }
  return out;
}

std::vector<NearFailureSet> dedup_first_per_workout(
    const std::vector<NearFailureSet>& sets) {
  std::vector<const NearFailureSet*> ordered;
  ordered.reserve(sets.size());
  for (const auto& s : sets) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(),
            [](const NearFailureSet* a, const NearFailureSet* b) {
              return std::tie(a->user_id, a->exercise_id, a->workout_date,
                              a->set_index) <
                     std::tie(b->user_id, b->exercise_id, b->workout_date,
                              b->set_index);
            });

  std::vector<NearFailureSet> out;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (i > 0 && ordered[i]->user_id == ordered[i - 1]->user_id &&
        ordered[i]->exercise_id == ordered[i - 1]->exercise_id &&
        ordered[i]->workout_date == ordered[i - 1]->workout_date)
      continue;  // a lower set_index from the same workout was already kept
    out.push_back(*ordered[i]);
  }
  return out;
}

std::int64_t assign_window(const Date& date, int window_days,
                           const Date& anchor) {
  if (window_days <= 0)
    throw std::domain_error("assign_window: window_days must be positive");
  const std::int64_t offset = days_from_civil(date) - days_from_civil(anchor);
  std::int64_t q = offset / window_days;
  if (offset % window_days != 0 && offset < 0) --q;
  return q;
}

std::vector<ObservationTuple> build_tuples(
    const std::vector<NearFailureSet>& deduped_sets, int window_days,
    const Date& anchor) {
  struct Keyed {
    const NearFailureSet* set;
    std::int64_t window;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(deduped_sets.size());
  for (const auto& s : deduped_sets)
    keyed.push_back({&s, assign_window(s.workout_date, window_days, anchor)});

  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    return std::tie(a.set->user_id, a.set->exercise_id, a.window,
                    a.set->workout_date, a.set->set_index) <
           std::tie(b.set->user_id, b.set->exercise_id, b.window,
                    b.set->workout_date, b.set->set_index);
  });

  std::vector<ObservationTuple> out;
  for (std::size_t lo = 0; lo < keyed.size();) {
    std::size_t hi = lo + 1;
    while (hi < keyed.size() &&
           keyed[hi].set->user_id == keyed[lo].set->user_id &&
           keyed[hi].set->exercise_id == keyed[lo].set->exercise_id &&
           keyed[hi].window == keyed[lo].window)
      ++hi;

    std::set<int> reps;
    std::set<std::int64_t> weights;
    for (std::size_t i = lo; i < hi; ++i) {
      reps.insert(keyed[i].set->reps);
      weights.insert(weight_key(keyed[i].set->weight_kg));
    }
    if (reps.size() >= 2 && weights.size() >= 2) {
      ObservationTuple t;
      t.user_id = keyed[lo].set->user_id;
      t.exercise_id = keyed[lo].set->exercise_id;
      t.window_index = keyed[lo].window;
      for (std::size_t i = lo; i < hi; ++i) t.sets.push_back(*keyed[i].set);
      validate(t);
      out.push_back(std::move(t));
    }
    lo = hi;
  }
  return out;
}

PipelineResult run_pipeline(const PipelineInputs& inputs,
                            const PipelineOptions& options) {
  if (options.window_days <= 0)
    throw std::domain_error("run_pipeline: window_days must be positive");
  if (options.subsample_pct &&
      (*options.subsample_pct < 0 || *options.subsample_pct > 100))
    throw std::domain_error("run_pipeline: subsample_pct must be in [0, 100]");

  PipelineResult result;
  FilterReport& report = result.report;
  report.window_days = options.window_days;
  report.subsample_pct = options.subsample_pct;
  report.malformed = inputs.malformed;

  // Step 0: optional deterministic user subsample.
  std::vector<RawSetRecord> records;
  if (options.subsample_pct) {
    const int pct = *options.subsample_pct;
    records.reserve(inputs.records.size());
    for (const auto& r : inputs.records) {
      if (fnv1a64(r.user_id) % 100 < static_cast<std::uint64_t>(pct))
        records.push_back(r);
      else
        ++report.subsampled_out;
    }
  } else {
    records = inputs.records;
  }

  {
    std::unordered_set<std::string> users;
    for (const auto& r : records) users.insert(r.user_id);
    report.steps.push_back({0, "raw records", static_cast<std::int64_t>(records.size()),
                            static_cast<std::int64_t>(users.size())});
  }

  const Lookups lk = build_lookups(inputs.profiles, inputs.exercises);

  auto clean = apply_step1(records, lk, report.removals);
  report.steps.push_back({1, "extraction-level filters",
                          static_cast<std::int64_t>(clean.size()),
                          distinct_users(clean)});

  clean = exclude_minors(std::move(clean), inputs.profiles, report.removals);
  report.steps.push_back({2, "remove users ever under 18",
                          static_cast<std::int64_t>(clean.size()),
                          distinct_users(clean)});

  clean = apply_step3(std::move(clean), lk, report.removals);
  report.steps.push_back({3, "quality filters",
                          static_cast<std::int64_t>(clean.size()),
                          distinct_users(clean)});

  auto near_failure = detect_near_failure(clean);
  for (const auto& s : near_failure)
    ++report.near_failure_reasons[reason_name(s.reason)];
  report.steps.push_back({4, "near-failure selection",
                          static_cast<std::int64_t>(near_failure.size()),
                          distinct_users_nf(near_failure)});

  result.deduped_sets = dedup_first_per_workout(near_failure);
  report.steps.push_back({5, "first-per-workout dedup",
                          static_cast<std::int64_t>(result.deduped_sets.size()),
                          distinct_users_nf(result.deduped_sets)});

  result.tuples =
      build_tuples(result.deduped_sets, options.window_days, options.anchor);
  std::int64_t qualified_sets = 0;
  std::unordered_set<std::string> tuple_users;
  for (const auto& t : result.tuples) {
    qualified_sets += static_cast<std::int64_t>(t.sets.size());
    tuple_users.insert(t.user_id);
  }
  report.steps.push_back({6, "tuple qualification", qualified_sets,
                          static_cast<std::int64_t>(tuple_users.size())});
  report.tuples = static_cast<std::int64_t>(result.tuples.size());

  return result;
}

}  // namespace repmax
