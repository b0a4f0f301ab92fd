#include "repmax/pipeline.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "doctest.h"
#include "repmax/rng.hpp"

using namespace repmax;

namespace {

std::vector<ExerciseMeta> base_exercises() {
  return {
      {"bench", "Barbell Bench Press", "chest", true, false, true, false},
      {"curl", "Dumbbell Bicep Curl", "biceps", false, false, true, false},
      {"ball", "Stability Ball Crunch", "abs", false, false, true, false},
      {"custom", "My Custom Press", "chest", true, true, true, false},
      {"run", "Treadmill Run", "quadriceps", std::nullopt, false, false, false},
      {"pullup", "Pull Up", "back", true, false, true, true},
      {"mystery", "Mystery Row", "back", std::nullopt, false, true, false},
  };
}

std::vector<UserProfile> base_profiles() {
  return {
      {"u1", "male", Date{1990, 5, 10}},
      {"u2", "female", Date{1985, 3, 20}},
      {"nogender", std::nullopt, Date{1980, 1, 1}},
      {"nodob", "male", std::nullopt},
      {"minor", "female", Date{2005, 6, 15}},
      {"boundary", "male", Date{2006, 12, 31}},
  };
}

RawSetRecord set_of(const std::string& user, const std::string& ex, Date date,
                    int idx, double weight, int reps, bool amrap = false,
                    bool warmup = false, WeightUnit unit = WeightUnit::kg) {
  return RawSetRecord{user, ex, date, idx, weight, unit, reps, amrap, warmup};
}

CleanSet clean_of(const std::string& user, const std::string& ex, Date date,
                  int idx, double weight_kg, int reps, bool amrap = false) {
  return CleanSet{user, ex, date, idx, weight_kg, reps, amrap};
}

bool reports_equal(const FilterReport& a, const FilterReport& b) {
  if (a.steps.size() != b.steps.size()) return false;
  for (std::size_t i = 0; i < a.steps.size(); ++i)
    if (a.steps[i].sets != b.steps[i].sets ||
        a.steps[i].users != b.steps[i].users)
      return false;
  return a.removals == b.removals &&
         a.near_failure_reasons == b.near_failure_reasons &&
         a.tuples == b.tuples;
}

}  // namespace

TEST_CASE("extraction filters attribute removals to the first failing predicate") {
  const Date d{2024, 3, 4};
  std::vector<RawSetRecord> records = {
      set_of("u1", "bench", d, 0, 80, 8, false, true),      // warmup
      set_of("u1", "bench", d, 1, 0, 8),                    // zero weight
      set_of("u1", "bench", d, 2, 80, 31),                  // rep cap
      set_of("u1", "ghost", d, 3, 80, 8),                   // unknown exercise
      set_of("u1", "custom", d, 4, 80, 8),                  // custom
      set_of("u1", "run", d, 5, 80, 8),                     // non-resistance
      set_of("u1", "pullup", d, 6, 20, 8),                  // bodyweight
      set_of("nogender", "bench", d, 0, 80, 8),             // missing profile
      set_of("nodob", "bench", d, 0, 80, 8),                // missing profile
      set_of("u1", "mystery", d, 7, 80, 8),                 // unclassified
      set_of("u1", "bench", d, 8, 500, 8),                  // weight cap
      set_of("u1", "ball", d, 0, 10, 8),                    // ball name
      set_of("u1", "bench", d, 9, 80, 8),                   // retained
      set_of("u1", "bench", d, 9, 85, 9),                   // duplicate key
  };

  std::map<std::string, std::int64_t> removals;
  const auto clean =
      filter_extraction(records, base_profiles(), base_exercises(), removals);

  REQUIRE(clean.size() == 1);
  CHECK(clean[0].user_id == "u1");
  CHECK(clean[0].weight_kg == 80.0);
  CHECK(removals["warmup"] == 1);
  CHECK(removals["zero_weight"] == 1);
  CHECK(removals["rep_cap"] == 1);
  CHECK(removals["unknown_exercise"] == 1);
  CHECK(removals["custom_exercise"] == 1);
  CHECK(removals["non_resistance"] == 1);
  CHECK(removals["bodyweight_or_assisted"] == 1);
  CHECK(removals["missing_profile"] == 2);
  CHECK(removals["unclassified_exercise"] == 1);
  CHECK(removals["weight_cap"] == 1);
  CHECK(removals["ball_name"] == 1);
  CHECK(removals["duplicate_key"] == 1);
}

TEST_CASE("pounds convert to kilograms before the weight cap") {
  const Date d{2024, 3, 4};
  std::vector<RawSetRecord> records = {
      set_of("u1", "curl", d, 0, 30, 8, false, false, WeightUnit::lb),
      set_of("u1", "bench", d, 0, 1200, 5, false, false, WeightUnit::lb),
  };
  std::map<std::string, std::int64_t> removals;
  const auto clean =
      filter_extraction(records, base_profiles(), base_exercises(), removals);
  REQUIRE(clean.size() == 1);
  CHECK(clean[0].weight_kg == doctest::Approx(30 * 0.45359237).epsilon(1e-12));
  CHECK(removals["weight_cap"] == 1);  // 1200 lb = 544.3 kg
}

TEST_CASE("minor exclusion removes every record of an ever-under-18 user") {
  std::vector<CleanSet> sets;
  sets.push_back(clean_of("minor", "bench", Date{2022, 7, 1}, 0, 60, 10));
  for (int i = 0; i < 50; ++i)
    sets.push_back(clean_of("minor", "bench",
                            Date{2024, 1 + i / 28, 1 + i % 28}, i + 1, 60, 10));
  sets.push_back(clean_of("u1", "bench", Date{2020, 1, 1}, 0, 80, 8));
  sets.push_back(clean_of("u1", "bench", Date{2024, 1, 1}, 0, 85, 6));

  std::map<std::string, std::int64_t> removals;
  const auto kept = exclude_minors(sets, base_profiles(), removals);
  CHECK(removals["minor_user"] == 51);
  REQUIRE(kept.size() == 2);
  for (const auto& s : kept) CHECK(s.user_id == "u1");
}

TEST_CASE("year-level age rule keeps the 18th-calendar-year boundary user") {
  // Born 2006-12-31, workout 2024-01-01: year difference is 18.
  std::vector<CleanSet> sets = {
      clean_of("boundary", "bench", Date{2024, 1, 1}, 0, 80, 8)};
  std::map<std::string, std::int64_t> removals;
  const auto kept = exclude_minors(sets, base_profiles(), removals);
  CHECK(kept.size() == 1);
  CHECK(removals.count("minor_user") == 0);
}

TEST_CASE("near-failure detection") {
  const Date d{2024, 3, 4};

  SUBCASE("rep decline at the same weight marks the later set") {
    const std::vector<CleanSet> sets = {
        clean_of("u1", "bench", d, 0, 60, 10),
        clean_of("u1", "bench", d, 1, 60, 8)};
    const auto nf = detect_near_failure(sets);
    REQUIRE(nf.size() == 1);
    CHECK(nf[0].set_index == 1);
    CHECK(nf[0].reason == NearFailureReason::fatigue);
  }

  SUBCASE("an increase is not a decline") {
    const std::vector<CleanSet> sets = {
        clean_of("u1", "bench", d, 0, 60, 8),
        clean_of("u1", "bench", d, 1, 60, 10)};
    CHECK(detect_near_failure(sets).empty());
  }

  SUBCASE("equal reps are not a decline") {
    const std::vector<CleanSet> sets = {
        clean_of("u1", "bench", d, 0, 60, 10),
        clean_of("u1", "bench", d, 1, 60, 10)};
    CHECK(detect_near_failure(sets).empty());
  }

  SUBCASE("AMRAP flag with a decline reports both") {
    const std::vector<CleanSet> sets = {
        clean_of("u1", "bench", d, 0, 60, 10),
        clean_of("u1", "bench", d, 1, 60, 8, true)};
    const auto nf = detect_near_failure(sets);
    REQUIRE(nf.size() == 1);
    CHECK(nf[0].reason == NearFailureReason::both);
  }

  SUBCASE("AMRAP alone qualifies") {
    const std::vector<CleanSet> sets = {
        clean_of("u1", "bench", d, 0, 60, 10, true)};
    const auto nf = detect_near_failure(sets);
    REQUIRE(nf.size() == 1);
    CHECK(nf[0].reason == NearFailureReason::amrap);
  }

  SUBCASE("any earlier set counts, not just the immediate predecessor") {
    const std::vector<CleanSet> sets = {
        clean_of("u1", "bench", d, 0, 60, 10),
        clean_of("u1", "bench", d, 1, 70, 5),
        clean_of("u1", "bench", d, 2, 60, 9)};
    const auto nf = detect_near_failure(sets);
    REQUIRE(nf.size() == 1);
    CHECK(nf[0].set_index == 2);
  }

  SUBCASE("groups do not leak across days or exercises") {
    const std::vector<CleanSet> sets = {
        clean_of("u1", "bench", Date{2024, 3, 4}, 0, 60, 10),
        clean_of("u1", "bench", Date{2024, 3, 5}, 0, 60, 8),
        clean_of("u1", "curl", Date{2024, 3, 4}, 1, 60, 8)};
    CHECK(detect_near_failure(sets).empty());
  }
}

TEST_CASE("dedup keeps the lowest qualifying set index per workout") {
  const Date d{2024, 3, 4};
  const auto nf = [&](int idx, Date date) {
    return NearFailureSet{"u1", "bench", date, idx,
                          60,   8,       NearFailureReason::amrap};
  };

  SUBCASE("two qualifying sets on one day") {
    const auto kept = dedup_first_per_workout({nf(3, d), nf(1, d)});
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].set_index == 1);
  }
  SUBCASE("singleton unchanged") {
    const auto kept = dedup_first_per_workout({nf(2, d)});
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].set_index == 2);
  }
  SUBCASE("different days both kept") {
    const auto kept =
        dedup_first_per_workout({nf(1, d), nf(2, Date{2024, 3, 6})});
    CHECK(kept.size() == 2);
  }
}

TEST_CASE("window assignment") {
  CHECK(assign_window(Date{2000, 1, 1}, 14) == 0);
  CHECK(assign_window(Date{2000, 1, 14}, 14) == 0);   // day offset 13
  CHECK(assign_window(Date{2000, 1, 15}, 14) == 1);   // day offset 14
  CHECK(assign_window(Date{1999, 12, 31}, 14) == -1);  // pre-anchor
  CHECK(assign_window(Date{1999, 12, 18}, 14) == -1);
  CHECK(assign_window(Date{1999, 12, 17}, 14) == -2);
  CHECK_THROWS_AS(assign_window(Date{2024, 1, 1}, 0), std::domain_error);
}

TEST_CASE("tuple qualification needs two distinct weights and rep counts") {
  const auto nf = [](Date date, int idx, double w, int r) {
    return NearFailureSet{"u1", "bench", date, idx, w, r,
                          NearFailureReason::amrap};
  };
  const Date d1{2024, 3, 4}, d2{2024, 3, 7};

  SUBCASE("distinct weights and reps qualify") {
    const auto tuples =
        build_tuples({nf(d1, 0, 80, 8), nf(d2, 0, 90, 5)}, 14);
    REQUIRE(tuples.size() == 1);
    CHECK(tuples[0].sets.size() == 2);
  }
  SUBCASE("one distinct weight is rejected") {
    CHECK(build_tuples({nf(d1, 0, 80, 8), nf(d2, 0, 80, 6)}, 14).empty());
  }
  SUBCASE("one distinct rep count is rejected") {
    CHECK(build_tuples({nf(d1, 0, 80, 8), nf(d2, 0, 90, 8)}, 14).empty());
  }
  SUBCASE("sets in different windows do not combine") {
    CHECK(build_tuples({nf(d1, 0, 80, 8), nf(Date{2024, 6, 1}, 0, 90, 5)}, 14)
              .empty());
  }
}

TEST_CASE("pipeline output is invariant to input record order") {
  // A small mixed corpus: shuffle the records and expect identical tuples.
  std::vector<RawSetRecord> records;
  const auto day = [](int offset) {
    return civil_from_days(days_from_civil(Date{2024, 1, 1}) + offset);
  };
  for (int u = 0; u < 5; ++u) {
    const std::string user = "u" + std::to_string(u + 1);
    for (int s = 0; s < 6; ++s) {
      const Date d = day(u + s * 3);
      const double w = 60 + 2.5 * ((u + s) % 4);
      records.push_back(set_of(user, "bench", d, 0, w * 0.5, 10, false, true));
      records.push_back(set_of(user, "bench", d, 1, w, 9 + (s % 3)));
      records.push_back(set_of(user, "bench", d, 2, w, 8, s % 2 == 0));
    }
  }
  std::vector<UserProfile> profiles;
  for (int u = 0; u < 5; ++u)
    profiles.push_back(
        {"u" + std::to_string(u + 1), "male", Date{1990, 1, 1}});

  PipelineInputs inputs{records, profiles, base_exercises(), 0};
  const auto base = run_pipeline(inputs);

  SplitMix64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    rng.shuffle(inputs.records);
    const auto shuffled = run_pipeline(inputs);
    REQUIRE(shuffled.tuples.size() == base.tuples.size());
    for (std::size_t i = 0; i < base.tuples.size(); ++i) {
      CHECK(shuffled.tuples[i].user_id == base.tuples[i].user_id);
      CHECK(shuffled.tuples[i].window_index == base.tuples[i].window_index);
      REQUIRE(shuffled.tuples[i].sets.size() == base.tuples[i].sets.size());
      for (std::size_t j = 0; j < base.tuples[i].sets.size(); ++j) {
        CHECK(shuffled.tuples[i].sets[j].set_index ==
              base.tuples[i].sets[j].set_index);
        CHECK(shuffled.tuples[i].sets[j].weight_kg ==
              base.tuples[i].sets[j].weight_kg);
      }
    }
    CHECK(reports_equal(shuffled.report, base.report));
  }
}

TEST_CASE("step counts never increase") {
  std::vector<RawSetRecord> records;
  SplitMix64 rng(23);
  for (int i = 0; i < 300; ++i) {
    const std::string user = "u" + std::to_string(1 + rng.uniform_int(2));
    records.push_back(set_of(user, rng.bernoulli(0.1) ? "ball" : "bench",
                             Date{2024, 1 + (i % 12), 1 + (i % 28)},
                             static_cast<int>(rng.uniform_int(1000)),
                             rng.uniform(1, 120),
                             1 + static_cast<int>(rng.uniform_int(35)),
                             rng.bernoulli(0.3), rng.bernoulli(0.2)));
  }
  PipelineInputs inputs{records, base_profiles(), base_exercises(), 0};
  const auto result = run_pipeline(inputs);
  for (std::size_t i = 1; i < result.report.steps.size(); ++i)
    CHECK(result.report.steps[i].sets <= result.report.steps[i - 1].sets);
}

TEST_CASE("emitted tuples satisfy their invariants") {
  std::vector<NearFailureSet> sets;
  SplitMix64 rng(31);
  for (int i = 0; i < 400; ++i)
    sets.push_back(NearFailureSet{
        "u" + std::to_string(rng.uniform_int(10)), "bench",
        civil_from_days(days_from_civil(Date{2024, 1, 1}) +
                        static_cast<std::int64_t>(rng.uniform_int(60))),
        0, 50.0 + 2.5 * static_cast<double>(rng.uniform_int(10)),
        1 + static_cast<int>(rng.uniform_int(15)), NearFailureReason::amrap});
  // Deduplicate exact key collisions first; build_tuples requires post-dedup
  // input.
  const auto deduped = dedup_first_per_workout(sets);
  for (const auto& t : build_tuples(deduped, 14)) CHECK_NOTHROW(validate(t));
}

TEST_CASE("user subsampling is deterministic under the documented hash") {
  std::vector<RawSetRecord> records;
  std::vector<UserProfile> profiles;
  for (int u = 0; u < 50; ++u) {
    const std::string user = "user" + std::to_string(u);
    profiles.push_back({user, "male", Date{1990, 1, 1}});
    records.push_back(set_of(user, "bench", Date{2024, 3, 4}, 0, 80, 8, true));
  }
  PipelineInputs inputs{records, profiles, base_exercises(), 0};
  PipelineOptions options;
  options.subsample_pct = 30;
  const auto result = run_pipeline(inputs, options);

  std::int64_t expected = 0;
  for (const auto& r : records)
    if (fnv1a64(r.user_id) % 100 < 30) ++expected;
  CHECK(result.report.steps[0].sets == expected);
  CHECK(result.report.subsampled_out ==
        static_cast<std::int64_t>(records.size()) - expected);

  const auto again = run_pipeline(inputs, options);
  CHECK(again.report.steps[0].sets == expected);
}
