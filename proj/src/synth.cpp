#include "repmax/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "repmax/rng.hpp"

namespace repmax {

std::vector<SynthExercise> default_synth_exercises() {
  return {
      {"Dumbbell Lateral Raise", "shoulders", false, 5.0, 15.0},
      {"Dumbbell Bicep Curl", "biceps", false, 7.5, 22.5},
      {"Cable Rope Tricep Extension", "triceps", false, 15.0, 35.0},
      {"Lat Pulldown", "back", true, 35.0, 75.0},
      {"Barbell Bench Press", "chest", true, 40.0, 110.0},
      {"Back Squat", "quadriceps", true, 60.0, 180.0},
  };
}

void validate(const SynthConfig& config) {
  std::string bad;
  auto flag = [&](const char* field) {
    if (!bad.empty()) bad += ", ";
    bad += field;
  };

  if (config.n_users < 1) flag("n_users");
  if (config.exercises.empty()) flag("exercises");
  for (const auto& e : config.exercises) {
    if (e.name.empty() || !(e.weight_min_kg > 0.0) ||
        e.weight_min_kg > e.weight_max_kg ||
        e.weight_min_kg < config.weight_increment_kg) {
      flag("exercises");
      break;
    }
  }
  if (config.rep_noise_sd < 0.0) flag("rep_noise_sd");
  if (config.amrap_rate < 0.0 || config.amrap_rate > 1.0) flag("amrap_rate");
  if (config.sessions_per_user < 1) flag("sessions_per_user");
  if (config.session_gap_days < 1) flag("session_gap_days");
  if (config.exercises_per_user < 1 ||
      config.exercises_per_user > static_cast<int>(config.exercises.size()))
    flag("exercises_per_user");
  if (!is_valid_date(config.start_date)) flag("start_date");
  if (config.start_jitter_days < 0) flag("start_jitter_days");
  if (config.minor_fraction < 0.0 || config.minor_fraction > 1.0)
    flag("minor_fraction");
  if (!(config.weight_increment_kg > 0.0)) flag("weight_increment_kg");
  try {
    validate(config.truth);
  } catch (const std::exception&) {
    flag("truth");
  }

  if (!bad.empty())
    throw std::invalid_argument("SynthConfig: invalid fields: " + bad);
}

double invert_formula(double latent_1rm_kg, double weight_kg,
                      const FormulaSpec& spec) {
  if (!(weight_kg > 0.0))
    throw std::domain_error("invert_formula: weight must be positive");
  if (latent_1rm_kg < weight_kg)
    throw std::domain_error("invert_formula: latent 1RM below the weight");
  const double surplus = k_of_w(weight_kg, spec) *
                         (latent_1rm_kg / weight_kg - 1.0);
  return 1.0 + std::pow(surplus, 1.0 / spec.alpha);
}

namespace {

std::string padded_id(const char* prefix, int index, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, width, index);
  return std::string(buf);
}

double snap(double weight, double increment) {
  return std::max(increment,
                  std::round(weight / increment) * increment);
}

// Largest multiple of the increment strictly usable under the latent max.
double cap_below(double weight, double latent, double increment) {
  if (weight <= latent) return weight;
  return std::max(increment, std::floor(latent / increment) * increment);
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

SynthCorpus generate_corpus(const SynthConfig& config) {
  validate(config);

  SynthCorpus out;
  out.truth.truth = config.truth;
  out.truth.prng = kPrngName;

  const int id_width = 6;
  for (std::size_t i = 0; i < config.exercises.size(); ++i) {
    const auto& e = config.exercises[i];
    ExerciseMeta meta;
    meta.exercise_id = padded_id("ex", static_cast<int>(i) + 1, 3);
    meta.name = e.name;
    meta.muscle_group = e.muscle_group;
    meta.is_compound = e.is_compound;
    meta.is_custom = false;
    meta.is_resistance = true;
    meta.is_bodyweight_or_assisted = false;
    out.exercises.push_back(std::move(meta));
  }

  std::vector<double> nf_reps, nf_weights;
  std::int64_t n_sets = 0;

  for (int u = 0; u < config.n_users; ++u) {
    SplitMix64 rng(derive_seed(config.seed, static_cast<std::uint64_t>(u)));
    const std::string user_id = padded_id("u", u + 1, id_width);

    const bool minor = rng.bernoulli(config.minor_fraction);
    const int age = minor ? 16 + static_cast<int>(rng.uniform_int(2))
                          : 19 + static_cast<int>(rng.uniform_int(37));
    UserProfile profile;
    profile.user_id = user_id;
    profile.gender = rng.bernoulli(0.8) ? "male" : "female";
    profile.date_of_birth =
        Date{config.start_date.year - age,
             1 + static_cast<int>(rng.uniform_int(12)),
             1 + static_cast<int>(rng.uniform_int(28))};
    out.profiles.push_back(std::move(profile));
    if (minor) out.truth.minors.push_back(user_id);

    // Exercise selection: shuffle indices, take the first m.
    std::vector<std::size_t> ex_order(config.exercises.size());
    for (std::size_t i = 0; i < ex_order.size(); ++i) ex_order[i] = i;
    rng.shuffle(ex_order);
    ex_order.resize(static_cast<std::size_t>(config.exercises_per_user));

    // One latent 1RM per (user, exercise), log-uniform and constant over the
    // whole corpus, which keeps true strength exactly stable in every window.
    std::vector<double> latents(ex_order.size());
    for (std::size_t j = 0; j < ex_order.size(); ++j) {
      const auto& ex = config.exercises[ex_order[j]];
      const double lo = std::log(ex.weight_min_kg * 1.3);
      const double hi = std::log(ex.weight_max_kg * 1.3);
      latents[j] = std::exp(rng.uniform(lo, hi));
      out.truth.latents.push_back(
          {user_id, out.exercises[ex_order[j]].exercise_id, latents[j]});
    }

    const std::int64_t start_day =
        days_from_civil(config.start_date) +
        static_cast<std::int64_t>(rng.uniform_int(
            static_cast<std::uint64_t>(config.start_jitter_days) + 1));

    for (int s = 0; s < config.sessions_per_user; ++s) {
      const Date date = civil_from_days(
          start_day + static_cast<std::int64_t>(s) * config.session_gap_days);

      for (std::size_t j = 0; j < ex_order.size(); ++j) {
        const std::string& ex_id = out.exercises[ex_order[j]].exercise_id;
        const double latent = latents[j];
        const double inc = config.weight_increment_kg;

        // Pick a target rep count the way lifters do, then derive the weight
        // whose formula-consistent reps hit that target. Keeps the rep
        // distribution comparable across light and heavy exercises.
        const double r_target = rng.uniform(2.0, 15.0);
        const double surplus =
            std::pow(r_target - 1.0, config.truth.alpha);
        double w = latent * 0.7;
        for (int it = 0; it < 30; ++it)
          w = latent / (1.0 + surplus / k_of_w(w, config.truth));
        w = cap_below(snap(w, inc), latent, inc);

        const double r_real = invert_formula(latent, w, config.truth);
        const double r_noisy =
            config.rep_noise_sd > 0.0
                ? r_real + rng.normal(0.0, config.rep_noise_sd)
                : r_real;

        const bool amrap = rng.bernoulli(config.amrap_rate);
        // Fatigue-pattern sets keep the planted reps at <= 29 so the staged
        // preceding set (reps + 1) survives the 30-rep cap.
        const int rep_hi = amrap ? 30 : 29;
        const int planted = static_cast<int>(
            std::clamp<long long>(std::llround(r_noisy), 1,
                       static_cast<long long>(rep_hi)));

        auto emit = [&](int idx, double weight, int reps, bool is_amrap,
                        bool is_warmup) {
          out.records.push_back(RawSetRecord{user_id, ex_id, date, idx, weight,
                                             WeightUnit::kg, reps, is_amrap,
                                             is_warmup});
          ++n_sets;
        };

        // idx 0: warmup.
        emit(0, snap(w * 0.5, inc), 8, false, true);

        NearFailureReason reason;
        if (amrap) {
          const bool stage_decline = rng.bernoulli(0.15) && planted < 30;
          if (stage_decline) {
            emit(1, w, planted + 1, false, false);
            reason = NearFailureReason::both;
          } else {
            // Distinct-weight work set at clearly sub-maximal reps.
            double w_work = w > inc * 1.5 ? w - inc : w + inc;
            w_work = cap_below(w_work, latent, inc);
            if (weight_key(w_work) == weight_key(w))
              w_work = std::max(inc, w - inc);
            int r_work = 1;
            if (weight_key(w_work) != weight_key(w)) {
              const double cap = invert_formula(latent, w_work, config.truth);
              r_work = static_cast<int>(std::clamp<long long>(
                  std::llround(cap) - 2 -
                      static_cast<long long>(rng.uniform_int(3)),
                  1, 30));
            }
            emit(1, w_work, r_work, false, false);
            reason = NearFailureReason::amrap;
          }
          emit(2, w, planted, true, false);
        } else {
          emit(1, w, planted + 1, false, false);
          emit(2, w, planted, false, false);
          reason = NearFailureReason::fatigue;
        }
        out.truth.nf_labels.push_back({user_id, ex_id, date, 2, reason});
        nf_reps.push_back(static_cast<double>(planted));
        nf_weights.push_back(w);
      }
    }
  }

  std::sort(out.records.begin(), out.records.end(),
            [](const RawSetRecord& a, const RawSetRecord& b) {
              return std::tie(a.user_id, a.workout_date, a.exercise_id,
                              a.set_index) <
                     std::tie(b.user_id, b.workout_date, b.exercise_id,
                              b.set_index);
            });

  auto& st = out.truth.stats;
  st.n_sets = n_sets;
  st.n_nf_sets = static_cast<std::int64_t>(nf_reps.size());
  if (!nf_reps.empty()) {
    double rep_sum = 0.0, wt_sum = 0.0;
    for (double r : nf_reps) rep_sum += r;
    for (double w : nf_weights) wt_sum += w;
    st.mean_reps = rep_sum / static_cast<double>(nf_reps.size());
    st.median_reps = median_of(nf_reps);
    st.mean_weight_kg = wt_sum / static_cast<double>(nf_weights.size());
    st.median_weight_kg = median_of(nf_weights);
  }
  return out;
}

}  // namespace repmax
