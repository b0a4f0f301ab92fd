#include "repmax/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace repmax {

namespace {

double mean_set_weight(std::span<const ObservationTuple> tuples) {
  double sum = 0.0;
  std::int64_t n = 0;
  for (const auto& t : tuples)
    for (const auto& s : t.sets) {
      sum += s.weight_kg;
      ++n;
    }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

std::int64_t count_sets(std::span<const ObservationTuple> tuples) {
  std::int64_t n = 0;
  for (const auto& t : tuples) n += static_cast<std::int64_t>(t.sets.size());
  return n;
}

StratumRow make_stratum(const std::string& label,
                        std::span<const ObservationTuple> tuples,
                        const FormulaSpec& spec, SdConvention conv) {
  StratumRow row;
  row.stratum = label;
  row.n_tuples = static_cast<std::int64_t>(tuples.size());
  row.n_sets = count_sets(tuples);
  row.mean_weight_kg = mean_set_weight(tuples);
  row.sd_benchmark =
      mean_sd_log(tuples, ClassicalFormula::brzycki, conv).mean_sd_log;
  row.sd_ours = mean_sd_log(tuples, spec, conv).mean_sd_log;
  row.improvement = improvement(row.sd_benchmark, row.sd_ours);
  return row;
}

std::string lowercase(const std::string& s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

}  // namespace

PerExerciseResult per_exercise_improvement(
    std::span<const ObservationTuple> tuples,
    const std::vector<ExerciseMeta>& exercises, const FormulaSpec& spec,
    int min_tuples, SdConvention conv) {
  std::unordered_map<std::string, const ExerciseMeta*> meta;
  for (const auto& e : exercises) meta.emplace(e.exercise_id, &e);

  std::map<std::string, std::vector<ObservationTuple>> by_exercise;
  for (const auto& t : tuples) by_exercise[t.exercise_id].push_back(t);

  PerExerciseResult result;
  result.min_tuples = min_tuples;
  for (const auto& [ex_id, ex_tuples] : by_exercise) {
    if (static_cast<int>(ex_tuples.size()) < min_tuples) {
      ++result.n_below_threshold;
      continue;
    }
    ExerciseImprovementRow row;
    row.exercise_id = ex_id;
    if (const auto it = meta.find(ex_id); it != meta.end()) {
      row.name = it->second->name;
      if (it->second->is_compound.has_value())
        row.type = *it->second->is_compound ? "compound" : "isolation";
    }
    row.n_tuples = static_cast<std::int64_t>(ex_tuples.size());
    row.mean_weight_kg = mean_set_weight(ex_tuples);
    row.sd_ours = mean_sd_log(ex_tuples, spec, conv).mean_sd_log;
    for (ClassicalFormula f : kClassicalFormulas) {
      const double sd_c = mean_sd_log(ex_tuples, f, conv).mean_sd_log;
      row.sd_classical[classical_name(f)] = sd_c;
      row.improvement_vs[classical_name(f)] = improvement(sd_c, row.sd_ours);
    }
    result.rows.push_back(std::move(row));
  }

  std::stable_sort(result.rows.begin(), result.rows.end(),
                   [](const ExerciseImprovementRow& a,
                      const ExerciseImprovementRow& b) {
                     return a.n_tuples > b.n_tuples;
                   });
  return result;
}

double weight_improvement_correlation(
    const std::vector<ExerciseImprovementRow>& rows) {
  if (rows.size() < 3)
    throw std::domain_error(
        "weight_improvement_correlation: need at least 3 rows");
  const double n = static_cast<double>(rows.size());
  double mx = 0.0, my = 0.0;
  for (const auto& r : rows) {
    mx += r.mean_weight_kg;
    my += r.improvement_vs.at("brzycki");
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& r : rows) {
    const double dx = r.mean_weight_kg - mx;
    const double dy = r.improvement_vs.at("brzycki") - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0))
    throw std::domain_error("weight_improvement_correlation: zero variance");
  return sxy / std::sqrt(sxx * syy);
}

std::vector<AblationRow> ablation(std::span<const ObservationTuple> tuples,
                                  double alpha,
                                  const FitOptions& fit_options) {
  const SdConvention conv = fit_options.convention;
  const double sd_brzycki =
      mean_sd_log(tuples, ClassicalFormula::brzycki, conv).mean_sd_log;

  std::vector<AblationRow> rows;
  {
    AblationRow row;
    row.model = "brzycki";
    row.objective = sd_brzycki;
    rows.push_back(row);
  }
  {
    FixedKOptions opts;
    opts.k_floor = fit_options.k_floor;
    opts.convention = conv;
    opts.threads = fit_options.threads;
    const FixedKResult r = optimize_fixed_k(tuples, alpha, opts);
    AblationRow row;
    row.model = "alpha_only";
    row.objective = r.objective;
    row.improvement_vs_brzycki = improvement(sd_brzycki, r.objective);
    row.k = r.k_opt;
    row.alpha = alpha;
    rows.push_back(row);
  }
  {
    const FitResult r = fit(tuples, 1.0, fit_options);
    AblationRow row;
    row.model = "kw_only";
    row.objective = r.objective;
    row.improvement_vs_brzycki = improvement(sd_brzycki, r.objective);
    row.a = r.a_opt;
    row.b = r.b_opt;
    row.alpha = 1.0;
    rows.push_back(row);
  }
  {
    const FitResult r = fit(tuples, alpha, fit_options);
    AblationRow row;
    row.model = "full";
    row.objective = r.objective;
    row.improvement_vs_brzycki = improvement(sd_brzycki, r.objective);
    row.a = r.a_opt;
    row.b = r.b_opt;
    row.alpha = alpha;
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> default_alpha_grid() {
  std::vector<double> alphas;
  for (int i = 0; i <= 10; ++i) alphas.push_back(0.50 + 0.05 * i);
  return alphas;
}

std::vector<AlphaSweepRow> alpha_sweep(std::span<const ObservationTuple> tuples,
                                       const std::vector<double>& alphas,
                                       const FitOptions& fit_options) {
  std::vector<double> sorted(alphas);
  std::sort(sorted.begin(), sorted.end());
  const double sd_brzycki =
      mean_sd_log(tuples, ClassicalFormula::brzycki, fit_options.convention)
          .mean_sd_log;

  std::vector<AlphaSweepRow> rows;
  for (double alpha : sorted) {
    const FitResult r = fit(tuples, alpha, fit_options);
    AlphaSweepRow row;
    row.alpha = alpha;
    row.a_opt = r.a_opt;
    row.b_opt = r.b_opt;
    row.objective = r.objective;
    row.improvement_vs_brzycki = improvement(sd_brzycki, r.objective);
    rows.push_back(row);
  }
  return rows;
}

std::vector<StratumRow> stratify_tuple_size(
    std::span<const ObservationTuple> tuples, const FormulaSpec& spec,
    SdConvention conv) {
  std::vector<ObservationTuple> pairs, larger;
  for (const auto& t : tuples)
    (t.sets.size() == 2 ? pairs : larger).push_back(t);

  const double total = static_cast<double>(tuples.size());
  std::vector<StratumRow> rows;
  if (!pairs.empty()) {
    StratumRow row = make_stratum("n=2", pairs, spec, conv);
    row.pct_of_total = 100.0 * static_cast<double>(pairs.size()) / total;
    rows.push_back(std::move(row));
  }
  if (!larger.empty()) {
    StratumRow row = make_stratum("n>=3", larger, spec, conv);
    row.pct_of_total = 100.0 * static_cast<double>(larger.size()) / total;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<StratumRow> stratify_window(const PipelineInputs& inputs,
                                        const FormulaSpec& spec,
                                        const std::vector<int>& windows,
                                        const PipelineOptions& base_options,
                                        SdConvention conv) {
  std::vector<StratumRow> rows;
  for (int w : windows) {
    PipelineOptions options = base_options;
    options.window_days = w;
    const PipelineResult result = run_pipeline(inputs, options);
    if (result.tuples.empty()) continue;
    StratumRow row = make_stratum(std::to_string(w), result.tuples, spec, conv);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string equipment_name(EquipmentType e) {
  switch (e) {
    case EquipmentType::barbell: return "barbell";
    case EquipmentType::cable: return "cable";
    case EquipmentType::dumbbell: return "dumbbell";
    case EquipmentType::machine: return "machine";
    case EquipmentType::other: return "other";
  }
  throw std::logic_error("equipment_name: unknown type");
}

EquipmentType classify_equipment(const std::string& exercise_name) {
  const std::string name = lowercase(exercise_name);
  if (name.find("barbell") != std::string::npos) return EquipmentType::barbell;
  if (name.find("dumbbell") != std::string::npos)
    return EquipmentType::dumbbell;
  if (name.find("cable") != std::string::npos) return EquipmentType::cable;
  if (name.find("machine") != std::string::npos) return EquipmentType::machine;
  return EquipmentType::other;
}

std::vector<StratumRow> stratify_equipment(
    std::span<const ObservationTuple> tuples,
    const std::vector<ExerciseMeta>& exercises, const FormulaSpec& spec,
    SdConvention conv) {
  std::unordered_map<std::string, EquipmentType> category;
  for (const auto& e : exercises)
    category.emplace(e.exercise_id, classify_equipment(e.name));

  std::map<EquipmentType, std::vector<ObservationTuple>> grouped;
  std::map<EquipmentType, std::unordered_set<std::string>> group_exercises;
  for (const auto& t : tuples) {
    const auto it = category.find(t.exercise_id);
    const EquipmentType type =
        it == category.end() ? EquipmentType::other : it->second;
    grouped[type].push_back(t);
    group_exercises[type].insert(t.exercise_id);
  }

  std::vector<StratumRow> rows;
  for (const auto& [type, group] : grouped) {
    StratumRow row = make_stratum(equipment_name(type), group, spec, conv);
    row.n_exercises =
        static_cast<std::int64_t>(group_exercises[type].size());
    rows.push_back(std::move(row));
  }
  return rows;
}

FloorActivationReport floor_activation_report(
    std::span<const NearFailureSet> deduped_sets, const FormulaSpec& spec) {
  FloorActivationReport report;
  report.n_sets = static_cast<std::int64_t>(deduped_sets.size());

  if (const auto* ll = std::get_if<LogLinearK>(&spec.k_model)) {
    for (const auto& s : deduped_sets) {
      const double raw = ll->a + ll->b * std::log(s.weight_kg);
      if (raw < spec.k_floor) {
        ++report.n_floored;
        if (!report.max_floored_weight_kg ||
            s.weight_kg > *report.max_floored_weight_kg)
          report.max_floored_weight_kg = s.weight_kg;
      }
    }
    if (ll->b > 0.0) {
      report.k_zero_at_weight_kg = std::exp(-ll->a / ll->b);
      report.k_floor_at_weight_kg = std::exp((spec.k_floor - ll->a) / ll->b);
    }
  } else {
    // Fixed k never dips below the floor (enforced at construction); the
    // root weights are undefined.
  }

  report.pct = report.n_sets == 0
                   ? 0.0
                   : 100.0 * static_cast<double>(report.n_floored) /
                         static_cast<double>(report.n_sets);
  return report;
}

}  // namespace repmax
