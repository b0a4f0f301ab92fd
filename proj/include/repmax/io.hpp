#pragma once

// File formats: JSONL/CSV loaders for the three input tables, the tuples
// file, and JSON/CSV report writers. Loaders reject malformed records line
// by line with a reason and never abort the stream. Writers are
// deterministic: identical in-memory values produce identical bytes.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "repmax/analysis.hpp"
#include "repmax/crossval.hpp"
#include "repmax/optimizer.hpp"
#include "repmax/pipeline.hpp"
#include "repmax/records.hpp"
#include "repmax/synth.hpp"

namespace repmax {

template <class T>
struct LoadResult {
  std::vector<T> rows;
  std::int64_t malformed = 0;
  std::vector<std::string> errors;  // "<line>: <reason>", capped
};

// Format is chosen by extension: ".csv" is CSV with a header row, anything
// else is treated as JSONL.
LoadResult<RawSetRecord> load_sets(const std::string& path);
LoadResult<UserProfile> load_users(const std::string& path);
LoadResult<ExerciseMeta> load_exercises(const std::string& path);

void write_sets_jsonl(const std::string& path,
                      std::span<const RawSetRecord> records);
void write_users_jsonl(const std::string& path,
                       std::span<const UserProfile> profiles);
void write_exercises_jsonl(const std::string& path,
                           std::span<const ExerciseMeta> exercises);

// The tuples file is machine-written; any malformation is an error.
std::vector<ObservationTuple> load_tuples(const std::string& path);
void write_tuples_jsonl(const std::string& path,
                        std::span<const ObservationTuple> tuples);

// Post-dedup near-failure sets (the floor-activation input).
std::vector<NearFailureSet> load_nf_sets(const std::string& path);
void write_nf_sets_jsonl(const std::string& path,
                         std::span<const NearFailureSet> sets);

nlohmann::json formula_spec_json(const FormulaSpec& spec);
FormulaSpec formula_spec_from_json(const nlohmann::json& j);

nlohmann::json filter_report_json(const FilterReport& report);
nlohmann::json fit_result_json(const FitResult& result);
nlohmann::json fixed_k_result_json(const FixedKResult& result);
nlohmann::json cv_report_json(const CvReport& report);
nlohmann::json per_exercise_json(const PerExerciseResult& result);
nlohmann::json ablation_json(std::span<const AblationRow> rows);
nlohmann::json alpha_sweep_json(std::span<const AlphaSweepRow> rows);
nlohmann::json strata_json(std::span<const StratumRow> rows);
nlohmann::json floor_report_json(const FloorActivationReport& report);
nlohmann::json ground_truth_json(const GroundTruth& truth);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

// Surface exports; row order equals grid iteration order.
void write_surface_csv(const std::string& path,
                       std::span<const GridPoint> surface);
void write_k_surface_csv(const std::string& path,
                         std::span<const FixedKPoint> surface);

void write_cv_csv(const std::string& path, const CvReport& report);
void write_per_exercise_csv(const std::string& path,
                            const PerExerciseResult& result);
void write_ablation_csv(const std::string& path,
                        std::span<const AblationRow> rows);
void write_alpha_sweep_csv(const std::string& path,
                           std::span<const AlphaSweepRow> rows);

enum class StrataTable { tuple_size, window, equipment };
void write_strata_csv(const std::string& path,
                      std::span<const StratumRow> rows, StrataTable table);

std::string sha256_file_hex(const std::string& path);

// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace repmax
