#include "repmax/io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace repmax {

namespace {

using nlohmann::json;

constexpr std::size_t kMaxErrorMessages = 20;

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

template <class T>
void note_error(LoadResult<T>& result, std::size_t line_no,
                const std::string& reason) {
  ++result.malformed;
  if (result.errors.size() < kMaxErrorMessages)
    result.errors.push_back(std::to_string(line_no) + ": " + reason);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

// RFC-4180-style split: quoted fields may contain commas and doubled quotes.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c == '\r') {
      // tolerate CRLF
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

struct CsvHeader {
  std::vector<std::string> names;
  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<int>(i);
    return -1;
  }
};

// Field access that reports a reason instead of throwing.
struct FieldError {
  std::string reason;
};

class Row {
 public:
  // JSONL flavor.
  explicit Row(const json* j) : json_(j) {}
  // CSV flavor.
  Row(const CsvHeader* header, const std::vector<std::string>* fields)
      : header_(header), fields_(fields) {}

  bool has(const std::string& key) const {
    if (json_) {
      const auto it = json_->find(key);
      return it != json_->end() && !it->is_null();
    }
    const int idx = header_->index_of(key);
    return idx >= 0 && idx < static_cast<int>(fields_->size()) &&
           !(*fields_)[static_cast<std::size_t>(idx)].empty();
  }

  std::string get_string(const std::string& key) const {
    if (json_) {
      const auto it = json_->find(key);
      if (it == json_->end() || it->is_null())
        throw FieldError{"missing field '" + key + "'"};
      if (!it->is_string()) throw FieldError{"field '" + key + "' not a string"};
      return it->get<std::string>();
    }
    const int idx = header_->index_of(key);
    if (idx < 0) throw FieldError{"missing column '" + key + "'"};
    if (idx >= static_cast<int>(fields_->size()))
      throw FieldError{"short row"};
    return (*fields_)[static_cast<std::size_t>(idx)];
  }

  long long get_int(const std::string& key) const {
    if (json_) {
      const auto it = json_->find(key);
      if (it == json_->end() || it->is_null())
        throw FieldError{"missing field '" + key + "'"};
      if (!it->is_number_integer())
        throw FieldError{"field '" + key + "' not an integer"};
      return it->get<long long>();
    }
    const std::string s = get_string(key);
    long long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw FieldError{"field '" + key + "' not an integer"};
    return v;
  }

  double get_double(const std::string& key) const {
    if (json_) {
      const auto it = json_->find(key);
      if (it == json_->end() || it->is_null())
        throw FieldError{"missing field '" + key + "'"};
      if (!it->is_number())
        throw FieldError{"field '" + key + "' not a number"};
      return it->get<double>();
    }
    const std::string s = get_string(key);
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw FieldError{"trailing characters"};
      return v;
    } catch (const FieldError&) {
      throw;
    } catch (...) {
      throw FieldError{"field '" + key + "' not a number"};
    }
  }

  bool get_bool(const std::string& key) const {
    if (json_) {
      const auto it = json_->find(key);
      if (it == json_->end() || it->is_null())
        throw FieldError{"missing field '" + key + "'"};
      if (!it->is_boolean())
        throw FieldError{"field '" + key + "' not a boolean"};
      return it->get<bool>();
    }
    const std::string s = get_string(key);
    if (s == "true") return true;
    if (s == "false") return false;
    throw FieldError{"field '" + key + "' not a boolean"};
  }

 private:
  const json* json_ = nullptr;
  const CsvHeader* header_ = nullptr;
  const std::vector<std::string>* fields_ = nullptr;
};

Date get_date(const Row& row, const std::string& key) {
  const auto d = parse_date(row.get_string(key));
  if (!d) throw FieldError{"field '" + key + "' not a valid ISO date"};
  return *d;
}

RawSetRecord parse_set(const Row& row) {
  RawSetRecord r;
  r.user_id = row.get_string("user_id");
  if (r.user_id.empty()) throw FieldError{"empty user_id"};
  r.exercise_id = row.get_string("exercise_id");
  if (r.exercise_id.empty()) throw FieldError{"empty exercise_id"};
  r.workout_date = get_date(row, "workout_date");
  const long long idx = row.get_int("set_index");
  if (idx < 0) throw FieldError{"negative set_index"};
  r.set_index = static_cast<int>(idx);
  r.weight = row.get_double("weight");
  if (r.weight < 0.0) throw FieldError{"negative weight"};
  const std::string unit = row.get_string("unit");
  if (unit == "kg") r.unit = WeightUnit::kg;
  else if (unit == "lb") r.unit = WeightUnit::lb;
  else throw FieldError{"unit must be 'kg' or 'lb'"};
  const long long reps = row.get_int("reps");
  if (reps < 1) throw FieldError{"reps must be >= 1"};
  if (reps > 100000) throw FieldError{"implausible rep count"};
  r.reps = static_cast<int>(reps);
  r.is_amrap = row.get_bool("is_amrap");
  r.is_warmup = row.get_bool("is_warmup");
  return r;
}

UserProfile parse_user(const Row& row) {
  UserProfile p;
  p.user_id = row.get_string("user_id");
  if (p.user_id.empty()) throw FieldError{"empty user_id"};
  if (row.has("gender")) {
    const std::string g = row.get_string("gender");
    if (!g.empty()) p.gender = g;
  }
  if (row.has("dob")) {
    const std::string d = row.get_string("dob");
    if (!d.empty()) {
      const auto date = parse_date(d);
      if (!date) throw FieldError{"field 'dob' not a valid ISO date"};
      p.date_of_birth = *date;
    }
  }
  return p;
}

ExerciseMeta parse_exercise(const Row& row) {
  ExerciseMeta e;
  e.exercise_id = row.get_string("exercise_id");
  if (e.exercise_id.empty()) throw FieldError{"empty exercise_id"};
  e.name = row.get_string("name");
  if (e.name.empty()) throw FieldError{"empty name"};
  e.muscle_group = row.get_string("muscle_group");
  if (row.has("is_compound")) e.is_compound = row.get_bool("is_compound");
  e.is_custom = row.get_bool("is_custom");
  e.is_resistance = row.get_bool("is_resistance");
  e.is_bodyweight_or_assisted = row.get_bool("is_bodyweight_or_assisted");
  return e;
}

template <class T, class ParseFn>
LoadResult<T> load_table(const std::string& path, ParseFn&& parse) {
  LoadResult<T> result;
  std::ifstream in = open_input(path);
  std::string line;
  std::size_t line_no = 0;

  if (has_suffix(path, ".csv")) {
    CsvHeader header;
    if (std::getline(in, line)) {
      ++line_no;
      header.names = split_csv_line(line);
    }
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line == "\r") continue;
      const auto fields = split_csv_line(line);
      try {
        result.rows.push_back(parse(Row(&header, &fields)));
      } catch (const FieldError& e) {
        note_error(result, line_no, e.reason);
      }
    }
    return result;
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      note_error(result, line_no, "invalid JSON object");
      continue;
    }
    try {
      result.rows.push_back(parse(Row(&j)));
    } catch (const FieldError& e) {
      note_error(result, line_no, e.reason);
    }
  }
  return result;
}

}  // namespace

LoadResult<RawSetRecord> load_sets(const std::string& path) {
  return load_table<RawSetRecord>(path, [](const Row& r) { return parse_set(r); });
}

LoadResult<UserProfile> load_users(const std::string& path) {
  return load_table<UserProfile>(path, [](const Row& r) { return parse_user(r); });
}

LoadResult<ExerciseMeta> load_exercises(const std::string& path) {
  return load_table<ExerciseMeta>(path,
                                  [](const Row& r) { return parse_exercise(r); });
}

void write_sets_jsonl(const std::string& path,
                      std::span<const RawSetRecord> records) {
  std::ofstream out = open_output(path);
  for (const auto& r : records) {
    json j;
    j["user_id"] = r.user_id;
    j["exercise_id"] = r.exercise_id;
    j["workout_date"] = format_date(r.workout_date);
    j["set_index"] = r.set_index;
    j["weight"] = r.weight;
    j["unit"] = r.unit == WeightUnit::kg ? "kg" : "lb";
    j["reps"] = r.reps;
    j["is_amrap"] = r.is_amrap;
    j["is_warmup"] = r.is_warmup;
    out << j.dump() << '\n';
  }
}

void write_users_jsonl(const std::string& path,
                       std::span<const UserProfile> profiles) {
  std::ofstream out = open_output(path);
  for (const auto& p : profiles) {
    json j;
    j["user_id"] = p.user_id;
    j["gender"] = p.gender ? json(*p.gender) : json(nullptr);
    j["dob"] = p.date_of_birth ? json(format_date(*p.date_of_birth))
                               : json(nullptr);
    out << j.dump() << '\n';
  }
}

void write_exercises_jsonl(const std::string& path,
                           std::span<const ExerciseMeta> exercises) {
  std::ofstream out = open_output(path);
  for (const auto& e : exercises) {
    json j;
    j["exercise_id"] = e.exercise_id;
    j["name"] = e.name;
    j["muscle_group"] = e.muscle_group;
    j["is_compound"] = e.is_compound ? json(*e.is_compound) : json(nullptr);
    j["is_custom"] = e.is_custom;
    j["is_resistance"] = e.is_resistance;
    j["is_bodyweight_or_assisted"] = e.is_bodyweight_or_assisted;
    out << j.dump() << '\n';
  }
}

std::vector<ObservationTuple> load_tuples(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<ObservationTuple> tuples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": invalid tuple line");
    try {
      ObservationTuple t;
      t.user_id = j.at("user_id").get<std::string>();
      t.exercise_id = j.at("exercise_id").get<std::string>();
      t.window_index = j.at("window_index").get<std::int64_t>();
      for (const auto& sj : j.at("sets")) {
        NearFailureSet s;
        s.user_id = t.user_id;
        s.exercise_id = t.exercise_id;
        const auto d = parse_date(sj.at("workout_date").get<std::string>());
        if (!d) throw std::runtime_error("bad date");
        s.workout_date = *d;
        s.set_index = sj.at("set_index").get<int>();
        s.weight_kg = sj.at("weight_kg").get<double>();
        s.reps = sj.at("reps").get<int>();
        const auto reason = parse_reason(sj.at("reason").get<std::string>());
        if (!reason) throw std::runtime_error("bad reason");
        s.reason = *reason;
        t.sets.push_back(std::move(s));
      }
      validate(t);
      tuples.push_back(std::move(t));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " +
                               e.what());
    }
  }
  return tuples;
}

void write_tuples_jsonl(const std::string& path,
                        std::span<const ObservationTuple> tuples) {
  std::ofstream out = open_output(path);
  for (const auto& t : tuples) {
    json sets = json::array();
    for (const auto& s : t.sets) {
      json sj;
      sj["workout_date"] = format_date(s.workout_date);
      sj["set_index"] = s.set_index;
      sj["weight_kg"] = s.weight_kg;
      sj["reps"] = s.reps;
      sj["reason"] = reason_name(s.reason);
      sets.push_back(std::move(sj));
    }
    json j;
    j["user_id"] = t.user_id;
    j["exercise_id"] = t.exercise_id;
    j["window_index"] = t.window_index;
    j["sets"] = std::move(sets);
    out << j.dump() << '\n';
  }
}

std::vector<NearFailureSet> load_nf_sets(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<NearFailureSet> sets;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": invalid set line");
    try {
      NearFailureSet s;
      s.user_id = j.at("user_id").get<std::string>();
      s.exercise_id = j.at("exercise_id").get<std::string>();
      const auto d = parse_date(j.at("workout_date").get<std::string>());
      if (!d) throw std::runtime_error("bad date");
      s.workout_date = *d;
      s.set_index = j.at("set_index").get<int>();
      s.weight_kg = j.at("weight_kg").get<double>();
      s.reps = j.at("reps").get<int>();
      const auto reason = parse_reason(j.at("reason").get<std::string>());
      if (!reason) throw std::runtime_error("bad reason");
      s.reason = *reason;
      sets.push_back(std::move(s));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " +
                               e.what());
    }
  }
  return sets;
}

void write_nf_sets_jsonl(const std::string& path,
                         std::span<const NearFailureSet> sets) {
  std::ofstream out = open_output(path);
  for (const auto& s : sets) {
    json j;
    j["user_id"] = s.user_id;
    j["exercise_id"] = s.exercise_id;
    j["workout_date"] = format_date(s.workout_date);
    j["set_index"] = s.set_index;
    j["weight_kg"] = s.weight_kg;
    j["reps"] = s.reps;
    j["reason"] = reason_name(s.reason);
    out << j.dump() << '\n';
  }
}

nlohmann::json formula_spec_json(const FormulaSpec& spec) {
  json km;
  if (const auto* f = std::get_if<FixedK>(&spec.k_model)) {
    km["type"] = "fixed";
    km["k"] = f->k;
  } else {
    const auto& ll = std::get<LogLinearK>(spec.k_model);
    km["type"] = "log_linear";
    km["a"] = ll.a;
    km["b"] = ll.b;
  }
  json j;
  j["alpha"] = spec.alpha;
  j["k_model"] = std::move(km);
  j["k_floor"] = spec.k_floor;
  return j;
}

FormulaSpec formula_spec_from_json(const nlohmann::json& j) {
  FormulaSpec spec;
  spec.alpha = j.at("alpha").get<double>();
  spec.k_floor = j.value("k_floor", kDefaultKFloor);
  const auto& km = j.at("k_model");
  const std::string type = km.at("type").get<std::string>();
  if (type == "fixed") {
    spec.k_model = FixedK{km.at("k").get<double>()};
  } else if (type == "log_linear") {
    spec.k_model = LogLinearK{km.at("a").get<double>(), km.at("b").get<double>()};
  } else {
    throw std::runtime_error("formula_spec_from_json: unknown k_model type");
  }
  validate(spec);
  return spec;
}

nlohmann::json filter_report_json(const FilterReport& report) {
  json steps = json::array();
  for (const auto& s : report.steps) {
    json row;
    row["step"] = s.step;
    row["description"] = s.description;
    row["sets"] = s.sets;
    row["users"] = s.users;
    steps.push_back(std::move(row));
  }
  json j;
  j["window_days"] = report.window_days;
  j["subsample_pct"] =
      report.subsample_pct ? json(*report.subsample_pct) : json(nullptr);
  j["malformed"] = report.malformed;
  j["subsampled_out"] = report.subsampled_out;
  j["steps"] = std::move(steps);
  j["tuples"] = report.tuples;
  j["removals"] = report.removals;
  j["near_failure_reasons"] = report.near_failure_reasons;
  return j;
}

namespace {

json grid_json(const GridSpec& g) {
  json j;
  j["a_min"] = g.a_min;
  j["a_max"] = g.a_max;
  j["a_step"] = g.a_step;
  j["b_min"] = g.b_min;
  j["b_max"] = g.b_max;
  j["b_step"] = g.b_step;
  j["points"] = g.point_count();
  return j;
}

json surface_json(std::span<const GridPoint> surface) {
  json arr = json::array();
  for (const auto& p : surface) arr.push_back({p.a, p.b, p.objective});
  return arr;
}

}  // namespace

nlohmann::json fit_result_json(const FitResult& result) {
  json j;
  j["alpha"] = result.alpha;
  j["a_opt"] = result.a_opt;
  j["b_opt"] = result.b_opt;
  j["objective"] = result.objective;
  j["k_floor"] = result.k_floor;
  j["sd_convention"] = sd_convention_name(result.convention);
  j["coarse_grid"] = grid_json(result.coarse_grid);
  j["refine_grid"] = grid_json(result.refine_grid);
  j["coarse_surface"] = surface_json(result.coarse_surface);
  j["refine_surface"] = surface_json(result.refine_surface);
  j["spec"] = formula_spec_json(result.spec());
  return j;
}

nlohmann::json fixed_k_result_json(const FixedKResult& result) {
  auto points = [](std::span<const FixedKPoint> surface) {
    json arr = json::array();
    for (const auto& p : surface) arr.push_back({p.k, p.objective});
    return arr;
  };
  json j;
  j["alpha"] = result.alpha;
  j["k_opt"] = result.k_opt;
  j["objective"] = result.objective;
  j["k_floor"] = result.k_floor;
  j["sd_convention"] = sd_convention_name(result.convention);
  j["coarse_surface"] = points(result.coarse_surface);
  j["refine_surface"] = points(result.refine_surface);
  j["spec"] = formula_spec_json(result.spec());
  return j;
}

nlohmann::json cv_report_json(const CvReport& report) {
  json folds = json::array();
  for (const auto& f : report.folds) {
    json row;
    row["fold"] = f.fold;
    row["a"] = f.a;
    row["b"] = f.b;
    row["train_sd"] = f.train_sd;
    row["test_sd"] = f.test_sd;
    row["test_sd_classical"] = f.test_sd_classical;
    row["improvement_vs"] = f.improvement_vs;
    row["overfit_pct"] = f.overfit_pct;
    row["n_train_tuples"] = f.n_train_tuples;
    row["n_test_tuples"] = f.n_test_tuples;
    folds.push_back(std::move(row));
  }
  json j;
  j["alpha"] = report.alpha;
  j["n_folds"] = report.n_folds;
  j["seed"] = report.seed;
  j["prng"] = report.prng;
  j["sd_convention"] = sd_convention_name(report.convention);
  j["folds"] = std::move(folds);
  j["mean_a"] = report.mean_a;
  j["mean_b"] = report.mean_b;
  j["sd_a"] = report.sd_a;
  j["sd_b"] = report.sd_b;
  j["mean_train_sd"] = report.mean_train_sd;
  j["mean_test_sd"] = report.mean_test_sd;
  j["mean_improvement_vs"] = report.mean_improvement_vs;
  j["mean_overfit_pct"] = report.mean_overfit_pct;
  j["mean_abs_overfit_pct"] = report.mean_abs_overfit_pct;
  return j;
}

nlohmann::json per_exercise_json(const PerExerciseResult& result) {
  json rows = json::array();
  for (const auto& r : result.rows) {
    json row;
    row["exercise_id"] = r.exercise_id;
    row["name"] = r.name;
    row["type"] = r.type;
    row["n_tuples"] = r.n_tuples;
    row["mean_weight_kg"] = r.mean_weight_kg;
    row["sd_ours"] = r.sd_ours;
    row["sd_classical"] = r.sd_classical;
    row["improvement_vs"] = r.improvement_vs;
    rows.push_back(std::move(row));
  }
  json j;
  j["min_tuples"] = result.min_tuples;
  j["n_below_threshold"] = result.n_below_threshold;
  j["rows"] = std::move(rows);
  return j;
}

nlohmann::json ablation_json(std::span<const AblationRow> rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    json row;
    row["model"] = r.model;
    row["objective"] = r.objective;
    row["improvement_vs_brzycki"] = r.improvement_vs_brzycki
                                        ? json(*r.improvement_vs_brzycki)
                                        : json(nullptr);
    row["a"] = r.a ? json(*r.a) : json(nullptr);
    row["b"] = r.b ? json(*r.b) : json(nullptr);
    row["k"] = r.k ? json(*r.k) : json(nullptr);
    row["alpha"] = r.alpha ? json(*r.alpha) : json(nullptr);
    arr.push_back(std::move(row));
  }
  return json{{"rows", std::move(arr)}};
}

nlohmann::json alpha_sweep_json(std::span<const AlphaSweepRow> rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    json row;
    row["alpha"] = r.alpha;
    row["a_opt"] = r.a_opt;
    row["b_opt"] = r.b_opt;
    row["objective"] = r.objective;
    row["improvement_vs_brzycki"] = r.improvement_vs_brzycki;
    arr.push_back(std::move(row));
  }
  return json{{"rows", std::move(arr)}};
}

nlohmann::json strata_json(std::span<const StratumRow> rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    json row;
    row["stratum"] = r.stratum;
    row["n_tuples"] = r.n_tuples;
    row["n_sets"] = r.n_sets;
    row["n_exercises"] = r.n_exercises;
    row["mean_weight_kg"] = r.mean_weight_kg;
    row["pct_of_total"] = r.pct_of_total;
    row["sd_benchmark"] = r.sd_benchmark;
    row["sd_ours"] = r.sd_ours;
    row["improvement"] = r.improvement;
    arr.push_back(std::move(row));
  }
  return json{{"rows", std::move(arr)}};
}

nlohmann::json floor_report_json(const FloorActivationReport& report) {
  auto opt = [](const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
  };
  json j;
  j["n_sets"] = report.n_sets;
  j["n_floored"] = report.n_floored;
  j["pct"] = report.pct;
  j["max_floored_weight_kg"] = opt(report.max_floored_weight_kg);
  j["k_zero_at_weight_kg"] = opt(report.k_zero_at_weight_kg);
  j["k_floor_at_weight_kg"] = opt(report.k_floor_at_weight_kg);
  return j;
}

nlohmann::json ground_truth_json(const GroundTruth& truth) {
  json latents = json::array();
  for (const auto& l : truth.latents)
    latents.push_back({{"user_id", l.user_id},
                       {"exercise_id", l.exercise_id},
                       {"latent_1rm_kg", l.latent_1rm_kg}});
  json labels = json::array();
  for (const auto& l : truth.nf_labels)
    labels.push_back({{"user_id", l.user_id},
                      {"exercise_id", l.exercise_id},
                      {"workout_date", format_date(l.workout_date)},
                      {"set_index", l.set_index},
                      {"reason", reason_name(l.reason)}});
  json j;
  j["truth"] = formula_spec_json(truth.truth);
  j["prng"] = truth.prng;
  j["minors"] = truth.minors;
  j["latents"] = std::move(latents);
  j["near_failure_labels"] = std::move(labels);
  j["stats"] = {{"n_sets", truth.stats.n_sets},
                {"n_nf_sets", truth.stats.n_nf_sets},
                {"mean_reps", truth.stats.mean_reps},
                {"median_reps", truth.stats.median_reps},
                {"mean_weight_kg", truth.stats.mean_weight_kg},
                {"median_weight_kg", truth.stats.median_weight_kg}};
  return j;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out = open_output(path);
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in = open_input(path);
  return json::parse(in);
}

void write_surface_csv(const std::string& path,
                       std::span<const GridPoint> surface) {
  std::ofstream out = open_output(path);
  out << "a,b,objective\n";
  for (const auto& p : surface)
    out << format_double(p.a) << ',' << format_double(p.b) << ','
        << format_double(p.objective) << '\n';
}

void write_k_surface_csv(const std::string& path,
                         std::span<const FixedKPoint> surface) {
  std::ofstream out = open_output(path);
  out << "k,objective\n";
  for (const auto& p : surface)
    out << format_double(p.k) << ',' << format_double(p.objective) << '\n';
}

void write_cv_csv(const std::string& path, const CvReport& report) {
  std::ofstream out = open_output(path);
  out << "fold,a,b,train_sd,test_sd,vs_brzycki,vs_wathen,vs_epley,vs_mayhew,"
         "overfit_pct\n";
  for (const auto& f : report.folds) {
    out << f.fold + 1 << ',' << format_double(f.a) << ',' << format_double(f.b)
        << ',' << format_double(f.train_sd) << ',' << format_double(f.test_sd)
        << ',' << format_double(f.improvement_vs.at("brzycki")) << ','
        << format_double(f.improvement_vs.at("wathen")) << ','
        << format_double(f.improvement_vs.at("epley")) << ','
        << format_double(f.improvement_vs.at("mayhew")) << ','
        << format_double(f.overfit_pct) << '\n';
  }
  out << "mean," << format_double(report.mean_a) << ','
      << format_double(report.mean_b) << ','
      << format_double(report.mean_train_sd) << ','
      << format_double(report.mean_test_sd) << ','
      << format_double(report.mean_improvement_vs.at("brzycki")) << ','
      << format_double(report.mean_improvement_vs.at("wathen")) << ','
      << format_double(report.mean_improvement_vs.at("epley")) << ','
      << format_double(report.mean_improvement_vs.at("mayhew")) << ','
      << format_double(report.mean_overfit_pct) << '\n';
}

void write_per_exercise_csv(const std::string& path,
                            const PerExerciseResult& result) {
  std::ofstream out = open_output(path);
  out << "exercise,type,tuples,mean_weight_kg,vs_brzycki,vs_wathen,vs_epley,"
         "vs_mayhew\n";
  for (const auto& r : result.rows) {
    out << csv_escape(r.name) << ',' << r.type << ',' << r.n_tuples << ','
        << format_double(r.mean_weight_kg) << ','
        << format_double(r.improvement_vs.at("brzycki")) << ','
        << format_double(r.improvement_vs.at("wathen")) << ','
        << format_double(r.improvement_vs.at("epley")) << ','
        << format_double(r.improvement_vs.at("mayhew")) << '\n';
  }
}

void write_ablation_csv(const std::string& path,
                        std::span<const AblationRow> rows) {
  std::ofstream out = open_output(path);
  out << "model,sd_log,vs_brzycki\n";
  for (const auto& r : rows) {
    out << r.model << ',' << format_double(r.objective) << ',';
    if (r.improvement_vs_brzycki)
      out << format_double(*r.improvement_vs_brzycki);
    out << '\n';
  }
}

void write_alpha_sweep_csv(const std::string& path,
                           std::span<const AlphaSweepRow> rows) {
  std::ofstream out = open_output(path);
  out << "alpha,a,b,sd_log,vs_brzycki\n";
  for (const auto& r : rows)
    out << format_double(r.alpha) << ',' << format_double(r.a_opt) << ','
        << format_double(r.b_opt) << ',' << format_double(r.objective) << ','
        << format_double(r.improvement_vs_brzycki) << '\n';
}

void write_strata_csv(const std::string& path,
                      std::span<const StratumRow> rows, StrataTable table) {
  std::ofstream out = open_output(path);
  switch (table) {
    case StrataTable::tuple_size:
      out << "tuple_size,n_tuples,pct_of_total,sd_brzycki,sd_ours,"
             "improvement\n";
      for (const auto& r : rows)
        out << r.stratum << ',' << r.n_tuples << ','
            << format_double(r.pct_of_total) << ','
            << format_double(r.sd_benchmark) << ','
            << format_double(r.sd_ours) << ','
            << format_double(r.improvement) << '\n';
      break;
    case StrataTable::window:
      out << "window_days,n_tuples,n_sets,sd_brzycki,sd_ours,improvement\n";
      for (const auto& r : rows)
        out << r.stratum << ',' << r.n_tuples << ',' << r.n_sets << ','
            << format_double(r.sd_benchmark) << ','
            << format_double(r.sd_ours) << ','
            << format_double(r.improvement) << '\n';
      break;
    case StrataTable::equipment:
      out << "equipment,n_exercises,n_tuples,mean_weight_kg,sd_brzycki,"
             "sd_ours,improvement\n";
      for (const auto& r : rows)
        out << r.stratum << ',' << r.n_exercises << ',' << r.n_tuples << ','
            << format_double(r.mean_weight_kg) << ','
            << format_double(r.sd_benchmark) << ','
            << format_double(r.sd_ours) << ','
            << format_double(r.improvement) << '\n';
      break;
  }
}

std::string sha256_file_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for digest: " + path);

  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw std::runtime_error("EVP_MD_CTX_new failed");
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);

  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace repmax
