#include "repmax/records.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace repmax {

std::string reason_name(NearFailureReason r) {
  switch (r) {
    case NearFailureReason::amrap: return "amrap";
    case NearFailureReason::fatigue: return "fatigue";
    case NearFailureReason::both: return "both";
  }
  throw std::logic_error("reason_name: unknown reason");
}

std::optional<NearFailureReason> parse_reason(const std::string& s) {
  if (s == "amrap") return NearFailureReason::amrap;
  if (s == "fatigue") return NearFailureReason::fatigue;
  if (s == "both") return NearFailureReason::both;
  return std::nullopt;
}

std::int64_t weight_key(double weight_kg) {
  return std::llround(weight_kg * 100.0);
}

void validate(const ObservationTuple& t) {
  if (t.sets.size() < 2)
    throw std::logic_error("ObservationTuple: fewer than 2 sets");
  std::set<int> reps;
  std::set<std::int64_t> weights;
  for (const auto& s : t.sets) {
    if (s.user_id != t.user_id || s.exercise_id != t.exercise_id)
      throw std::logic_error("ObservationTuple: set identifiers disagree");
    if (!(s.weight_kg > 0.0))
      throw std::logic_error("ObservationTuple: non-positive weight");
    if (s.reps < 1 || s.reps > 30)
      throw std::logic_error("ObservationTuple: reps outside [1, 30]");
    reps.insert(s.reps);
    weights.insert(weight_key(s.weight_kg));
  }
  if (reps.size() < 2)
    throw std::logic_error("ObservationTuple: fewer than 2 distinct rep counts");
  if (weights.size() < 2)
    throw std::logic_error("ObservationTuple: fewer than 2 distinct weights");
}

}  // namespace repmax
