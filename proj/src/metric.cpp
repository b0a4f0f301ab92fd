#include "repmax/metric.hpp"

#include <algorithm>
#include <tuple>

namespace repmax {

const char* sd_convention_name(SdConvention c) {
  return c == SdConvention::sample ? "sample" : "population";
}

namespace detail {

std::vector<std::size_t> sorted_tuple_order(
    std::span<const ObservationTuple> tuples) {
  std::vector<std::size_t> order(tuples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return std::tie(tuples[a].user_id, tuples[a].exercise_id,
                                     tuples[a].window_index) <
                            std::tie(tuples[b].user_id, tuples[b].exercise_id,
                                     tuples[b].window_index);
                   });
  return order;
}

}  // namespace detail

double tuple_sd_log(const ObservationTuple& tuple, const Estimator& estimator,
                    SdConvention conv) {
  return tuple_sd_log_fn(
      tuple,
      [&](double w, int reps) { return estimate(estimator, w, reps); }, conv);
}

ConsistencyScore mean_sd_log(std::span<const ObservationTuple> tuples,
                             const Estimator& estimator, SdConvention conv,
                             bool keep_per_tuple) {
  if (tuples.empty())
    throw std::domain_error("mean_sd_log: empty tuple list");

  std::vector<double> sds(tuples.size());
  for (std::size_t i = 0; i < tuples.size(); ++i)
    sds[i] = tuple_sd_log(tuples[i], estimator, conv);

  const auto order = detail::sorted_tuple_order(tuples);
  detail::CompensatedSum acc;
  for (std::size_t idx : order) acc.add(sds[idx]);

  ConsistencyScore score;
  score.mean_sd_log = acc.value() / static_cast<double>(tuples.size());
  score.n_tuples = static_cast<std::int64_t>(tuples.size());
  if (keep_per_tuple) score.per_tuple_sd = std::move(sds);
  return score;
}

double improvement(double sd_classical, double sd_ours) {
  if (!(sd_classical > 0.0))
    throw std::domain_error("improvement: classical SD must be positive");
  return (sd_classical - sd_ours) / sd_classical * 100.0;
}

}  // namespace repmax
