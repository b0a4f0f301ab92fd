#pragma once

// Internal-consistency objective: the mean within-tuple standard deviation of
// log-transformed 1RM estimates, plus the relative-improvement statistic.
//
// Working in log space makes the objective immune to multiplicative scaling
// of an estimator, so a formula cannot improve its score by inflating every
// estimate.

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "repmax/formulas.hpp"
#include "repmax/records.hpp"

namespace repmax {

// Which denominator the within-tuple SD uses. Most tuples have two sets, so
// the choice only rescales the objective; it cancels in improvement ratios.
enum class SdConvention { sample, population };

inline constexpr SdConvention kDefaultSdConvention = SdConvention::sample;

const char* sd_convention_name(SdConvention c);

struct ConsistencyScore {
  double mean_sd_log = 0.0;
  std::int64_t n_tuples = 0;
  std::optional<std::vector<double>> per_tuple_sd;  // input order
};

namespace detail {

// SD of a value sequence; shared by the metric entry points and the
// optimizer's fast kernel so both routes are bit-identical.
inline double sd(std::span<const double> values, SdConvention conv) {
  const std::size_t n = values.size();
  if (n < 2)
    return conv == SdConvention::sample ? 0.0 : 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) {
    const double d = v - mean;
    ss += d * d;
  }
  const double denom = conv == SdConvention::sample
                           ? static_cast<double>(n - 1)
                           : static_cast<double>(n);
  return std::sqrt(ss / denom);
}

// Neumaier compensated summation; fixed order in, bit-reproducible out.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

// Indices of `tuples` sorted by (user_id, exercise_id, window_index); the
// deterministic aggregation order for mean_sd_log and the grid objective.
std::vector<std::size_t> sorted_tuple_order(
    std::span<const ObservationTuple> tuples);

}  // namespace detail

// Within-tuple SD of ln(estimate) for an arbitrary estimate callable
// (weight_kg, reps) -> kg.
template <class EstimateFn>
double tuple_sd_log_fn(const ObservationTuple& tuple, EstimateFn&& est,
                       SdConvention conv = kDefaultSdConvention) {
  if (tuple.sets.size() < 2)
    throw std::domain_error("tuple_sd_log: tuple has fewer than 2 sets");
  std::vector<double> logs;
  logs.reserve(tuple.sets.size());
  for (const auto& s : tuple.sets)
    logs.push_back(std::log(est(s.weight_kg, s.reps)));
  return detail::sd(logs, conv);
}

double tuple_sd_log(const ObservationTuple& tuple, const Estimator& estimator,
                    SdConvention conv = kDefaultSdConvention);

// Unweighted mean of tuple_sd_log over all tuples, accumulated in sorted key
// order. Throws on an empty tuple list.
ConsistencyScore mean_sd_log(std::span<const ObservationTuple> tuples,
                             const Estimator& estimator,
                             SdConvention conv = kDefaultSdConvention,
                             bool keep_per_tuple = false);

// Percentage reduction in the objective relative to a classical benchmark:
// (sd_classical - sd_ours) / sd_classical * 100. Positive favors ours.
double improvement(double sd_classical, double sd_ours);

}  // namespace repmax
