#include "repmax/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace repmax {

namespace {

int count_from_range(double lo, double hi, double step) {
  return static_cast<int>(std::llround((hi - lo) / step)) + 1;
}

unsigned resolve_threads(unsigned requested) {
  return requested == 0 ? default_threads() : requested;
}

}  // namespace

int GridSpec::a_count() const { return count_from_range(a_min, a_max, a_step); }
int GridSpec::b_count() const { return count_from_range(b_min, b_max, b_step); }

std::int64_t GridSpec::point_count() const {
  return static_cast<std::int64_t>(a_count()) * b_count();
}

void validate(const GridSpec& grid) {
  if (!(grid.a_step > 0.0) || !(grid.b_step > 0.0))
    throw std::domain_error("GridSpec: steps must be positive");
  if (grid.a_min > grid.a_max || grid.b_min > grid.b_max)
    throw std::domain_error("GridSpec: min must not exceed max");
}

FormulaSpec FitResult::spec() const {
  return FormulaSpec{alpha, LogLinearK{a_opt, b_opt}, k_floor};
}

FormulaSpec FixedKResult::spec() const {
  return FormulaSpec::fixed(alpha, k_opt, k_floor);
}

CompiledCorpus::CompiledCorpus(std::span<const ObservationTuple> tuples,
                               double alpha) {
  if (tuples.empty())
    throw std::domain_error("CompiledCorpus: empty tuple list");
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::domain_error("CompiledCorpus: alpha must be in (0, 1]");

  const auto order = detail::sorted_tuple_order(tuples);
  offsets_.reserve(tuples.size() + 1);
  offsets_.push_back(0);
  for (std::size_t idx : order) {
    const auto& t = tuples[idx];
    if (t.sets.size() < 2)
      throw std::domain_error("CompiledCorpus: tuple has fewer than 2 sets");
    for (const auto& s : t.sets) {
      if (!(s.weight_kg > 0.0) || s.reps < 1)
        throw std::domain_error("CompiledCorpus: invalid set");
      weight_.push_back(s.weight_kg);
      log_weight_.push_back(std::log(s.weight_kg));
      rep_pow_.push_back(std::pow(static_cast<double>(s.reps) - 1.0, alpha));
    }
    offsets_.push_back(static_cast<std::uint32_t>(weight_.size()));
  }
}

double CompiledCorpus::objective_loglinear(double a, double b, double k_floor,
                                           SdConvention conv) const {
  thread_local std::vector<double> logs;
  detail::CompensatedSum acc;
  const std::size_t n = n_tuples();
  for (std::size_t t = 0; t < n; ++t) {
    const std::uint32_t lo = offsets_[t];
    const std::uint32_t hi = offsets_[t + 1];
    logs.clear();
    for (std::uint32_t i = lo; i < hi; ++i) {
      const double k = std::max(k_floor, a + b * log_weight_[i]);
      logs.push_back(std::log(weight_[i] * (1.0 + rep_pow_[i] / k)));
    }
    acc.add(detail::sd(logs, conv));
  }
  return acc.value() / static_cast<double>(n);
}

double CompiledCorpus::objective_fixed(double k_raw, double k_floor,
                                       SdConvention conv) const {
  thread_local std::vector<double> logs;
  detail::CompensatedSum acc;
  const double k = std::max(k_floor, k_raw);
  const std::size_t n = n_tuples();
  for (std::size_t t = 0; t < n; ++t) {
    const std::uint32_t lo = offsets_[t];
    const std::uint32_t hi = offsets_[t + 1];
    logs.clear();
    for (std::uint32_t i = lo; i < hi; ++i)
      logs.push_back(std::log(weight_[i] * (1.0 + rep_pow_[i] / k)));
    acc.add(detail::sd(logs, conv));
  }
  return acc.value() / static_cast<double>(n);
}

namespace {

SurfaceResult evaluate_grid_compiled(const CompiledCorpus& corpus,
                                     const GridSpec& grid, double k_floor,
                                     SdConvention conv, unsigned threads) {
  validate(grid);
  const int na = grid.a_count();
  const int nb = grid.b_count();
  const std::size_t n_points = static_cast<std::size_t>(na) * nb;

  std::vector<double> objectives(n_points);
  parallel_for(n_points, resolve_threads(threads), [&](std::size_t idx) {
    const int ia = static_cast<int>(idx) / nb;
    const int ib = static_cast<int>(idx) % nb;
    objectives[idx] =
        corpus.objective_loglinear(grid.a_at(ia), grid.b_at(ib), k_floor, conv);
  });

  SurfaceResult result;
  result.surface.reserve(n_points);
  std::size_t best = 0;
  for (std::size_t idx = 0; idx < n_points; ++idx) {
    const int ia = static_cast<int>(idx) / nb;
    const int ib = static_cast<int>(idx) % nb;
    result.surface.push_back({grid.a_at(ia), grid.b_at(ib), objectives[idx]});
    // Strictly-lower comparison in (a, b) iteration order realizes the
    // lowest-objective, then lowest-a, then lowest-b tie-break.
    if (objectives[idx] < objectives[best]) best = idx;
  }
  result.a_opt = result.surface[best].a;
  result.b_opt = result.surface[best].b;
  result.objective = result.surface[best].objective;
  return result;
}

GridSpec refinement_grid(double center_a, double center_b,
                         const FitOptions& options) {
  GridSpec g;
  g.a_min = center_a - options.refine_a_half;
  g.a_max = center_a + options.refine_a_half;
  g.a_step = options.refine_a_step;
  g.b_min = center_b - options.refine_b_half;
  g.b_max = center_b + options.refine_b_half;
  g.b_step = options.refine_b_step;
  return g;
}

}  // namespace

SurfaceResult evaluate_grid(std::span<const ObservationTuple> tuples,
                            double alpha, const GridSpec& grid, double k_floor,
                            SdConvention conv, unsigned threads) {
  const CompiledCorpus corpus(tuples, alpha);
  return evaluate_grid_compiled(corpus, grid, k_floor, conv, threads);
}

FitResult refine(std::span<const ObservationTuple> tuples, double alpha,
                 double center_a, double center_b, const FitOptions& options) {
  const CompiledCorpus corpus(tuples, alpha);
  const GridSpec fine = refinement_grid(center_a, center_b, options);
  SurfaceResult sr = evaluate_grid_compiled(corpus, fine, options.k_floor,
                                            options.convention,
                                            options.threads);
  FitResult result;
  result.alpha = alpha;
  result.a_opt = sr.a_opt;
  result.b_opt = sr.b_opt;
  result.objective = sr.objective;
  result.refine_grid = fine;
  result.refine_surface = std::move(sr.surface);
  result.k_floor = options.k_floor;
  result.convention = options.convention;
  return result;
}

FitResult fit(std::span<const ObservationTuple> tuples, double alpha,
              const FitOptions& options) {
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::domain_error("fit: alpha must be in (0, 1]");
  const CompiledCorpus corpus(tuples, alpha);

  SurfaceResult coarse = evaluate_grid_compiled(
      corpus, options.coarse, options.k_floor, options.convention,
      options.threads);

  const GridSpec fine = refinement_grid(coarse.a_opt, coarse.b_opt, options);
  SurfaceResult refined = evaluate_grid_compiled(
      corpus, fine, options.k_floor, options.convention, options.threads);

  FitResult result;
  result.alpha = alpha;
  result.a_opt = refined.a_opt;
  result.b_opt = refined.b_opt;
  result.objective = refined.objective;
  result.coarse_grid = options.coarse;
  result.refine_grid = fine;
  result.coarse_surface = std::move(coarse.surface);
  result.refine_surface = std::move(refined.surface);
  result.k_floor = options.k_floor;
  result.convention = options.convention;
  return result;
}

FixedKResult optimize_fixed_k(std::span<const ObservationTuple> tuples,
                              double alpha, const FixedKOptions& options) {
  if (!(options.k_step > 0.0) || !(options.refine_step > 0.0))
    throw std::domain_error("optimize_fixed_k: steps must be positive");
  if (options.k_min > options.k_max)
    throw std::domain_error("optimize_fixed_k: k_min must not exceed k_max");
  if (options.k_min < options.k_floor)
    throw std::domain_error("optimize_fixed_k: k grid must start at or above k_floor");

  const CompiledCorpus corpus(tuples, alpha);
  const unsigned threads = resolve_threads(options.threads);

  auto scan = [&](double lo, double hi, double step) {
    const int n = count_from_range(lo, hi, step);
    std::vector<double> objectives(static_cast<std::size_t>(n));
    parallel_for(objectives.size(), threads, [&](std::size_t i) {
      objectives[i] = corpus.objective_fixed(lo + static_cast<double>(i) * step,
                                             options.k_floor,
                                             options.convention);
    });
    std::vector<FixedKPoint> surface(objectives.size());
    std::size_t best = 0;
    for (std::size_t i = 0; i < objectives.size(); ++i) {
      surface[i] = {lo + static_cast<double>(i) * step, objectives[i]};
      if (objectives[i] < objectives[best]) best = i;
    }
    return std::pair(std::move(surface), best);
  };

  auto [coarse, coarse_best] = scan(options.k_min, options.k_max, options.k_step);
  const double center = coarse[coarse_best].k;
  const double ref_lo = std::max(options.k_floor, center - options.refine_half);
  auto [fine, fine_best] = scan(ref_lo, center + options.refine_half,
                                options.refine_step);

  FixedKResult result;
  result.alpha = alpha;
  result.k_opt = fine[fine_best].k;
  result.objective = fine[fine_best].objective;
  result.coarse_surface = std::move(coarse);
  result.refine_surface = std::move(fine);
  result.k_floor = options.k_floor;
  result.convention = options.convention;
  return result;
}

}  // namespace repmax
