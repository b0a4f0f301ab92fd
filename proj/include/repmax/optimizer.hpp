#pragma once

// Two-stage grid search over the log-linear (a, b) coefficients, plus the 1-D
// fixed-k search used by the ablation. Grid points are embarrassingly
// parallel; every point writes its own slot and the argmin scan is
// sequential, so results are independent of the thread count.
//
// The hot loop runs over a compiled corpus (per-set ln(w) and (r-1)^alpha
// precomputed) but keeps the arithmetic expression-for-expression identical
// to estimate_proposed + tuple_sd_log, so a reported objective equals
// mean_sd_log at the reported coefficients bit for bit.

#include <cstdint>
#include <span>
#include <vector>

#include "repmax/metric.hpp"
#include "repmax/parallel.hpp"
#include "repmax/records.hpp"

namespace repmax {

struct GridSpec {
  double a_min = -30.0;
  double a_max = 19.5;
  double a_step = 0.5;
  double b_min = 0.5;
  double b_max = 19.9;
  double b_step = 0.2;

  int a_count() const;
  int b_count() const;
  std::int64_t point_count() const;
  double a_at(int i) const { return a_min + i * a_step; }
  double b_at(int i) const { return b_min + i * b_step; }
};

// Throws std::domain_error on non-positive steps or min > max.
void validate(const GridSpec& grid);

struct GridPoint {
  double a = 0.0;
  double b = 0.0;
  double objective = 0.0;
};

struct SurfaceResult {
  std::vector<GridPoint> surface;  // row order: a outer loop, b inner loop
  double a_opt = 0.0;
  double b_opt = 0.0;
  double objective = 0.0;
};

struct FitOptions {
  GridSpec coarse{};           // default coarse grid
  double refine_a_half = 0.5;  // refinement half-width and step on a
  double refine_a_step = 0.05;
  double refine_b_half = 0.2;
  double refine_b_step = 0.02;
  double k_floor = kDefaultKFloor;
  SdConvention convention = kDefaultSdConvention;
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct FitResult {
  double alpha = kDefaultAlpha;
  double a_opt = 0.0;
  double b_opt = 0.0;
  double objective = 0.0;  // mean_sd_log at (a_opt, b_opt)
  GridSpec coarse_grid{};
  GridSpec refine_grid{};
  std::vector<GridPoint> coarse_surface;
  std::vector<GridPoint> refine_surface;
  double k_floor = kDefaultKFloor;
  SdConvention convention = kDefaultSdConvention;

  FormulaSpec spec() const;  // the fitted log-linear spec
};

// Flattened tuple data for one alpha.
class CompiledCorpus {
 public:
  CompiledCorpus(std::span<const ObservationTuple> tuples, double alpha);

  double objective_loglinear(double a, double b, double k_floor,
                             SdConvention conv) const;
  double objective_fixed(double k, double k_floor, SdConvention conv) const;

  std::size_t n_tuples() const { return offsets_.size() - 1; }
  std::size_t n_sets() const { return weight_.size(); }

 private:
  std::vector<std::uint32_t> offsets_;  // tuple i spans [offsets_[i], offsets_[i+1])
  std::vector<double> weight_;
  std::vector<double> log_weight_;
  std::vector<double> rep_pow_;  // (reps - 1)^alpha
};

// Evaluates every grid point; argmin ties break to the lowest objective,
// then lowest a, then lowest b.
SurfaceResult evaluate_grid(std::span<const ObservationTuple> tuples,
                            double alpha, const GridSpec& grid,
                            double k_floor = kDefaultKFloor,
                            SdConvention conv = kDefaultSdConvention,
                            unsigned threads = 0);

// Fine grid centered on the coarse optimum: a +- refine_a_half in steps of
// refine_a_step, likewise for b (21 x 21 = 441 points at the defaults).
FitResult refine(std::span<const ObservationTuple> tuples, double alpha,
                 double center_a, double center_b,
                 const FitOptions& options = {});

// Coarse pass then refinement.
FitResult fit(std::span<const ObservationTuple> tuples,
              double alpha = kDefaultAlpha, const FitOptions& options = {});

struct FixedKOptions {
  double k_min = 1.0;
  double k_max = 40.0;
  double k_step = 0.05;
  double refine_half = 0.05;
  double refine_step = 0.005;
  double k_floor = kDefaultKFloor;
  SdConvention convention = kDefaultSdConvention;
  unsigned threads = 0;
};

struct FixedKPoint {
  double k = 0.0;
  double objective = 0.0;
};

struct FixedKResult {
  double alpha = kDefaultAlpha;
  double k_opt = 0.0;
  double objective = 0.0;
  std::vector<FixedKPoint> coarse_surface;
  std::vector<FixedKPoint> refine_surface;
  double k_floor = kDefaultKFloor;
  SdConvention convention = kDefaultSdConvention;

  FormulaSpec spec() const;
};

// 1-D grid search over a single fixed conversion factor; ties break to the
// lowest k.
FixedKResult optimize_fixed_k(std::span<const ObservationTuple> tuples,
                              double alpha,
                              const FixedKOptions& options = {});

}  // namespace repmax
