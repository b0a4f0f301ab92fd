#pragma once

// User-level k-fold cross-validation: every user's data lands in exactly one
// fold, so held-out evaluation measures generalization to unseen people.
// Fold shuffling uses SplitMix64 over the sorted user list, which pins the
// assignment across platforms for a given seed.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "repmax/metric.hpp"
#include "repmax/optimizer.hpp"
#include "repmax/records.hpp"

namespace repmax {

struct FoldAssignment {
  std::uint64_t seed = 0;
  int n_folds = 5;
  std::map<std::string, int> user_to_fold;
};

// Deterministic shuffle + round-robin. Fold sizes differ by at most one user.
// Throws when there are fewer users than folds.
FoldAssignment assign_folds(const std::vector<std::string>& user_ids,
                            int n_folds, std::uint64_t seed);

struct FoldRow {
  int fold = 0;
  double a = 0.0;
  double b = 0.0;
  double train_sd = 0.0;
  double test_sd = 0.0;
  std::map<std::string, double> test_sd_classical;   // benchmark -> SD
  std::map<std::string, double> improvement_vs;      // benchmark -> percent
  double overfit_pct = 0.0;  // (test_sd - train_sd) / train_sd * 100
  std::int64_t n_train_tuples = 0;
  std::int64_t n_test_tuples = 0;
};

struct CvReport {
  double alpha = kDefaultAlpha;
  int n_folds = 5;
  std::uint64_t seed = 0;
  std::string prng;  // the shuffle algorithm, pinned for reproducibility
  SdConvention convention = kDefaultSdConvention;
  std::vector<FoldRow> folds;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double sd_a = 0.0;  // sample SD across folds
  double sd_b = 0.0;
  double mean_train_sd = 0.0;
  double mean_test_sd = 0.0;
  std::map<std::string, double> mean_improvement_vs;
  double mean_overfit_pct = 0.0;
  double mean_abs_overfit_pct = 0.0;
};

// Re-runs the full two-stage grid search from scratch on each fold's
// training tuples and scores the fitted spec plus all four classical
// benchmarks on the held-out tuples. Throws if any fold ends up with zero
// test tuples, naming the fold.
CvReport run_cv(std::span<const ObservationTuple> tuples, int n_folds,
                std::uint64_t seed, double alpha = kDefaultAlpha,
                const FitOptions& fit_options = {});

}  // namespace repmax
