#include "repmax/crossval.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "repmax/rng.hpp"

namespace repmax {

FoldAssignment assign_folds(const std::vector<std::string>& user_ids,
                            int n_folds, std::uint64_t seed) {
  if (n_folds < 2)
    throw std::domain_error("assign_folds: n_folds must be at least 2");

  std::vector<std::string> users(user_ids);
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());
  if (static_cast<int>(users.size()) < n_folds)
    throw std::domain_error("assign_folds: fewer users than folds");

  SplitMix64 rng(seed);
  rng.shuffle(users);

  FoldAssignment fa;
  fa.seed = seed;
  fa.n_folds = n_folds;
  for (std::size_t i = 0; i < users.size(); ++i)
    fa.user_to_fold[users[i]] = static_cast<int>(i % n_folds);
  return fa;
}

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

CvReport run_cv(std::span<const ObservationTuple> tuples, int n_folds,
                std::uint64_t seed, double alpha,
                const FitOptions& fit_options) {
  if (tuples.empty()) throw std::domain_error("run_cv: empty tuple list");

  std::vector<std::string> users;
  users.reserve(tuples.size());
  for (const auto& t : tuples) users.push_back(t.user_id);
  const FoldAssignment fa = assign_folds(users, n_folds, seed);

  CvReport report;
  report.alpha = alpha;
  report.n_folds = n_folds;
  report.seed = seed;
  report.prng = std::string(kPrngName) + "+fisher-yates";
  report.convention = fit_options.convention;

  std::vector<double> as, bs, train_sds, test_sds, overfits;
  std::map<std::string, std::vector<double>> improvements;

  for (int fold = 0; fold < n_folds; ++fold) {
    std::vector<ObservationTuple> train, test;
    for (const auto& t : tuples) {
      if (fa.user_to_fold.at(t.user_id) == fold)
        test.push_back(t);
      else
        train.push_back(t);
    }
    if (test.empty())
      throw std::runtime_error("run_cv: fold " + std::to_string(fold) +
                               " has zero test tuples");
    if (train.empty())
      throw std::runtime_error("run_cv: fold " + std::to_string(fold) +
                               " has zero training tuples");

    const FitResult fitted = fit(train, alpha, fit_options);

    FoldRow row;
    row.fold = fold;
    row.a = fitted.a_opt;
    row.b = fitted.b_opt;
    row.train_sd = fitted.objective;
    row.test_sd =
        mean_sd_log(test, fitted.spec(), fit_options.convention).mean_sd_log;
    row.n_train_tuples = static_cast<std::int64_t>(train.size());
    row.n_test_tuples = static_cast<std::int64_t>(test.size());
    for (ClassicalFormula f : kClassicalFormulas) {
      const double sd_c =
          mean_sd_log(test, f, fit_options.convention).mean_sd_log;
      row.test_sd_classical[classical_name(f)] = sd_c;
      row.improvement_vs[classical_name(f)] = improvement(sd_c, row.test_sd);
    }
    row.overfit_pct = (row.test_sd - row.train_sd) / row.train_sd * 100.0;

    as.push_back(row.a);
    bs.push_back(row.b);
    train_sds.push_back(row.train_sd);
    test_sds.push_back(row.test_sd);
    overfits.push_back(row.overfit_pct);
    for (const auto& [name, pct] : row.improvement_vs)
      improvements[name].push_back(pct);

    report.folds.push_back(std::move(row));
  }

  report.mean_a = mean_of(as);
  report.mean_b = mean_of(bs);
  report.sd_a = sample_sd_of(as);
  report.sd_b = sample_sd_of(bs);
  report.mean_train_sd = mean_of(train_sds);
  report.mean_test_sd = mean_of(test_sds);
  for (const auto& [name, v] : improvements)
    report.mean_improvement_vs[name] = mean_of(v);
  report.mean_overfit_pct = mean_of(overfits);
  double abs_sum = 0.0;
  for (double o : overfits) abs_sum += std::abs(o);
  report.mean_abs_overfit_pct = abs_sum / static_cast<double>(overfits.size());

  return report;
}

}  // namespace repmax
