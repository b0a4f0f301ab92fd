#include "repmax/formulas.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace repmax {

FormulaSpec FormulaSpec::log_linear(double alpha, double a, double b,
                                    double k_floor) {
  FormulaSpec spec{alpha, LogLinearK{a, b}, k_floor};
  validate(spec);
  return spec;
}

FormulaSpec FormulaSpec::fixed(double alpha, double k, double k_floor) {
  FormulaSpec spec{alpha, FixedK{k}, k_floor};
  validate(spec);
  return spec;
}

void validate(const FormulaSpec& spec) {
  if (!(spec.alpha > 0.0) || spec.alpha > 1.0)
    throw std::domain_error("FormulaSpec: alpha must be in (0, 1]");
  if (!(spec.k_floor > 0.0))
    throw std::domain_error("FormulaSpec: k_floor must be positive");
  if (const auto* f = std::get_if<FixedK>(&spec.k_model)) {
    if (f->k < spec.k_floor)
      throw std::domain_error("FormulaSpec: fixed k must be >= k_floor");
  }
}

double k_of_w(double weight_kg, const FormulaSpec& spec) {
  if (!(weight_kg > 0.0))
    throw std::domain_error("k_of_w: weight must be positive");
  double raw;
  if (const auto* f = std::get_if<FixedK>(&spec.k_model)) {
    raw = f->k;
  } else {
    const auto& ll = std::get<LogLinearK>(spec.k_model);
    raw = ll.a + ll.b * std::log(weight_kg);
  }
  return std::max(spec.k_floor, raw);
}

double estimate_proposed(double weight_kg, int reps, const FormulaSpec& spec) {
  if (reps < 1) throw std::domain_error("estimate_proposed: reps must be >= 1");
  return estimate_proposed_real(weight_kg, static_cast<double>(reps), spec);
}

double estimate_proposed_real(double weight_kg, double reps,
                              const FormulaSpec& spec) {
  if (!(weight_kg > 0.0))
    throw std::domain_error("estimate_proposed: weight must be positive");
  if (!(reps >= 1.0))
    throw std::domain_error("estimate_proposed: reps must be >= 1");
  const double surplus = std::pow(reps - 1.0, spec.alpha);
  return weight_kg * (1.0 + surplus / k_of_w(weight_kg, spec));
}

std::string classical_name(ClassicalFormula f) {
  switch (f) {
    case ClassicalFormula::brzycki: return "brzycki";
    case ClassicalFormula::epley: return "epley";
    case ClassicalFormula::wathen: return "wathen";
    case ClassicalFormula::mayhew: return "mayhew";
  }
  throw std::logic_error("classical_name: unknown formula");
}

double estimate_classical(ClassicalFormula f, double weight_kg, int reps) {
  if (!(weight_kg > 0.0))
    throw std::domain_error("estimate_classical: weight must be positive");
  if (reps < 1) throw std::domain_error("estimate_classical: reps must be >= 1");
  const double r = static_cast<double>(reps);
  switch (f) {
    case ClassicalFormula::brzycki: {
      const double denom = 1.0278 - 0.0278 * r;
      if (denom <= 0.0)
        throw std::domain_error("estimate_classical: Brzycki singular for this rep count");
      return weight_kg / denom;
    }
    case ClassicalFormula::epley:
      return weight_kg * (1.0 + r / 30.0);
    case ClassicalFormula::wathen:
      return 100.0 * weight_kg / (48.8 + 53.8 * std::exp(-0.075 * r));
    case ClassicalFormula::mayhew:
      return 100.0 * weight_kg / (52.2 + 41.9 * std::exp(-0.055 * r));
  }
  throw std::logic_error("estimate_classical: unknown formula");
}

double estimate(const Estimator& e, double weight_kg, int reps) {
  if (const auto* spec = std::get_if<FormulaSpec>(&e))
    return estimate_proposed(weight_kg, reps, *spec);
  return estimate_classical(std::get<ClassicalFormula>(e), weight_kg, reps);
}

std::string estimator_name(const Estimator& e) {
  if (std::holds_alternative<FormulaSpec>(e)) return "proposed";
  return classical_name(std::get<ClassicalFormula>(e));
}

}  // namespace repmax
