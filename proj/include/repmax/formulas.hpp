#pragma once

// One-repetition-maximum estimators: the weight-dependent formula family and
// the four classical benchmark equations.
//
// The proposed family is
//     est(w, r) = w * (1 + (r - 1)^alpha / k(w))
// where k(w) is either a fixed constant or the log-linear a + b*ln(w) (w in
// kg), clamped from below by k_floor. All weights are kilograms by the time
// they reach this module; unit conversion happens at the input layer because
// the log-linear intercept is unit-dependent.

#include <string>
#include <variant>

namespace repmax {

inline constexpr double kDefaultKFloor = 0.5;
inline constexpr double kDefaultAlpha = 0.85;
inline constexpr double kLbToKg = 0.45359237;

struct FixedK {
  double k = 30.0;
};

struct LogLinearK {
  double a = 0.0;  // intercept
  double b = 0.0;  // slope on ln(weight_kg)
};

using KModel = std::variant<FixedK, LogLinearK>;

struct FormulaSpec {
  double alpha = kDefaultAlpha;  // in (0, 1]
  KModel k_model = LogLinearK{};
  double k_floor = kDefaultKFloor;

  static FormulaSpec log_linear(double alpha, double a, double b,
                                double k_floor = kDefaultKFloor);
  static FormulaSpec fixed(double alpha, double k,
                           double k_floor = kDefaultKFloor);
};

// Throws std::domain_error when an invariant is violated:
// alpha in (0, 1], k_floor > 0, and fixed k >= k_floor.
void validate(const FormulaSpec& spec);

// Conversion factor at weight w (kg). Result is always >= spec.k_floor.
double k_of_w(double weight_kg, const FormulaSpec& spec);

// Estimated 1RM in kg for an integer rep count r >= 1. Exactly w at r = 1.
double estimate_proposed(double weight_kg, int reps, const FormulaSpec& spec);

// Continuous-rep extension, used by the corpus generator and its inverse.
double estimate_proposed_real(double weight_kg, double reps,
                              const FormulaSpec& spec);

enum class ClassicalFormula { brzycki, epley, wathen, mayhew };

inline constexpr ClassicalFormula kClassicalFormulas[] = {
    ClassicalFormula::brzycki, ClassicalFormula::epley,
    ClassicalFormula::wathen, ClassicalFormula::mayhew};

std::string classical_name(ClassicalFormula f);

// Brzycki  w / (1.0278 - 0.0278 r)
// Epley    w * (1 + r/30)
// Wathen   100 w / (48.8 + 53.8 e^(-0.075 r))
// Mayhew   100 w / (52.2 + 41.9 e^(-0.055 r))
// Brzycki's denominator hits zero near r = 37; such calls throw. Pipeline
// data never reaches that range (reps are capped at 30) but the guard covers
// direct API use.
double estimate_classical(ClassicalFormula f, double weight_kg, int reps);

// Either side of the comparison: the proposed family or a classical equation.
using Estimator = std::variant<FormulaSpec, ClassicalFormula>;

double estimate(const Estimator& e, double weight_kg, int reps);

std::string estimator_name(const Estimator& e);

}  // namespace repmax
