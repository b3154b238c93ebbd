#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wwlab/numeric.hpp"

namespace wwlab {

/// b_k = 1.
struct ConstantWeight {};

/// b_k = e^{2 pi i k theta}, i.e. lambda^k with lambda = e^{2 pi i theta}.
struct CharacterWeight {
  double theta = 0.0;
};

/// P(k) = sum_j z_j e^{2 pi i k theta_j}.
struct TrigPoly {
  std::vector<std::pair<Complex, double>> terms;
};

/// c_k = c / (k+1)^s.
struct PowerDecay {
  double c = 1.0;
  double s = 1.0;
};

/// c_k = bound on the squares k = j^2 (j = 0, 1, 2, ...), zero elsewhere.
struct SparseBounded {
  double bound = 1.0;
};

/// b_k = P(k) + c_k with a perturbation of vanishing Cesaro mean.
struct Besicovitch {
  TrigPoly base;
  std::variant<PowerDecay, SparseBounded> perturbation;
};

struct WeightSequence {
  using Kind = std::variant<ConstantWeight, CharacterWeight, TrigPoly, Besicovitch>;
  Kind kind;

  static WeightSequence constant() { return {ConstantWeight{}}; }
  static WeightSequence character(double theta);
  static WeightSequence trig_poly(std::vector<std::pair<Complex, double>> terms);
  static WeightSequence besicovitch(TrigPoly base, std::variant<PowerDecay, SparseBounded> perturbation);
};

Complex weight_at(const TrigPoly& p, std::int64_t k);
Complex weight_at(const WeightSequence& w, std::int64_t k);

/// Constructive C with |b_k| <= C for every k.
double weight_bound(const WeightSequence& w);

/// Perturbation c_k of a Besicovitch sequence.
double perturbation_at(const Besicovitch& w, std::int64_t k);

/// (1/n) sum_{k<n} |b_k - P(k)|.
double besicovitch_defect(const Besicovitch& w, std::int64_t n);

/// Characters theta_j = j/L, j = 0..L-1.
std::vector<WeightSequence> character_grid(std::int64_t L);

/// "0.25" for characters, the kind name otherwise; used as a CSV label.
std::string weight_label(const WeightSequence& w);
/// Full (kind, parameters) text.
std::string describe(const WeightSequence& w);

}  // namespace wwlab
