#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wwlab/numeric.hpp"
#include "wwlab/system.hpp"

namespace wwlab {

struct Observable;

/// x -> e^{2 pi i k x} on circle parts; the k-th discrete Fourier mode
/// i -> e^{2 pi i k i / N} on finite parts.
struct CharacterObs {
  std::int64_t frequency = 0;
};
struct DeltaState {
  std::int64_t index = 0;
};
/// Indicator of [a, b).
struct IntervalIndicator {
  double a = 0.0;
  double b = 0.0;
};
/// x -> 1 / (1 + x^2).
struct RationalDecay {};
struct Tabulated {
  Eigen::VectorXcd values;
};
struct ConstantObs {
  Complex value;
};
struct LinearCombination {
  std::vector<std::pair<Complex, Observable>> terms;
};
/// f * 1{|f| > level} (keep_above) or f * 1{|f| <= level}.
struct Truncation {
  std::shared_ptr<const Observable> base;
  double level = 0.0;
  bool keep_above = true;
};
/// One observable per part of a disjoint union.
struct PerPart {
  std::vector<Observable> parts;
};

struct Observable {
  using Expr = std::variant<CharacterObs, DeltaState, IntervalIndicator, RationalDecay, Tabulated, ConstantObs,
                            LinearCombination, Truncation, PerPart>;
  Expr expr;

  static Observable character(std::int64_t k) { return {CharacterObs{k}}; }
  static Observable delta(std::int64_t index) { return {DeltaState{index}}; }
  static Observable interval(double a, double b) { return {IntervalIndicator{a, b}}; }
  static Observable rational_decay() { return {RationalDecay{}}; }
  static Observable tabulated(Eigen::VectorXcd values) { return {Tabulated{std::move(values)}}; }
  static Observable constant(Complex c) { return {ConstantObs{c}}; }
  static Observable zero() { return constant(0.0); }
  static Observable combination(std::vector<std::pair<Complex, Observable>> terms) {
    return {LinearCombination{std::move(terms)}};
  }
  static Observable per_part(std::vector<Observable> parts) { return {PerPart{std::move(parts)}}; }
};

Observable operator+(const Observable& a, const Observable& b);
Observable operator*(Complex c, const Observable& f);

std::string describe(const Observable& f);

/// f at a coordinate of a part. `part_index` selects the branch of PerPart.
Complex evaluate(const Observable& f, const Part& part, std::size_t part_index, const Coordinate& c);
inline Complex evaluate(const Observable& f, const DynamicalSystem& sys, const StatePoint& p) {
  return evaluate(f, sys.part(p.part), p.part, p.coord);
}

/// Structural validation: every branch is defined on the parts it is used on.
/// Throws MalformedSpec.
void validate(const DynamicalSystem& sys, const Observable& f);

/// Whether f has finite L^1 norm on the given part (decided from the
/// expression class).
bool is_integrable(const Part& part, std::size_t part_index, const Observable& f);
/// validate() plus integrability on every infinite-measure part. Throws
/// NonIntegrableObservable.
void require_integrable(const DynamicalSystem& sys, const Observable& f);

/// Measure of {|f| > level}; nullopt when it is infinite.
std::optional<double> level_set_measure(const DynamicalSystem& sys, const Observable& f, double level);

struct LevelMeasure {
  double level = 0.0;
  /// nullopt means Infinite.
  std::optional<double> measure;
};

std::vector<LevelMeasure> rmu_membership(const DynamicalSystem& sys, const Observable& f,
                                         const std::vector<double>& levels);
/// f in L^1 + L^inf with every level set of finite measure.
bool in_rmu(const DynamicalSystem& sys, const Observable& f);

struct RmuSplit {
  Observable g;  ///< f on {|f| > delta}
  Observable h;  ///< f on {|f| <= delta}
  /// sup |h|: exact on discrete parts and grids, delta on the Boole line.
  double h_sup = 0.0;
};

/// f = g + h with ||h||_inf <= delta and g integrable. Throws NotInRmu.
RmuSplit rmu_split(const DynamicalSystem& sys, const Observable& f, double delta);

/// Values f(T^k w) for k < n_max, computed in one pass.
std::vector<Complex> orbit_stream(const DynamicalSystem& sys, const StatePoint& start, const Observable& f,
                                  std::int64_t n_max);

/// Calls fn(k, f(T^k w)) for k < n_max without storing the orbit.
template <typename Fn>
void for_each_orbit_value(const DynamicalSystem& sys, const StatePoint& start, const Observable& f,
                          std::int64_t n_max, Fn&& fn) {
  Orbit orbit(sys, start);
  for (std::int64_t k = 0; k < n_max; ++k) {
    fn(k, evaluate(f, orbit.part(), orbit.state().part, orbit.state().coord));
    if (k + 1 < n_max) orbit.advance();
  }
}

struct InvarianceReport {
  double max_discrepancy = 0.0;
  /// Truncation/tail allowance; zero on finite parts.
  double tail_bound = 0.0;
  bool ok = true;
};

/// max over parts and iterates j = 1..n_trials of |int f o T^j - int f|.
/// Finite parts are exact, circle parts use the M-point grid, the integer
/// shift sums over a wide window and the Boole line is integrated by adaptive
/// quadrature on [-window, window] (first iterate only).
InvarianceReport invariance_check(const DynamicalSystem& sys, const Observable& f, int n_trials,
                                  double boole_window = 1e4);

}  // namespace wwlab
