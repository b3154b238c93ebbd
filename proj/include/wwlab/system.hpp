#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wwlab/errors.hpp"

namespace wwlab {

/// Finite state space {0..N-1} with point masses and a bijection.
struct FinitePermutation {
  Eigen::VectorXd masses;
  std::vector<std::size_t> perm;

  /// pi(i) = i + 1 mod N with uniform masses 1/N.
  static FinitePermutation cyclic(std::size_t n);
};

/// x -> x + alpha mod 1 with Lebesgue measure, sampled on an M-point grid.
struct CircleRotation {
  double alpha = 0.0;
  std::size_t resolution = 0;
};

/// x -> 2x mod 1 with Lebesgue measure, sampled on an M-point grid.
struct DoublingMap {
  std::size_t resolution = 0;
};

/// x -> x + 1 on the integers with counting measure; sample window [-W, W].
struct IntegerShift {
  std::int64_t window = 0;
};

/// x -> x - 1/x on the real line with Lebesgue measure. Sample points are
/// drawn from a Cauchy law conditioned on [-range, range].
struct BooleMap {
  std::size_t count = 0;
  double range = 0.0;
  std::uint64_t seed = 0;
};

using PartKind = std::variant<FinitePermutation, CircleRotation, DoublingMap, IntegerShift, BooleMap>;

enum class HopfTag { FinitePart, NullConservative, Dissipative };
enum class KroneckerLabel { FullSpace, ConstantsOnly, Empty };

const char* to_string(HopfTag tag);
const char* to_string(KroneckerLabel label);
HopfTag parse_hopf_tag(const std::string& text);

/// Hopf class of a catalog transformation (declared from the known analytic
/// classification, never inferred).
HopfTag analytic_hopf_tag(const PartKind& kind);
KroneckerLabel analytic_kronecker_label(const PartKind& kind);

struct PartSpec {
  std::string name;
  PartKind kind;
  std::optional<HopfTag> hopf;
  /// Invariant density p on a FinitePart: one value per state for finite
  /// permutations, a single constant for circle parts.
  std::optional<std::vector<double>> density;
};

struct SystemSpec {
  std::vector<PartSpec> parts;
  bool disjoint_union = false;

  static SystemSpec single(PartKind kind) { return {{PartSpec{"", std::move(kind), {}, {}}}, false}; }
};

/// Continuous coordinate carried as an unevaluated sum hi + lo.
struct RealCoordinate {
  double hi = 0.0;
  double lo = 0.0;
  double value() const { return hi + lo; }
};

using Coordinate = std::variant<std::int64_t, RealCoordinate>;

struct StatePoint {
  std::size_t part = 0;
  Coordinate coord;
};

/// Real value of a coordinate (index for discrete parts).
inline double coordinate_value(const Coordinate& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  return std::get<RealCoordinate>(c).value();
}

/// One validated component of a system.
class Part {
 public:
  Part(std::string name, PartKind kind, HopfTag hopf, std::optional<Eigen::VectorXd> density);

  const std::string& name() const { return name_; }
  const PartKind& kind() const { return kind_; }
  HopfTag hopf() const { return hopf_; }
  KroneckerLabel kronecker() const { return analytic_kronecker_label(kind_); }
  const std::optional<Eigen::VectorXd>& density() const { return density_; }

  bool is_discrete() const;
  bool is_circle() const;
  bool is_line() const;
  bool has_finite_measure() const;
  /// mu(part); +inf for the line parts.
  double total_mass() const;

  /// Cells of the declared discretization: states, grid points, window
  /// integers or Boole samples.
  std::size_t cell_count() const { return cells_.size(); }
  const Coordinate& cell_coordinate(std::size_t cell) const { return cells_.at(cell); }
  double cell_mass(std::size_t cell) const { return masses_.at(cell); }
  /// Whether a coordinate lies in the part's domain.
  bool contains(const Coordinate& c) const;

  /// T applied once.
  Coordinate apply(const Coordinate& c) const;
  /// T^k applied to c; exact closed form for rotations.
  Coordinate apply_power(const Coordinate& start, std::int64_t k) const;
  /// Density p at a coordinate (1 when no density is declared).
  double density_at(const Coordinate& c) const;

 private:
  std::string name_;
  PartKind kind_;
  HopfTag hopf_;
  std::optional<Eigen::VectorXd> density_;
  std::vector<Coordinate> cells_;
  std::vector<double> masses_;
};

/// Sample cell of a system: a cell of one part, with its global id.
struct SampleCell {
  std::size_t id = 0;
  std::size_t part = 0;
  std::size_t cell = 0;
};

class DynamicalSystem {
 public:
  DynamicalSystem(std::vector<Part> parts, bool disjoint_union)
      : parts_(std::move(parts)), disjoint_union_(disjoint_union) {}

  const std::vector<Part>& parts() const { return parts_; }
  const Part& part(std::size_t i) const { return parts_.at(i); }
  bool is_disjoint_union() const { return disjoint_union_; }
  bool has_finite_measure() const;

  /// All cells of all parts, numbered consecutively part by part.
  std::vector<SampleCell> cells() const;
  StatePoint state_of(const SampleCell& cell) const;
  double mass_of(const SampleCell& cell) const;
  /// Inverse of cells(): global id -> (part, cell).
  SampleCell cell_by_id(std::size_t id) const;
  std::size_t cell_count() const;

  /// Short deterministic description used as the table/system digest.
  std::string describe() const;

 private:
  std::vector<Part> parts_;
  bool disjoint_union_ = false;
};

/// Validates a SystemSpec and builds the system.
DynamicalSystem build_system(const SystemSpec& spec);

/// Sum of cell masses over a finite set of global cell ids (duplicates are
/// counted once).
double measure_of(const DynamicalSystem& sys, const std::vector<std::size_t>& cell_ids);

/// The same system with every finite part re-weighted by its invariant
/// density: mu' = p * mu. Parts without a density are unchanged.
DynamicalSystem with_density_measure(const DynamicalSystem& sys);

/// Iterates T along one orbit.
class Orbit {
 public:
  Orbit(const DynamicalSystem& sys, StatePoint start);

  const StatePoint& state() const { return state_; }
  const Part& part() const { return *part_; }
  std::int64_t step() const { return step_; }
  void advance();

 private:
  const Part* part_;
  StatePoint start_;
  StatePoint state_;
  std::int64_t step_ = 0;
};

/// Sum of 1/|T'(x)| over the two preimages of y under the Boole map.
double boole_preimage_weight(double y);

}  // namespace wwlab
