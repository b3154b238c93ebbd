#include "wwlab/system.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "wwlab/numeric.hpp"

namespace wwlab {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool is_power_of_two(std::size_t m) { return m != 0 && (m & (m - 1)) == 0; }

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// hi + lo with hi reduced to [0, 1).
RealCoordinate normalize(double hi, double lo) {
  const double total = hi + lo;
  lo = lo - (total - hi);
  hi = total;
  const double whole = std::floor(hi);
  hi -= whole;
  if (hi >= 1.0) hi -= 1.0;
  if (hi < 0.0) hi += 1.0;
  return {hi, lo};
}

void check_finite_permutation(const FinitePermutation& fp) {
  const std::size_t n = fp.perm.size();
  if (n == 0) throw MalformedSpec("finite permutation needs at least one state");
  if (static_cast<std::size_t>(fp.masses.size()) != n)
    throw MalformedSpec("mass vector has " + std::to_string(fp.masses.size()) + " entries, permutation has " +
                        std::to_string(n));
  std::vector<bool> hit(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = fp.perm[i];
    if (j >= n || hit[j]) throw MalformedSpec("permutation is not a bijection at state " + std::to_string(i));
    hit[j] = true;
    if (!(fp.masses[i] > 0.0) || !std::isfinite(fp.masses[i]))
      throw MalformedSpec("mass of state " + std::to_string(i) + " must be positive and finite");
  }
  const double scale = fp.masses.maxCoeff();
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(fp.masses[fp.perm[i]] - fp.masses[i]) > 1e-12 * scale)
      throw MalformedSpec("masses are not constant along the orbit of state " + std::to_string(i));
  }
}

void check_kind(const PartKind& kind) {
  std::visit(Overloaded{
                 [](const FinitePermutation& fp) { check_finite_permutation(fp); },
                 [](const CircleRotation& r) {
                   if (!(r.alpha > 0.0 && r.alpha < 1.0)) throw MalformedSpec("rotation alpha must lie in (0, 1)");
                   if (!is_power_of_two(r.resolution)) throw MalformedSpec("quadrature resolution must be a power of two");
                 },
                 [](const DoublingMap& d) {
                   if (!is_power_of_two(d.resolution)) throw MalformedSpec("quadrature resolution must be a power of two");
                 },
                 [](const IntegerShift& s) {
                   if (s.window < 1) throw MalformedSpec("integer shift window must be >= 1");
                 },
                 [](const BooleMap& b) {
                   if (b.count == 0) throw MalformedSpec("Boole map needs at least one sample point");
                   if (!(b.range > 0.0) || !std::isfinite(b.range)) throw MalformedSpec("Boole sample range must be positive");
                 },
             },
             kind);
}

}  // namespace

FinitePermutation FinitePermutation::cyclic(std::size_t n) {
  FinitePermutation fp;
  fp.masses = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
  fp.perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) fp.perm[i] = (i + 1) % n;
  return fp;
}

const char* to_string(HopfTag tag) {
  switch (tag) {
    case HopfTag::FinitePart: return "FinitePart";
    case HopfTag::NullConservative: return "NullConservative";
    case HopfTag::Dissipative: return "Dissipative";
  }
  return "?";
}

const char* to_string(KroneckerLabel label) {
  switch (label) {
    case KroneckerLabel::FullSpace: return "FullSpace";
    case KroneckerLabel::ConstantsOnly: return "ConstantsOnly";
    case KroneckerLabel::Empty: return "Empty";
  }
  return "?";
}

HopfTag parse_hopf_tag(const std::string& text) {
  if (text == "FinitePart") return HopfTag::FinitePart;
  if (text == "NullConservative") return HopfTag::NullConservative;
  if (text == "Dissipative") return HopfTag::Dissipative;
  throw MalformedSpec("unknown Hopf tag '" + text + "'");
}

HopfTag analytic_hopf_tag(const PartKind& kind) {
  return std::visit(Overloaded{
                        [](const IntegerShift&) { return HopfTag::Dissipative; },
                        [](const BooleMap&) { return HopfTag::NullConservative; },
                        [](const auto&) { return HopfTag::FinitePart; },
                    },
                    kind);
}

KroneckerLabel analytic_kronecker_label(const PartKind& kind) {
  return std::visit(Overloaded{
                        [](const FinitePermutation&) { return KroneckerLabel::FullSpace; },
                        [](const CircleRotation&) { return KroneckerLabel::FullSpace; },
                        [](const DoublingMap&) { return KroneckerLabel::ConstantsOnly; },
                        [](const auto&) { return KroneckerLabel::Empty; },
                    },
                    kind);
}

Part::Part(std::string name, PartKind kind, HopfTag hopf, std::optional<Eigen::VectorXd> density)
    : name_(std::move(name)), kind_(std::move(kind)), hopf_(hopf), density_(std::move(density)) {
  std::visit(Overloaded{
                 [&](const FinitePermutation& fp) {
                   for (std::size_t i = 0; i < fp.perm.size(); ++i) {
                     cells_.emplace_back(static_cast<std::int64_t>(i));
                     masses_.push_back(fp.masses[static_cast<Eigen::Index>(i)]);
                   }
                 },
                 [&](const CircleRotation& r) {
                   const double m = static_cast<double>(r.resolution);
                   for (std::size_t j = 0; j < r.resolution; ++j) {
                     cells_.emplace_back(RealCoordinate{static_cast<double>(j) / m, 0.0});
                     masses_.push_back(1.0 / m);
                   }
                 },
                 [&](const DoublingMap& d) {
                   const double m = static_cast<double>(d.resolution);
                   for (std::size_t j = 0; j < d.resolution; ++j) {
                     cells_.emplace_back(RealCoordinate{static_cast<double>(j) / m, 0.0});
                     masses_.push_back(1.0 / m);
                   }
                 },
                 [&](const IntegerShift& s) {
                   for (std::int64_t x = -s.window; x <= s.window; ++x) {
                     cells_.emplace_back(x);
                     masses_.push_back(1.0);
                   }
                 },
                 [&](const BooleMap& b) {
                   // Importance weight 1/(count * rho) for the conditioned
                   // Cauchy density rho(x) = 1 / (2 atan(R) (1 + x^2)).
                   std::mt19937_64 rng(b.seed);
                   const double spread = std::atan(b.range);
                   for (std::size_t i = 0; i < b.count; ++i) {
                     const double x = std::tan((2.0 * uniform01(rng) - 1.0) * spread);
                     cells_.emplace_back(RealCoordinate{x, 0.0});
                     masses_.push_back(2.0 * spread * (1.0 + x * x) / static_cast<double>(b.count));
                   }
                 },
             },
             kind_);
}

bool Part::is_discrete() const {
  return std::holds_alternative<FinitePermutation>(kind_) || std::holds_alternative<IntegerShift>(kind_);
}
bool Part::is_circle() const {
  return std::holds_alternative<CircleRotation>(kind_) || std::holds_alternative<DoublingMap>(kind_);
}
bool Part::is_line() const {
  return std::holds_alternative<IntegerShift>(kind_) || std::holds_alternative<BooleMap>(kind_);
}
bool Part::has_finite_measure() const { return !is_line(); }

double Part::total_mass() const {
  if (is_line()) return std::numeric_limits<double>::infinity();
  if (const auto* fp = std::get_if<FinitePermutation>(&kind_)) return fp->masses.sum();
  return 1.0;
}

bool Part::contains(const Coordinate& c) const {
  return std::visit(Overloaded{
                        [&](const FinitePermutation& fp) {
                          const auto* i = std::get_if<std::int64_t>(&c);
                          return i && *i >= 0 && static_cast<std::size_t>(*i) < fp.perm.size();
                        },
                        [&](const IntegerShift&) { return std::holds_alternative<std::int64_t>(c); },
                        [&](const BooleMap&) {
                          const auto* x = std::get_if<RealCoordinate>(&c);
                          return x && std::isfinite(x->hi);
                        },
                        [&](const auto&) {
                          const auto* x = std::get_if<RealCoordinate>(&c);
                          return x && x->hi >= 0.0 && x->hi < 1.0;
                        },
                    },
                    kind_);
}

Coordinate Part::apply(const Coordinate& c) const {
  return std::visit(Overloaded{
                        [&](const FinitePermutation& fp) -> Coordinate {
                          return static_cast<std::int64_t>(fp.perm[static_cast<std::size_t>(std::get<std::int64_t>(c))]);
                        },
                        [&](const IntegerShift&) -> Coordinate { return std::get<std::int64_t>(c) + 1; },
                        [&](const CircleRotation&) -> Coordinate { return apply_power(c, 1); },
                        [&](const DoublingMap&) -> Coordinate {
                          const auto& x = std::get<RealCoordinate>(c);
                          return normalize(2.0 * x.hi, 2.0 * x.lo);
                        },
                        [&](const BooleMap&) -> Coordinate {
                          const double x = std::get<RealCoordinate>(c).hi;
                          if (std::abs(x) <= 1e-300) throw OrbitEscape("Boole orbit reached the singular point 0");
                          return RealCoordinate{x - 1.0 / x, 0.0};
                        },
                    },
                    kind_);
}

Coordinate Part::apply_power(const Coordinate& start, std::int64_t k) const {
  if (const auto* r = std::get_if<CircleRotation>(&kind_)) {
    const auto& x = std::get<RealCoordinate>(start);
    const double kd = static_cast<double>(k);
    const double p = kd * r->alpha;
    const double p_err = std::fma(kd, r->alpha, -p);
    const double a = x.hi;
    const double b = p - std::floor(p);
    const double s = a + b;
    const double bb = s - a;
    const double s_err = (a - (s - bb)) + (b - bb);
    return normalize(s, x.lo + p_err + s_err);
  }
  Coordinate c = start;
  for (std::int64_t i = 0; i < k; ++i) c = apply(c);
  return c;
}

double Part::density_at(const Coordinate& c) const {
  if (!density_) return 1.0;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return (*density_)[static_cast<Eigen::Index>(*i)];
  return (*density_)[0];
}

bool DynamicalSystem::has_finite_measure() const {
  return std::all_of(parts_.begin(), parts_.end(), [](const Part& p) { return p.has_finite_measure(); });
}

std::vector<SampleCell> DynamicalSystem::cells() const {
  std::vector<SampleCell> out;
  std::size_t id = 0;
  for (std::size_t p = 0; p < parts_.size(); ++p)
    for (std::size_t c = 0; c < parts_[p].cell_count(); ++c) out.push_back({id++, p, c});
  return out;
}

std::size_t DynamicalSystem::cell_count() const {
  std::size_t n = 0;
  for (const auto& p : parts_) n += p.cell_count();
  return n;
}

SampleCell DynamicalSystem::cell_by_id(std::size_t id) const {
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts_.size(); ++p) {
    if (id < offset + parts_[p].cell_count()) return {id, p, id - offset};
    offset += parts_[p].cell_count();
  }
  throw UnknownCell("cell id " + std::to_string(id) + " is outside the system's discretization");
}

StatePoint DynamicalSystem::state_of(const SampleCell& cell) const {
  return {cell.part, parts_.at(cell.part).cell_coordinate(cell.cell)};
}

double DynamicalSystem::mass_of(const SampleCell& cell) const { return parts_.at(cell.part).cell_mass(cell.cell); }

std::string DynamicalSystem::describe() const {
  std::ostringstream out;
  if (disjoint_union_) out << "union[";
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (i) out << ";";
    const Part& part = parts_[i];
    std::visit(Overloaded{
                   [&](const FinitePermutation& fp) {
                     out << "permutation(N=" << fp.perm.size() << ",perm=";
                     for (std::size_t j = 0; j < fp.perm.size(); ++j) out << (j ? "," : "") << fp.perm[j];
                     out << ",masses=";
                     for (Eigen::Index j = 0; j < fp.masses.size(); ++j) out << (j ? "," : "") << g17(fp.masses[j]);
                     out << ")";
                   },
                   [&](const CircleRotation& r) { out << "rotation(alpha=" << g17(r.alpha) << ",M=" << r.resolution << ")"; },
                   [&](const DoublingMap& d) { out << "doubling(M=" << d.resolution << ")"; },
                   [&](const IntegerShift& s) { out << "integer_shift(W=" << s.window << ")"; },
                   [&](const BooleMap& b) {
                     out << "boole(count=" << b.count << ",range=" << g17(b.range) << ",seed=" << b.seed << ")";
                   },
               },
               part.kind());
    out << ":" << to_string(part.hopf());
  }
  if (disjoint_union_) out << "]";
  return out.str();
}

DynamicalSystem build_system(const SystemSpec& spec) {
  if (spec.parts.empty()) throw MalformedSpec("system has no parts");
  if (!spec.disjoint_union && spec.parts.size() != 1)
    throw MalformedSpec("only a disjoint union may have more than one part");
  std::vector<Part> parts;
  for (const PartSpec& ps : spec.parts) {
    check_kind(ps.kind);
    const HopfTag analytic = analytic_hopf_tag(ps.kind);
    if (ps.hopf && *ps.hopf != analytic)
      throw MalformedSpec(std::string("declared Hopf tag ") + to_string(*ps.hopf) + " contradicts the analytic class " +
                          to_string(analytic));
    std::optional<Eigen::VectorXd> density;
    if (ps.density) {
      const auto* fp = std::get_if<FinitePermutation>(&ps.kind);
      if (!fp) throw MalformedSpec("an invariant density is only supported on finite permutation parts");
      if (ps.density->size() != fp->perm.size()) throw MalformedSpec("density needs one value per state");
      Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(ps.density->data(), static_cast<Eigen::Index>(ps.density->size()));
      for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (!(p[i] > 0.0) || !std::isfinite(p[i])) throw MalformedSpec("density must be strictly positive");
        const double pi = p[static_cast<Eigen::Index>(fp->perm[static_cast<std::size_t>(i)])];
        if (std::abs(pi - p[i]) > 1e-12 * std::abs(p[i])) throw MalformedSpec("density is not T-invariant");
      }
      density = std::move(p);
    }
    parts.emplace_back(ps.name, ps.kind, analytic, std::move(density));
  }
  return DynamicalSystem(std::move(parts), spec.disjoint_union);
}

double measure_of(const DynamicalSystem& sys, const std::vector<std::size_t>& cell_ids) {
  std::vector<std::size_t> ids = cell_ids;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  PairwiseSum<double> total;
  for (std::size_t id : ids) total.add(sys.mass_of(sys.cell_by_id(id)));
  return total.total();
}

DynamicalSystem with_density_measure(const DynamicalSystem& sys) {
  std::vector<Part> parts;
  for (const Part& part : sys.parts()) {
    const auto* fp = std::get_if<FinitePermutation>(&part.kind());
    if (!fp || !part.density()) {
      parts.push_back(part);
      continue;
    }
    FinitePermutation weighted = *fp;
    weighted.masses = fp->masses.cwiseProduct(*part.density());
    parts.emplace_back(part.name(), weighted, part.hopf(), std::nullopt);
  }
  return DynamicalSystem(std::move(parts), sys.is_disjoint_union());
}

Orbit::Orbit(const DynamicalSystem& sys, StatePoint start)
    : part_(&sys.part(start.part)), start_(start), state_(std::move(start)) {
  if (!part_->contains(state_.coord)) throw UnknownCell("start point is outside the part's domain");
}

void Orbit::advance() {
  ++step_;
  if (std::holds_alternative<CircleRotation>(part_->kind()))
    state_.coord = part_->apply_power(start_.coord, step_);
  else
    state_.coord = part_->apply(state_.coord);
}

double boole_preimage_weight(double y) {
  const double root = std::sqrt(y * y + 4.0);
  // (y + root)/2 and (y - root)/2, the latter computed as -2/(y + root) to
  // avoid cancellation for large positive y.
  double x1, x2;
  if (y >= 0) {
    x1 = 0.5 * (y + root);
    x2 = -1.0 / x1;
  } else {
    x2 = 0.5 * (y - root);
    x1 = -1.0 / x2;
  }
  auto w = [](double x) { return x * x / (x * x + 1.0); };
  return w(x1) + w(x2);
}

}  // namespace wwlab
