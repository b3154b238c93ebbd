#include "wwlab/observable.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>

namespace wwlab {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string complex_text(Complex z) {
  if (z.imag() == 0.0) return g17(z.real());
  return "(" + g17(z.real()) + "," + g17(z.imag()) + ")";
}

// Largest enumeration window for counting-measure level sets.
constexpr double kMaxEnumeration = 5e7;

// On a line part (integer shift or Boole line) every untruncated catalog
// observable has the form
//     f(x) = c + s / (1 + x^2) + sum_j coef_j 1_[a_j, b_j)(x).
struct Piece {
  double a, b;
  Complex coef;
};
struct LineForm {
  Complex constant{0.0};
  Complex rational{0.0};
  std::vector<Piece> pieces;
};

void accumulate_line_form(const Observable& f, std::size_t part_index, const Part& part, Complex scale, LineForm& out) {
  std::visit(Overloaded{
                 [&](const ConstantObs& c) { out.constant += scale * c.value; },
                 [&](const RationalDecay&) { out.rational += scale; },
                 [&](const IntervalIndicator& iv) { out.pieces.push_back({iv.a, iv.b, scale}); },
                 [&](const DeltaState& d) {
                   if (!std::holds_alternative<IntegerShift>(part.kind()))
                     throw MalformedSpec("a point delta has measure zero on a continuous line");
                   const double i = static_cast<double>(d.index);
                   out.pieces.push_back({i, i + 1.0, scale});
                 },
                 [&](const LinearCombination& lc) {
                   for (const auto& [coef, term] : lc.terms) accumulate_line_form(term, part_index, part, scale * coef, out);
                 },
                 [&](const PerPart& pp) { accumulate_line_form(pp.parts.at(part_index), part_index, part, scale, out); },
                 [&](const CharacterObs&) { throw MalformedSpec("character observables need a circle or finite part"); },
                 [&](const Tabulated&) { throw MalformedSpec("tabulated observables need a finite part"); },
                 [&](const Truncation&) { throw MalformedSpec("truncations may only appear at the top level"); },
             },
             f.expr);
}

LineForm line_form(const Observable& f, std::size_t part_index, const Part& part) {
  LineForm out;
  accumulate_line_form(f, part_index, part, 1.0, out);
  return out;
}

// Strip a PerPart wrapper for the given part.
const Observable& resolve(const Observable& f, std::size_t part_index) {
  if (const auto* pp = std::get_if<PerPart>(&f.expr)) return resolve(pp->parts.at(part_index), part_index);
  return f;
}

// Sign of |c + s u|^2 - t^2 as u -> 0+.
int tail_sign(Complex c, Complex s, double t) {
  const double g0 = std::norm(c) - t * t;
  if (g0 != 0.0) return g0 > 0 ? 1 : -1;
  const double g1 = (std::conj(c) * s).real();
  if (g1 != 0.0) return g1 > 0 ? 1 : -1;
  return std::norm(s) > 0 ? 1 : 0;
}

// Decomposition of a top-level observable on a line part: a line form plus
// an optional truncation of it.
struct LineObservable {
  LineForm base;
  std::optional<Truncation> truncation;
};

LineObservable line_observable(const Observable& f, std::size_t part_index, const Part& part) {
  const Observable& r = resolve(f, part_index);
  if (const auto* t = std::get_if<Truncation>(&r.expr)) {
    return {line_form(resolve(*t->base, part_index), part_index, part), *t};
  }
  return {line_form(r, part_index, part), std::nullopt};
}

// Whether {|f| > level} reaches out to infinity.
bool tail_exceeds(const LineObservable& lo, double level) {
  const Complex c = lo.base.constant, s = lo.base.rational;
  if (!lo.truncation) return tail_sign(c, s, level) > 0;
  const double delta = lo.truncation->level;
  if (lo.truncation->keep_above) return tail_sign(c, s, std::max(level, delta)) > 0;
  return tail_sign(c, s, delta) <= 0 && tail_sign(c, s, level) > 0;
}

// lim |f(x)| as |x| -> infinity.
double tail_limit(const LineObservable& lo) {
  const Complex c = lo.base.constant, s = lo.base.rational;
  if (!lo.truncation) return std::abs(c);
  const bool above = tail_sign(c, s, lo.truncation->level) > 0;
  return above == lo.truncation->keep_above ? std::abs(c) : 0.0;
}

// Points where membership of {|f| > t} may change, for each threshold.
std::vector<double> breakpoints(const LineObservable& lo, const std::vector<double>& thresholds) {
  std::vector<double> ends;
  for (const Piece& p : lo.base.pieces) {
    ends.push_back(p.a);
    ends.push_back(p.b);
  }
  std::vector<double> out = ends;
  out.push_back(0.0);
  std::sort(ends.begin(), ends.end());
  ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
  // Segment representatives: one point inside every gap between endpoints.
  std::vector<double> reps;
  if (ends.empty()) {
    reps.push_back(0.0);
  } else {
    reps.push_back(ends.front() - 1.0);
    for (std::size_t i = 0; i + 1 < ends.size(); ++i) reps.push_back(0.5 * (ends[i] + ends[i + 1]));
    reps.push_back(ends.back() + 1.0);
  }
  const Complex s = lo.base.rational;
  for (double rep : reps) {
    Complex c = lo.base.constant;
    for (const Piece& p : lo.base.pieces)
      if (p.a <= rep && rep < p.b) c += p.coef;
    for (double t : thresholds) {
      // |s|^2 u^2 + 2 Re(conj(c) s) u + |c|^2 - t^2 = 0 for u in (0, 1].
      const double qa = std::norm(s), qb = 2.0 * (std::conj(c) * s).real(), qc = std::norm(c) - t * t;
      std::vector<double> roots;
      if (qa == 0.0) {
        if (qb != 0.0) roots.push_back(-qc / qb);
      } else {
        const double disc = qb * qb - 4.0 * qa * qc;
        if (disc >= 0.0) {
          const double sq = std::sqrt(disc);
          roots.push_back((-qb - sq) / (2.0 * qa));
          roots.push_back((-qb + sq) / (2.0 * qa));
        }
      }
      for (double u : roots) {
        if (u > 0.0 && u <= 1.0) {
          const double x = std::sqrt(std::max(0.0, 1.0 / u - 1.0));
          out.push_back(x);
          out.push_back(-x);
        }
      }
    }
  }
  return out;
}

double enumeration_radius(const std::vector<double>& points) {
  double r = 1.0;
  for (double p : points) r = std::max(r, std::abs(p) + 1.0);
  return r;
}

double finite_line_measure(const Part& part, std::size_t part_index, const Observable& f, const LineObservable& lo,
                           double level) {
  std::vector<double> thresholds{level};
  if (lo.truncation) thresholds.push_back(lo.truncation->level);
  std::vector<double> points = breakpoints(lo, thresholds);
  const double radius = std::ceil(enumeration_radius(points));
  auto exceeds = [&](const Coordinate& c) { return std::abs(evaluate(f, part, part_index, c)) > level; };
  if (std::holds_alternative<IntegerShift>(part.kind())) {
    if (radius > kMaxEnumeration) throw MalformedSpec("level " + g17(level) + " is too small to enumerate its level set");
    const auto r = static_cast<std::int64_t>(radius);
    double count = 0.0;
    for (std::int64_t x = -r; x <= r; ++x)
      if (exceeds(Coordinate{x})) count += 1.0;
    return count;
  }
  points.push_back(-radius);
  points.push_back(radius);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  PairwiseSum<double> length;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double l = points[i], r = points[i + 1];
    if (l < -radius || r > radius) continue;
    if (exceeds(Coordinate{RealCoordinate{0.5 * (l + r), 0.0}})) length.add(r - l);
  }
  return length.total();
}

void validate_on(const Observable& f, const Part& part, std::size_t part_index, std::size_t n_parts) {
  std::visit(Overloaded{
                 [&](const CharacterObs&) {
                   if (part.is_line()) throw MalformedSpec("character observables need a circle or finite part");
                 },
                 [&](const DeltaState& d) {
                   if (!part.is_discrete()) throw MalformedSpec("point deltas need a discrete part");
                   if (const auto* fp = std::get_if<FinitePermutation>(&part.kind())) {
                     if (d.index < 0 || static_cast<std::size_t>(d.index) >= fp->perm.size())
                       throw MalformedSpec("delta index outside the finite state space");
                   }
                 },
                 [&](const IntervalIndicator& iv) {
                   if (!(iv.a < iv.b) || !std::isfinite(iv.a) || !std::isfinite(iv.b))
                     throw MalformedSpec("interval indicator needs finite a < b");
                 },
                 [&](const RationalDecay&) {},
                 [&](const Tabulated& t) {
                   const auto* fp = std::get_if<FinitePermutation>(&part.kind());
                   if (!fp) throw MalformedSpec("tabulated observables need a finite part");
                   if (static_cast<std::size_t>(t.values.size()) != fp->perm.size())
                     throw MalformedSpec("tabulated observable has " + std::to_string(t.values.size()) +
                                         " values for " + std::to_string(fp->perm.size()) + " states");
                 },
                 [&](const ConstantObs&) {},
                 [&](const LinearCombination& lc) {
                   for (const auto& term : lc.terms) validate_on(term.second, part, part_index, n_parts);
                 },
                 [&](const Truncation& t) {
                   if (!t.base) throw MalformedSpec("truncation without a base observable");
                   if (!(t.level >= 0.0) || !std::isfinite(t.level)) throw MalformedSpec("truncation level must be >= 0");
                   validate_on(*t.base, part, part_index, n_parts);
                 },
                 [&](const PerPart& pp) {
                   if (pp.parts.size() != n_parts)
                     throw MalformedSpec("per-part observable has " + std::to_string(pp.parts.size()) +
                                         " branches for " + std::to_string(n_parts) + " parts");
                   validate_on(pp.parts[part_index], part, part_index, n_parts);
                 },
             },
             f.expr);
}

Complex grid_integral(const Part& part, std::size_t part_index, const Observable& f, int iterate) {
  PairwiseSum<Complex> sum;
  for (std::size_t cell = 0; cell < part.cell_count(); ++cell) {
    const Coordinate c = part.apply_power(part.cell_coordinate(cell), iterate);
    sum.add(part.cell_mass(cell) * evaluate(f, part, part_index, c));
  }
  return sum.total();
}

double integrate_segments(const std::vector<double>& cuts, const std::function<double(double)>& fn) {
  using boost::math::quadrature::gauss_kronrod;
  PairwiseSum<double> total;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    total.add(gauss_kronrod<double, 31>::integrate(fn, cuts[i], cuts[i + 1], 20, 1e-13));
  }
  return total.total();
}

}  // namespace

Observable operator+(const Observable& a, const Observable& b) {
  return Observable::combination({{1.0, a}, {1.0, b}});
}

Observable operator*(Complex c, const Observable& f) { return Observable::combination({{c, f}}); }

std::string describe(const Observable& f) {
  return std::visit(Overloaded{
                        [](const CharacterObs& c) { return "character(" + std::to_string(c.frequency) + ")"; },
                        [](const DeltaState& d) { return "delta(" + std::to_string(d.index) + ")"; },
                        [](const IntervalIndicator& iv) { return "interval(" + g17(iv.a) + "," + g17(iv.b) + ")"; },
                        [](const RationalDecay&) { return std::string("rational_decay"); },
                        [](const Tabulated& t) {
                          std::string out = "tabulated(";
                          for (Eigen::Index i = 0; i < t.values.size(); ++i)
                            out += (i ? "," : "") + complex_text(t.values[i]);
                          return out + ")";
                        },
                        [](const ConstantObs& c) { return "constant(" + complex_text(c.value) + ")"; },
                        [](const LinearCombination& lc) {
                          std::string out = "combination(";
                          for (std::size_t i = 0; i < lc.terms.size(); ++i)
                            out += (i ? "," : "") + complex_text(lc.terms[i].first) + "*" + describe(lc.terms[i].second);
                          return out + ")";
                        },
                        [](const Truncation& t) {
                          return std::string(t.keep_above ? "above(" : "below(") + describe(*t.base) + "," +
                                 g17(t.level) + ")";
                        },
                        [](const PerPart& pp) {
                          std::string out = "per_part(";
                          for (std::size_t i = 0; i < pp.parts.size(); ++i) out += (i ? ";" : "") + describe(pp.parts[i]);
                          return out + ")";
                        },
                    },
                    f.expr);
}

Complex evaluate(const Observable& f, const Part& part, std::size_t part_index, const Coordinate& c) {
  return std::visit(
      Overloaded{
          [&](const CharacterObs& ch) -> Complex {
            if (const auto* i = std::get_if<std::int64_t>(&c)) {
              if (const auto* fp = std::get_if<FinitePermutation>(&part.kind())) {
                const auto n = static_cast<std::int64_t>(fp->perm.size());
                const std::int64_t k = ((ch.frequency % n) + n) % n;
                return unit_phase(static_cast<double>((k * *i) % n) / static_cast<double>(n));
              }
              return unit_phase(phase_of_multiple(ch.frequency, static_cast<double>(*i)));
            }
            const auto& x = std::get<RealCoordinate>(c);
            return unit_phase(phase_of_multiple(ch.frequency, x.hi) + static_cast<double>(ch.frequency) * x.lo);
          },
          [&](const DeltaState& d) -> Complex {
            const auto* i = std::get_if<std::int64_t>(&c);
            return (i && *i == d.index) ? 1.0 : 0.0;
          },
          [&](const IntervalIndicator& iv) -> Complex {
            const double v = coordinate_value(c);
            return (iv.a <= v && v < iv.b) ? 1.0 : 0.0;
          },
          [&](const RationalDecay&) -> Complex {
            const double v = coordinate_value(c);
            return 1.0 / (1.0 + v * v);
          },
          [&](const Tabulated& t) -> Complex { return t.values[static_cast<Eigen::Index>(std::get<std::int64_t>(c))]; },
          [&](const ConstantObs& k) -> Complex { return k.value; },
          [&](const LinearCombination& lc) -> Complex {
            Complex sum = 0.0;
            for (const auto& [coef, term] : lc.terms) sum += coef * evaluate(term, part, part_index, c);
            return sum;
          },
          [&](const Truncation& t) -> Complex {
            const Complex v = evaluate(*t.base, part, part_index, c);
            const bool above = std::abs(v) > t.level;
            return above == t.keep_above ? v : Complex(0.0);
          },
          [&](const PerPart& pp) -> Complex { return evaluate(pp.parts[part_index], part, part_index, c); },
      },
      f.expr);
}

void validate(const DynamicalSystem& sys, const Observable& f) {
  for (std::size_t p = 0; p < sys.parts().size(); ++p) validate_on(f, sys.part(p), p, sys.parts().size());
}

bool is_integrable(const Part& part, std::size_t part_index, const Observable& f) {
  if (part.has_finite_measure()) return true;
  // Catalog observables are bounded and decay at least like 1/(1+x^2) apart
  // from their tail constant, so integrability is decided by the tail.
  return tail_limit(line_observable(f, part_index, part)) == 0.0;
}

void require_integrable(const DynamicalSystem& sys, const Observable& f) {
  validate(sys, f);
  for (std::size_t p = 0; p < sys.parts().size(); ++p) {
    if (!is_integrable(sys.part(p), p, f))
      throw NonIntegrableObservable(describe(f) + " has infinite L1 norm on part " + std::to_string(p));
  }
}

std::optional<double> level_set_measure(const DynamicalSystem& sys, const Observable& f, double level) {
  if (!(level > 0.0)) throw MalformedSpec("levels must be strictly positive");
  validate(sys, f);
  PairwiseSum<double> total;
  for (std::size_t p = 0; p < sys.parts().size(); ++p) {
    const Part& part = sys.part(p);
    if (part.has_finite_measure()) {
      for (std::size_t cell = 0; cell < part.cell_count(); ++cell)
        if (std::abs(evaluate(f, part, p, part.cell_coordinate(cell))) > level) total.add(part.cell_mass(cell));
      continue;
    }
    const LineObservable lo = line_observable(f, p, part);
    if (tail_exceeds(lo, level)) return std::nullopt;
    total.add(finite_line_measure(part, p, f, lo, level));
  }
  return total.total();
}

std::vector<LevelMeasure> rmu_membership(const DynamicalSystem& sys, const Observable& f,
                                         const std::vector<double>& levels) {
  std::vector<LevelMeasure> out;
  out.reserve(levels.size());
  for (double level : levels) out.push_back({level, level_set_measure(sys, f, level)});
  return out;
}

bool in_rmu(const DynamicalSystem& sys, const Observable& f) {
  validate(sys, f);
  for (std::size_t p = 0; p < sys.parts().size(); ++p) {
    const Part& part = sys.part(p);
    if (part.has_finite_measure()) continue;
    if (tail_limit(line_observable(f, p, part)) != 0.0) return false;
  }
  return true;
}

RmuSplit rmu_split(const DynamicalSystem& sys, const Observable& f, double delta) {
  if (!(delta > 0.0)) throw MalformedSpec("split level must be positive");
  if (!in_rmu(sys, f)) throw NotInRmu(describe(f) + " has a level set of infinite measure");
  auto base = std::make_shared<const Observable>(f);
  RmuSplit split{Observable{Truncation{base, delta, true}}, Observable{Truncation{base, delta, false}}, 0.0};

  double sup = 0.0;
  for (std::size_t p = 0; p < sys.parts().size(); ++p) {
    const Part& part = sys.part(p);
    if (part.has_finite_measure()) {
      for (std::size_t cell = 0; cell < part.cell_count(); ++cell)
        sup = std::max(sup, std::abs(evaluate(split.h, part, p, part.cell_coordinate(cell))));
    } else if (std::holds_alternative<IntegerShift>(part.kind())) {
      const LineObservable lo = line_observable(f, p, part);
      const auto r = static_cast<std::int64_t>(std::ceil(enumeration_radius(breakpoints(lo, {delta}))));
      if (static_cast<double>(r) > kMaxEnumeration) throw MalformedSpec("split level too small to enumerate");
      for (std::int64_t x = -r - 1; x <= r + 1; ++x)
        sup = std::max(sup, std::abs(evaluate(split.h, part, p, Coordinate{x})));
      // Beyond the radius |h| is a convex function of 1/(1+x^2), maximal at
      // the window edge or in the limit.
      sup = std::max(sup, std::min(delta, std::abs(lo.base.constant)));
    } else {
      sup = std::max(sup, delta);
    }
  }
  split.h_sup = sup;
  return split;
}

std::vector<Complex> orbit_stream(const DynamicalSystem& sys, const StatePoint& start, const Observable& f,
                                  std::int64_t n_max) {
  if (n_max < 1) throw MalformedSpec("orbit length must be >= 1");
  validate(sys, f);
  std::vector<Complex> out;
  out.reserve(static_cast<std::size_t>(n_max));
  for_each_orbit_value(sys, start, f, n_max, [&](std::int64_t, Complex v) { out.push_back(v); });
  return out;
}

InvarianceReport invariance_check(const DynamicalSystem& sys, const Observable& f, int n_trials, double boole_window) {
  if (n_trials < 1) throw MalformedSpec("invariance check needs at least one trial");
  require_integrable(sys, f);
  InvarianceReport report;
  for (std::size_t p = 0; p < sys.parts().size(); ++p) {
    const Part& part = sys.part(p);
    if (part.has_finite_measure()) {
      const Complex base = grid_integral(part, p, f, 0);
      for (int j = 1; j <= n_trials; ++j)
        report.max_discrepancy = std::max(report.max_discrepancy, std::abs(grid_integral(part, p, f, j) - base));
      continue;
    }
    const LineObservable lo = line_observable(f, p, part);
    if (lo.truncation) throw MalformedSpec("invariance check on a line part needs an untruncated observable");
    const double s = std::abs(lo.base.rational);
    if (const auto* shift = std::get_if<IntegerShift>(&part.kind())) {
      std::int64_t radius = std::max<std::int64_t>(shift->window, 100000) + n_trials;
      for (const Piece& piece : lo.base.pieces)
        radius = std::max(radius, static_cast<std::int64_t>(std::ceil(std::max(std::abs(piece.a), std::abs(piece.b)))) +
                                      2 * n_trials);
      auto window_sum = [&](int shift_by) {
        PairwiseSum<Complex> sum;
        for (std::int64_t x = -radius; x <= radius; ++x) sum.add(evaluate(f, part, p, Coordinate{x + shift_by}));
        return sum.total();
      };
      const Complex base = window_sum(0);
      for (int j = 1; j <= n_trials; ++j)
        report.max_discrepancy = std::max(report.max_discrepancy, std::abs(window_sum(j) - base));
      // sum_{|x| > R - j} 1/(1+x^2) <= 2/(R - j - 1) for each of the two sums.
      report.tail_bound = std::max(report.tail_bound, 4.0 * s / static_cast<double>(radius - n_trials - 1));
      continue;
    }
    // Boole line: first iterate, adaptive Gauss-Kronrod on [-R, R] split at
    // the discontinuities of f and f o T.
    const double R = boole_window;
    std::vector<double> cuts{-R, -1.0, 0.0, 1.0, R};
    for (const Piece& piece : lo.base.pieces) {
      for (double y : {piece.a, piece.b}) {
        if (std::abs(y) > R - 1.0) throw MalformedSpec("interval endpoints must lie inside the integration window");
        const double root = std::sqrt(y * y + 4.0);
        cuts.insert(cuts.end(), {y, 0.5 * (y + root), 0.5 * (y - root)});
      }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    auto at = [&](double x) { return evaluate(f, part, p, Coordinate{RealCoordinate{x, 0.0}}); };
    auto at_image = [&](double x) { return x == 0.0 ? Complex(lo.base.constant) : at(x - 1.0 / x); };
    const Complex direct{integrate_segments(cuts, [&](double x) { return at(x).real(); }),
                         integrate_segments(cuts, [&](double x) { return at(x).imag(); })};
    const Complex pulled{integrate_segments(cuts, [&](double x) { return at_image(x).real(); }),
                         integrate_segments(cuts, [&](double x) { return at_image(x).imag(); })};
    report.max_discrepancy = std::max(report.max_discrepancy, std::abs(pulled - direct));
    const double half_pi = 0.5 * std::numbers::pi;
    report.tail_bound =
        std::max(report.tail_bound, 2.0 * s * (half_pi - std::atan(R)) + 2.0 * s * (half_pi - std::atan(R - 0.5)) + 1e-9);
  }
  report.ok = report.max_discrepancy <= report.tail_bound + 1e-12;
  return report;
}

}  // namespace wwlab
