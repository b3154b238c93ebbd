#include "wwlab/weights.hpp"

#include <cmath>
#include <cstdio>

#include "wwlab/errors.hpp"

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

void check_theta(double theta) {
  if (!(theta >= 0.0 && theta < 1.0)) throw MalformedSpec("theta must lie in [0, 1), got " + g17(theta));
}

bool is_square(std::int64_t k) {
  if (k < 0) return false;
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(k)));
  while (r * r > k) --r;
  while ((r + 1) * (r + 1) <= k) ++r;
  return r * r == k;
}

std::string describe_poly(const TrigPoly& p) {
  std::string out;
  for (std::size_t i = 0; i < p.terms.size(); ++i) {
    const auto& [z, theta] = p.terms[i];
    out += (i ? ";" : "") + g17(z.real()) + "," + g17(z.imag()) + "@" + g17(theta);
  }
  return out;
}

}  // namespace

WeightSequence WeightSequence::character(double theta) {
  check_theta(theta);
  return {CharacterWeight{theta}};
}

WeightSequence WeightSequence::trig_poly(std::vector<std::pair<Complex, double>> terms) {
  for (const auto& t : terms) check_theta(t.second);
  return {TrigPoly{std::move(terms)}};
}

WeightSequence WeightSequence::besicovitch(TrigPoly base, std::variant<PowerDecay, SparseBounded> perturbation) {
  for (const auto& t : base.terms) check_theta(t.second);
  if (const auto* pd = std::get_if<PowerDecay>(&perturbation)) {
    if (!(pd->s > 0.0)) throw MalformedSpec("power decay exponent must be positive");
  }
  return {Besicovitch{std::move(base), perturbation}};
}

Complex weight_at(const TrigPoly& p, std::int64_t k) {
  Complex sum = 0.0;
  for (const auto& [z, theta] : p.terms) sum += z * unit_phase(phase_of_multiple(k, theta));
  return sum;
}

double perturbation_at(const Besicovitch& w, std::int64_t k) {
  return std::visit(Overloaded{
                        [&](const PowerDecay& pd) { return pd.c / std::pow(static_cast<double>(k + 1), pd.s); },
                        [&](const SparseBounded& sb) { return is_square(k) ? sb.bound : 0.0; },
                    },
                    w.perturbation);
}

Complex weight_at(const WeightSequence& w, std::int64_t k) {
  return std::visit(Overloaded{
                        [](const ConstantWeight&) { return Complex(1.0); },
                        [&](const CharacterWeight& c) { return unit_phase(phase_of_multiple(k, c.theta)); },
                        [&](const TrigPoly& p) { return weight_at(p, k); },
                        [&](const Besicovitch& b) { return weight_at(b.base, k) + perturbation_at(b, k); },
                    },
                    w.kind);
}

double weight_bound(const WeightSequence& w) {
  auto poly_bound = [](const TrigPoly& p) {
    double sum = 0.0;
    for (const auto& t : p.terms) sum += std::abs(t.first);
    return sum;
  };
  return std::visit(Overloaded{
                        [](const ConstantWeight&) { return 1.0; },
                        [](const CharacterWeight&) { return 1.0; },
                        [&](const TrigPoly& p) { return poly_bound(p); },
                        [&](const Besicovitch& b) {
                          const double extra = std::visit(Overloaded{
                                                               [](const PowerDecay& pd) { return std::abs(pd.c); },
                                                               [](const SparseBounded& sb) { return std::abs(sb.bound); },
                                                           },
                                                           b.perturbation);
                          return poly_bound(b.base) + extra;
                        },
                    },
                    w.kind);
}

double besicovitch_defect(const Besicovitch& w, std::int64_t n) {
  if (n < 1) throw MalformedSpec("defect needs n >= 1");
  PairwiseSum<double> sum;
  for (std::int64_t k = 0; k < n; ++k) sum.add(std::abs(perturbation_at(w, k)));
  return sum.total() / static_cast<double>(n);
}

std::vector<WeightSequence> character_grid(std::int64_t L) {
  if (L < 1) throw MalformedSpec("character grid needs L >= 1");
  std::vector<WeightSequence> out;
  out.reserve(static_cast<std::size_t>(L));
  for (std::int64_t j = 0; j < L; ++j)
    out.push_back(WeightSequence::character(static_cast<double>(j) / static_cast<double>(L)));
  return out;
}

std::string weight_label(const WeightSequence& w) {
  return std::visit(Overloaded{
                        [](const ConstantWeight&) { return std::string("constant"); },
                        [](const CharacterWeight& c) { return g17(c.theta); },
                        [](const TrigPoly&) { return std::string("trigpoly"); },
                        [](const Besicovitch&) { return std::string("besicovitch"); },
                    },
                    w.kind);
}

std::string describe(const WeightSequence& w) {
  return std::visit(Overloaded{
                        [](const ConstantWeight&) { return std::string("constant"); },
                        [](const CharacterWeight& c) { return "character(" + g17(c.theta) + ")"; },
                        [](const TrigPoly& p) { return "trigpoly(" + describe_poly(p) + ")"; },
                        [](const Besicovitch& b) {
                          const std::string pert = std::visit(
                              Overloaded{
                                  [](const PowerDecay& pd) { return "power_decay(" + g17(pd.c) + "," + g17(pd.s) + ")"; },
                                  [](const SparseBounded& sb) { return "sparse(" + g17(sb.bound) + ")"; },
                              },
                              b.perturbation);
                          return "besicovitch(" + describe_poly(b.base) + "|" + pert + ")";
                        },
                    },
                    w.kind);
}

}  // namespace wwlab
