#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "wwlab/averages.hpp"

using namespace wwlab;

namespace {

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

DynamicalSystem rotation(double alpha, std::size_t m = 1024) {
  return build_system(SystemSpec::single(CircleRotation{alpha, m}));
}

// Direct long-double sum of e^{2 pi i (k_f (w + k alpha) + k theta)} for k < n.
std::complex<long double> direct_character_mean(long double alpha, long double theta, long double omega,
                                                std::int64_t k_f, std::int64_t n) {
  std::complex<long double> sum = 0;
  const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
  for (std::int64_t k = 0; k < n; ++k) {
    long double phase = static_cast<long double>(k_f) * (omega + static_cast<long double>(k) * alpha) +
                        static_cast<long double>(k) * theta;
    phase -= std::floor(phase);
    sum += std::polar(1.0L, two_pi * phase);
  }
  return sum / static_cast<long double>(n);
}

}  // namespace

TEST_CASE("checkpoint schedules") {
  CHECK(CheckpointSchedule::dyadic(1 << 10).size() == 10);
  CHECK(CheckpointSchedule::dyadic(1 << 10).points().front() == 2);
  CHECK(CheckpointSchedule::dyadic(1000).n_max() == 512);
  CHECK(CheckpointSchedule::arithmetic(5000, 100000).size() == 20);
  CHECK(CheckpointSchedule::explicit_list({3, 9}).index_of(9) == 1);
  CHECK(CheckpointSchedule::explicit_list({3, 9}).index_of(4) == -1);
  CHECK_THROWS_AS(CheckpointSchedule::explicit_list({3, 3}), MalformedSpec);
  CHECK_THROWS_AS(CheckpointSchedule::explicit_list({}), MalformedSpec);
  CHECK_THROWS_AS(CheckpointSchedule::dyadic(-4), MalformedSpec);
}

TEST_CASE("pairwise summation matches a long-double reference") {
  std::mt19937_64 rng(8);
  PairwiseSum<Complex> sum;
  std::complex<long double> reference = 0;
  for (int k = 0; k < 1000000; ++k) {
    const Complex z = unit_phase(uniform01(rng));
    sum.add(z);
    reference += std::complex<long double>(z.real(), z.imag());
  }
  CHECK(std::abs(std::complex<long double>(sum.total().real(), sum.total().imag()) - reference) < 1e-10L);
  CHECK(sum.count() == 1000000);
}

TEST_CASE("prefix_averages examples") {
  const auto rot = rotation(0.25, 8);
  const auto m4 = prefix_averages(rot, {0, RealCoordinate{0.0, 0.0}}, Observable::character(1),
                                  WeightSequence::constant(), CheckpointSchedule::explicit_list({4}));
  CHECK(std::abs(m4[0].value) < 1e-15);

  const auto c4 = build_system(SystemSpec::single(FinitePermutation::cyclic(4)));
  const auto m8 = prefix_averages(c4, {0, std::int64_t{0}}, Observable::delta(0), WeightSequence::constant(),
                                  CheckpointSchedule::explicit_list({8}));
  CHECK(m8[0].value == Complex(0.25, 0.0));
}

TEST_CASE("character_closed_form examples") {
  CHECK(std::abs(character_closed_form(0.25, 0.0, 0.0, 1, 4)) < 1e-15);
  const double resonant = 1.0 - kGolden;
  for (std::int64_t n : {1, 7, 1000, 123456})
    CHECK(std::abs(character_closed_form(kGolden, resonant, 0.3, 1, n) - std::polar(1.0, 2 * std::numbers::pi * 0.3)) <
          1e-15);
  const auto oracle = direct_character_mean(kGolden, 0.3L, 0.1L, 2, 1000);
  const Complex closed = character_closed_form(kGolden, 0.3, 0.1, 2, 1000);
  CHECK(std::abs(std::complex<long double>(closed.real(), closed.imag()) - oracle) <= 1e-12L);
}

TEST_CASE("engine matches the closed form along the schedule") {
  const auto rot = rotation(kGolden);
  std::vector<WeightSequence> weights = character_grid(8);
  weights.push_back(WeightSequence::character(phase_of_multiple(-1, kGolden)));
  const auto schedule = CheckpointSchedule::dyadic(1 << 15);
  std::vector<SampleCell> points;
  for (std::size_t id : {0, 100, 511, 1023}) points.push_back(rot.cell_by_id(id));
  const AverageTable table = average_table(rot, points, Observable::character(1), weights, schedule);
  for (std::size_t p = 0; p < points.size(); ++p) {
    const double omega = coordinate_value(rot.state_of(points[p]).coord);
    for (std::size_t w = 0; w < weights.size(); ++w) {
      const double theta = std::get<CharacterWeight>(weights[w].kind).theta;
      for (std::size_t c = 0; c < schedule.size(); ++c)
        CHECK(std::abs(table.at(p, w, c) - character_closed_form(kGolden, theta, omega, 1, schedule.points()[c])) <=
              1e-10);
    }
  }
}

TEST_CASE("average_table shape and cyclic convergence") {
  const auto c4 = build_system(SystemSpec::single(FinitePermutation::cyclic(4)));
  std::vector<SampleCell> points;
  for (int i = 0; i < 10; ++i) points.push_back(c4.cells()[static_cast<std::size_t>(i % 4)]);
  const AverageTable table =
      average_table(c4, points, Observable::delta(0), character_grid(4), CheckpointSchedule::dyadic(1 << 10));
  CHECK(table.point_count() == 10);
  CHECK(table.weight_count() == 4);
  CHECK(table.checkpoint_count() == 10);
  for (std::size_t p = 0; p < 10; ++p) CHECK(std::abs(table.at(p, 0, 9) - 0.25) < 1e-15);

  const AverageTable empty = average_table(c4, points, Observable::delta(0), {}, CheckpointSchedule::dyadic(8));
  CHECK(empty.weight_count() == 0);
}

TEST_CASE("thread count does not change results") {
  const auto rot = rotation(kGolden, 64);
  const auto schedule = CheckpointSchedule::dyadic(1 << 12);
  const auto one = average_table(rot, rot.cells(), Observable::character(2), character_grid(5), schedule, 1);
  const auto four = average_table(rot, rot.cells(), Observable::character(2), character_grid(5), schedule, 4);
  for (std::size_t p = 0; p < one.point_count(); ++p)
    for (std::size_t w = 0; w < one.weight_count(); ++w)
      for (std::size_t c = 0; c < one.checkpoint_count(); ++c) CHECK(one.at(p, w, c) == four.at(p, w, c));
}

TEST_CASE("dominated bound and linearity") {
  std::mt19937_64 rng(12);
  const auto perm = build_system(SystemSpec::single(FinitePermutation::cyclic(13)));
  Eigen::VectorXcd a(13), b(13);
  for (Eigen::Index i = 0; i < 13; ++i) {
    a[i] = {uniform(rng, -1, 1), uniform(rng, -1, 1)};
    b[i] = {uniform(rng, -1, 1), uniform(rng, -1, 1)};
  }
  const Observable fa = Observable::tabulated(a), fb = Observable::tabulated(b);
  const auto weights = std::vector<WeightSequence>{
      WeightSequence::character(0.37), WeightSequence::trig_poly({{2.0, 0.1}, {Complex(0, 1), 0.55}}),
      WeightSequence::besicovitch(TrigPoly{{{1.0, 0.2}}}, SparseBounded{2.0})};
  const auto schedule = CheckpointSchedule::arithmetic(7, 700);
  for (const SampleCell& cell : perm.cells()) {
    const StatePoint start = perm.state_of(cell);
    const auto modulus = modulus_averages(perm, start, fa, schedule);
    for (const auto& w : weights) {
      const auto ma = prefix_averages(perm, start, fa, w, schedule);
      const auto mb = prefix_averages(perm, start, fb, w, schedule);
      const auto mab = prefix_averages(perm, start, fa + fb, w, schedule);
      for (std::size_t c = 0; c < schedule.size(); ++c) {
        CHECK(std::abs(ma[c].value) <= weight_bound(w) * modulus[c] + 1e-12);
        CHECK(std::abs(mab[c].value - ma[c].value - mb[c].value) <= 1e-12);
      }
    }
  }
}

TEST_CASE("Besicovitch deviation bound") {
  const auto rot = rotation(kGolden, 256);
  const TrigPoly poly{{{0.5, 0.3819660112501051}, {0.25, 0.125}}};
  const auto schedule = CheckpointSchedule::arithmetic(1000, 20000);
  const std::vector<WeightSequence> weights{WeightSequence::trig_poly(poly.terms),
                                            WeightSequence::besicovitch(poly, PowerDecay{1.0, 1.0})};
  const auto table = average_table(rot, rot.cells(), Observable::character(1), weights, schedule);
  const Besicovitch& b = std::get<Besicovitch>(weights[1].kind);
  for (std::size_t c = 0; c < schedule.size(); ++c) {
    double worst = 0.0;
    for (std::size_t p = 0; p < table.point_count(); ++p)
      worst = std::max(worst, std::abs(table.at(p, 1, c) - table.at(p, 0, c)));
    CHECK(worst <= besicovitch_defect(b, schedule.points()[c]) + 1e-12);
  }
}

TEST_CASE("CSV layout") {
  const auto c4 = build_system(SystemSpec::single(FinitePermutation::cyclic(4)));
  const auto table = average_table(c4, {c4.cells()[0]}, Observable::delta(0), {WeightSequence::constant()},
                                   CheckpointSchedule::explicit_list({1, 3}));
  std::ostringstream out;
  write_csv(table, out);
  CHECK(out.str() ==
        "weight_id,theta_or_kind,point_id,n,re,im\n"
        "0,constant,0,1,1,0\n"
        "0,constant,0,3,0.33333333333333331,0\n");
}
