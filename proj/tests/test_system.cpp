#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "wwlab/observable.hpp"
#include "wwlab/system.hpp"

using namespace wwlab;

namespace {

DynamicalSystem cyclic(std::size_t n) { return build_system(SystemSpec::single(FinitePermutation::cyclic(n))); }

StatePoint real_point(double x) { return {0, RealCoordinate{x, 0.0}}; }

// Random permutation with masses constant on its cycles.
FinitePermutation random_permutation(std::mt19937_64& rng, std::size_t n) {
  FinitePermutation p;
  p.perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) p.perm[i] = i;
  std::shuffle(p.perm.begin(), p.perm.end(), rng);
  p.masses = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (p.masses[static_cast<Eigen::Index>(i)] != 0.0) continue;
    const double m = u(rng);
    for (std::size_t j = i; p.masses[static_cast<Eigen::Index>(j)] == 0.0; j = p.perm[j])
      p.masses[static_cast<Eigen::Index>(j)] = m;
  }
  return p;
}

// Root of x - 1/x = y on one branch by bisection.
double boole_root(double y, bool positive) {
  double lo = positive ? 1e-12 : -1e6, hi = positive ? 1e6 : -1e-12;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    ((mid - 1.0 / mid) < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("build_system validates the catalog") {
  const DynamicalSystem c4 = cyclic(4);
  CHECK(c4.part(0).hopf() == HopfTag::FinitePart);
  CHECK(c4.cell_count() == 4);
  CHECK(c4.has_finite_measure());

  const DynamicalSystem shift = build_system(SystemSpec::single(IntegerShift{10}));
  CHECK(shift.part(0).hopf() == HopfTag::Dissipative);
  CHECK(shift.cell_count() == 21);
  CHECK_FALSE(shift.has_finite_measure());

  CHECK(build_system(SystemSpec::single(BooleMap{8, 100.0, 1})).part(0).hopf() == HopfTag::NullConservative);
  CHECK(build_system(SystemSpec::single(CircleRotation{0.3, 8})).part(0).kronecker() == KroneckerLabel::FullSpace);
  CHECK(build_system(SystemSpec::single(DoublingMap{8})).part(0).kronecker() == KroneckerLabel::ConstantsOnly);

  FinitePermutation bad = FinitePermutation::cyclic(4);
  bad.perm = {0, 0, 2, 3};
  CHECK_THROWS_AS(build_system(SystemSpec::single(bad)), MalformedSpec);

  FinitePermutation nonpositive = FinitePermutation::cyclic(3);
  nonpositive.masses[1] = 0.0;
  CHECK_THROWS_AS(build_system(SystemSpec::single(nonpositive)), MalformedSpec);

  FinitePermutation uneven = FinitePermutation::cyclic(3);
  uneven.masses[1] = 0.5;
  CHECK_THROWS_AS(build_system(SystemSpec::single(uneven)), MalformedSpec);

  CHECK_THROWS_AS(build_system(SystemSpec{}), MalformedSpec);
  CHECK_THROWS_AS(build_system(SystemSpec::single(CircleRotation{1.0, 8})), MalformedSpec);
  CHECK_THROWS_AS(build_system(SystemSpec::single(CircleRotation{0.3, 12})), MalformedSpec);
  CHECK_THROWS_AS(build_system(SystemSpec::single(IntegerShift{0})), MalformedSpec);
  CHECK_THROWS_AS(build_system(SystemSpec::single(BooleMap{0, 10.0, 1})), MalformedSpec);
}

TEST_CASE("declared Hopf tags must match the analytic classification") {
  SystemSpec spec{{PartSpec{"a", IntegerShift{3}, HopfTag::FinitePart, {}}}, false};
  CHECK_THROWS_AS(build_system(spec), MalformedSpec);
  spec.parts[0].hopf = HopfTag::Dissipative;
  CHECK_NOTHROW(build_system(spec));
  CHECK(parse_hopf_tag("NullConservative") == HopfTag::NullConservative);
  CHECK_THROWS_AS(parse_hopf_tag("Recurrent"), MalformedSpec);
}

TEST_CASE("invariant densities") {
  FinitePermutation p = FinitePermutation::cyclic(2);
  SystemSpec good{{PartSpec{"", p, {}, std::vector<double>{2.0, 2.0}}}, false};
  const DynamicalSystem sys = build_system(good);
  const DynamicalSystem weighted = with_density_measure(sys);
  CHECK(measure_of(weighted, {0, 1}) == doctest::Approx(2.0));

  SystemSpec moving{{PartSpec{"", p, {}, std::vector<double>{1.0, 2.0}}}, false};
  CHECK_THROWS_AS(build_system(moving), MalformedSpec);
  SystemSpec negative{{PartSpec{"", p, {}, std::vector<double>{-1.0, -1.0}}}, false};
  CHECK_THROWS_AS(build_system(negative), MalformedSpec);
  SystemSpec on_line{{PartSpec{"", IntegerShift{2}, {}, std::vector<double>{1.0}}}, false};
  CHECK_THROWS_AS(build_system(on_line), MalformedSpec);
}

TEST_CASE("orbit_stream examples") {
  const auto c4 = orbit_stream(cyclic(4), {0, std::int64_t{0}}, Observable::delta(0), 4);
  CHECK(c4 == std::vector<Complex>{1.0, 0.0, 0.0, 0.0});

  const DynamicalSystem rot = build_system(SystemSpec::single(CircleRotation{0.25, 8}));
  const auto r = orbit_stream(rot, real_point(0.0), Observable::character(1), 4);
  const std::vector<Complex> expected{{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(r[k] - expected[k]) < 1e-15);

  const DynamicalSystem shift = build_system(SystemSpec::single(IntegerShift{10}));
  const auto s = orbit_stream(shift, {0, std::int64_t{-2}}, Observable::delta(0), 5);
  CHECK(s == std::vector<Complex>{0.0, 0.0, 1.0, 0.0, 0.0});

  // Determinism.
  const DynamicalSystem boole = build_system(SystemSpec::single(BooleMap{4, 10.0, 9}));
  const StatePoint start = boole.state_of(boole.cells()[2]);
  CHECK(orbit_stream(boole, start, Observable::rational_decay(), 1000) ==
        orbit_stream(boole, start, Observable::rational_decay(), 1000));
}

TEST_CASE("rotation closed-form powers agree with repeated steps") {
  const double alpha = (std::sqrt(5.0) - 1.0) / 2.0;
  const DynamicalSystem rot = build_system(SystemSpec::single(CircleRotation{alpha, 16}));
  const Part& part = rot.part(0);
  Coordinate x = RealCoordinate{0.125, 0.0};
  for (std::int64_t k = 1; k <= 2000; ++k) {
    x = part.apply(x);
    const double direct = coordinate_value(part.apply_power(RealCoordinate{0.125, 0.0}, k));
    const double d = std::abs(coordinate_value(x) - direct);
    CHECK(std::min(d, 1.0 - d) < 1e-11);
  }
}

TEST_CASE("Boole orbits that reach 0 escape") {
  const DynamicalSystem boole = build_system(SystemSpec::single(BooleMap{4, 10.0, 9}));
  const Part& part = boole.part(0);
  const Coordinate zero = part.apply(RealCoordinate{1.0, 0.0});
  CHECK(coordinate_value(zero) == 0.0);
  CHECK_THROWS_AS(part.apply(zero), OrbitEscape);
}

TEST_CASE("measure_of examples") {
  CHECK(measure_of(cyclic(4), {0, 1}) == doctest::Approx(0.5));
  const DynamicalSystem shift = build_system(SystemSpec::single(IntegerShift{10}));
  CHECK(measure_of(shift, {9, 10, 11}) == doctest::Approx(3.0));
  const DynamicalSystem rot = build_system(SystemSpec::single(CircleRotation{0.3, 8}));
  CHECK(measure_of(rot, {0, 5}) == doctest::Approx(0.25));
  CHECK(measure_of(rot, {5, 5}) == doctest::Approx(0.125));
  CHECK_THROWS_AS(measure_of(rot, {8}), UnknownCell);
}

TEST_CASE("measure preservation on random permutations") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng() % 40;
    const DynamicalSystem sys = build_system(SystemSpec::single(random_permutation(rng, n)));
    Eigen::VectorXcd values(static_cast<Eigen::Index>(n));
    for (auto& v : values) v = {u(rng), u(rng)};
    const InvarianceReport rep = invariance_check(sys, Observable::tabulated(values), 3);
    CHECK(rep.max_discrepancy <= 1e-12);
    CHECK(rep.ok);
  }
}

TEST_CASE("invariance_check examples") {
  Eigen::VectorXcd v(4);
  v << 1, 2, 3, 4;
  CHECK(invariance_check(cyclic(4), Observable::tabulated(v), 4).max_discrepancy <= 1e-12);

  const DynamicalSystem rot = build_system(SystemSpec::single(CircleRotation{0.6180339887498949, 1 << 16}));
  CHECK(invariance_check(rot, Observable::character(3), 2).max_discrepancy <= 1e-12);

  const DynamicalSystem boole = build_system(SystemSpec::single(BooleMap{4, 10.0, 9}));
  const InvarianceReport rep = invariance_check(boole, Observable::rational_decay(), 1, 1e4);
  CHECK(rep.ok);
  CHECK(rep.max_discrepancy <= rep.tail_bound + 1e-12);

  const DynamicalSystem shift = build_system(SystemSpec::single(IntegerShift{5}));
  CHECK(invariance_check(shift, Observable::rational_decay(), 3).ok);
  CHECK_THROWS_AS(invariance_check(shift, Observable::constant(1.0), 1), NonIntegrableObservable);
}

TEST_CASE("Boole change of variables over both preimage branches") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int i = 0; i < 100; ++i) {
    const double y = u(rng);
    // Independent oracle: bisection roots and a central-difference derivative.
    double oracle = 0.0;
    for (bool positive : {false, true}) {
      const double x = boole_root(y, positive);
      const double h = 1e-6 * std::max(1.0, std::abs(x));
      const double slope = ((x + h) - 1.0 / (x + h) - ((x - h) - 1.0 / (x - h))) / (2.0 * h);
      oracle += 1.0 / std::abs(slope);
    }
    CHECK(std::abs(boole_preimage_weight(y) - 1.0) <= 1e-10);
    CHECK(std::abs(oracle - 1.0) <= 1e-6);
  }
}

TEST_CASE("rmu_split examples") {
  const DynamicalSystem c4 = cyclic(4);
  Eigen::VectorXcd v(4);
  v << 3, 0.4, 2, 0.1;
  const Observable f = Observable::tabulated(v);
  const RmuSplit split = rmu_split(c4, f, 0.5);
  CHECK(split.h_sup == doctest::Approx(0.4));
  const std::vector<Complex> g{3, 0, 2, 0}, h{0, 0.4, 0, 0.1};
  for (std::size_t i = 0; i < 4; ++i) {
    const StatePoint p{0, static_cast<std::int64_t>(i)};
    CHECK(evaluate(split.g, c4, p) == g[i]);
    CHECK(evaluate(split.h, c4, p) == h[i]);
  }

  const DynamicalSystem shift = build_system(SystemSpec::single(IntegerShift{10}));
  const RmuSplit decay = rmu_split(shift, Observable::rational_decay(), 0.5);
  for (std::int64_t x = -10; x <= 10; ++x) {
    const StatePoint p{0, x};
    const Complex fx = evaluate(Observable::rational_decay(), shift, p);
    CHECK(evaluate(decay.g, shift, p) + evaluate(decay.h, shift, p) == fx);
    CHECK((evaluate(decay.g, shift, p) != 0.0) == (x == 0));
  }
  CHECK(decay.h_sup == doctest::Approx(0.5));

  CHECK_THROWS_AS(rmu_split(shift, Observable::constant(1.0), 0.5), NotInRmu);
}

TEST_CASE("rmu_membership examples") {
  const DynamicalSystem shift = build_system(SystemSpec::single(IntegerShift{10}));
  const auto decay = rmu_membership(shift, Observable::rational_decay(), {0.5});
  REQUIRE(decay[0].measure);
  CHECK(*decay[0].measure == doctest::Approx(1.0));
  // 1/(1+x^2) > 0.01 iff |x| <= 9: 19 integers.
  CHECK(*rmu_membership(shift, Observable::rational_decay(), {0.01})[0].measure == doctest::Approx(19.0));
  CHECK_FALSE(rmu_membership(shift, Observable::constant(1.0), {0.5})[0].measure);
  CHECK(*rmu_membership(shift, Observable::delta(0), {0.1})[0].measure == doctest::Approx(1.0));
  CHECK(in_rmu(shift, Observable::rational_decay()));
  CHECK_FALSE(in_rmu(shift, Observable::constant(1.0)));

  // Lebesgue measure of {1/(1+x^2) > 1/2} is the interval (-1, 1).
  const DynamicalSystem boole = build_system(SystemSpec::single(BooleMap{4, 10.0, 9}));
  CHECK(*rmu_membership(boole, Observable::rational_decay(), {0.5})[0].measure == doctest::Approx(2.0));
}

TEST_CASE("disjoint unions keep per-part tags") {
  SystemSpec spec{{PartSpec{"cycle", FinitePermutation::cyclic(4), {}, {}}, PartSpec{"line", IntegerShift{3}, {}, {}}},
                  true};
  const DynamicalSystem sys = build_system(spec);
  CHECK(sys.part(0).hopf() == HopfTag::FinitePart);
  CHECK(sys.part(1).hopf() == HopfTag::Dissipative);
  CHECK(sys.cell_count() == 11);
  CHECK(sys.cell_by_id(4).part == 1);
  CHECK(measure_of(sys, {0, 4, 5}) == doctest::Approx(2.25));

  SystemSpec two_parts_no_union = spec;
  two_parts_no_union.disjoint_union = false;
  CHECK_THROWS_AS(build_system(two_parts_no_union), MalformedSpec);
}
