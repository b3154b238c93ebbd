// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wwlab/analysis.hpp"
#include "wwlab/runner.hpp"
#include "wwlab/spectral.hpp"

using namespace wwlab;

namespace {

namespace tol {
constexpr double kClosedForm = 1e-10;
constexpr double kRuntime1 = 30.0;
constexpr double kRuntime2 = 10.0;
constexpr double kGammaBrute = 1e-12;
constexpr double kAtomMass = 1e-3;
constexpr double kWiener = 1e-4;
constexpr double kDoublingGamma = 1e-10;
constexpr double kDoublingWiener = 1e-12;
constexpr double kTwisted = 1e-10;
constexpr double kHermitian = -1e-10;
constexpr double kBooleThreshold = 0.05;
constexpr int kBooleRequired = 95;
constexpr double kRuntime8 = 120.0;
constexpr double kBesicovitch = 1e-12;
constexpr double kRmu = 1e-12;
}  // namespace tol

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// 1. Engine vs closed form on the golden rotation.
Outcome geometric_oracle() {
  const auto start = std::chrono::steady_clock::now();
  const auto rot = build_system(SystemSpec::single(CircleRotation{kGolden, 1024}));
  std::vector<WeightSequence> weights = character_grid(64);
  weights.push_back(WeightSequence::character(phase_of_multiple(-1, kGolden)));
  std::vector<std::int64_t> checkpoints;
  for (std::int64_t n = 1; n < 100000; n *= 2) checkpoints.push_back(n);
  for (std::int64_t n = 10000; n <= 100000; n += 10000)
    if (std::find(checkpoints.begin(), checkpoints.end(), n) == checkpoints.end()) checkpoints.push_back(n);
  std::sort(checkpoints.begin(), checkpoints.end());
  const auto schedule = CheckpointSchedule::explicit_list(checkpoints);
  std::vector<SampleCell> points;
  for (std::size_t j = 0; j < 8; ++j) points.push_back(rot.cell_by_id(j * 128 + 37));
  const AverageTable table = average_table(rot, points, Observable::character(1), weights, schedule, 1);
  double worst = 0.0;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const double omega = coordinate_value(rot.state_of(points[p]).coord);
    for (std::size_t w = 0; w < weights.size(); ++w) {
      const auto* character = std::get_if<CharacterWeight>(&weights[w].kind);
      const double theta = character ? character->theta : 0.0;
      for (std::size_t c = 0; c < checkpoints.size(); ++c)
        worst = std::max(worst, std::abs(table.at(p, w, c) - character_closed_form(kGolden, theta, omega, 1, checkpoints[c])));
    }
  }
  const double elapsed = seconds_since(start);
  return {worst <= tol::kClosedForm && elapsed < tol::kRuntime1,
          fmt("max |engine - closed form| = %.3g (tol %.0e) over %zu entries, %.2f s (limit %.0f s)", worst,
              tol::kClosedForm, points.size() * weights.size() * checkpoints.size(), elapsed, tol::kRuntime1)};
}

// 2. Van der Corput suite.
Outcome van_der_corput() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  int violations = 0, strict = 0;
  for (int trial = 0; trial < 200; ++trial) {
    VdcInput in;
    const std::int64_t n = uniform_int(rng, 1, 256);
    in.m = uniform_int(rng, 0, n - 1);
    in.values.resize(n, 8);
    for (Eigen::Index p = 0; p < 8; ++p)
      for (Eigen::Index k = 0; k < n; ++k) in.values(k, p) = unit_phase(uniform01(rng));
    in.masses = Eigen::VectorXd::Constant(8, 0.125);
    const VdcVerdict v = vdc_check(in).verdict;
    violations += v == VdcVerdict::Violation;
    strict += v == VdcVerdict::StrictHold;
  }
  VdcInput zero;
  zero.m = 3;
  zero.values = Eigen::MatrixXcd::Zero(16, 8);
  zero.masses = Eigen::VectorXd::Constant(8, 0.125);
  const bool degenerate = vdc_check(zero).verdict == VdcVerdict::DegenerateEquality;
  const double elapsed = seconds_since(start);
  return {violations == 0 && degenerate && elapsed < tol::kRuntime2,
          fmt("%d/200 StrictHold, %d VIOLATION, all-zero case %s, %.2f s (limit %.0f s)", strict, violations,
              degenerate ? "DegenerateEquality" : "WRONG", elapsed, tol::kRuntime2)};
}

// 3. Atoms of the 8-cycle.
Outcome spectral_atoms() {
  const std::int64_t len = 8000;
  const auto c8 = build_system(SystemSpec::single(FinitePermutation::cyclic(8)));
  const auto gamma = correlation(c8, Observable::delta(0), len);
  double gamma_err = 0.0;
  for (std::int64_t l = 0; l <= len; ++l) {
    double brute = 0.0;  // sum_i (1/8) 1{i = 0} 1{i + l = 0 mod 8}
    for (std::int64_t i = 0; i < 8; ++i) brute += (i == 0 && (i + l) % 8 == 0) ? 0.125 : 0.0;
    gamma_err = std::max(gamma_err, std::abs(gamma.at(l) - brute));
  }
  std::vector<double> roots;
  for (int j = 0; j < 8; ++j) roots.push_back(j / 8.0);
  double atom_err = 0.0;
  for (const Complex& a : atom_scan(gamma, roots, len)) atom_err = std::max(atom_err, std::abs(a - 1.0 / 64.0));
  const double wiener = wiener_statistic(gamma, len - 1);
  const double wiener_err = std::abs(wiener - 1.0 / 512.0);
  return {gamma_err <= tol::kGammaBrute && atom_err <= tol::kAtomMass && wiener_err <= tol::kWiener,
          fmt("gamma err %.2g (tol %.0e), atom err %.2g (tol %.0e), W_7999 = %.6g vs 1/512 err %.2g (tol %.0e)",
              gamma_err, tol::kGammaBrute, atom_err, tol::kAtomMass, wiener, wiener_err, tol::kWiener)};
}

// 4. Doubling-map continuity.
Outcome spectral_continuity() {
  const auto doubling = build_system(SystemSpec::single(DoublingMap{1 << 16}));
  const auto gamma = correlation(doubling, Observable::character(1), 12);
  double worst = 0.0;
  for (std::int64_t l = 1; l <= 12; ++l) worst = std::max(worst, std::abs(gamma.at(l)));
  const double w12 = wiener_statistic(gamma, 12);
  double twisted_err = 0.0;
  for (double theta : {0.0, 0.1, 0.25, 0.5, 0.77})
    twisted_err = std::max(twisted_err, std::abs(twisted_mean_norm(doubling, Observable::character(1), theta, 4) - 0.5));
  return {worst <= tol::kDoublingGamma && w12 <= tol::kDoublingWiener && twisted_err <= tol::kTwisted,
          fmt("max |gamma(1..12)| = %.2g (tol %.0e), W_12 = %.2g (tol %.0e), twisted norm err %.2g (tol %.0e)", worst,
              tol::kDoublingGamma, w12, tol::kDoublingWiener, twisted_err, tol::kTwisted)};
}

// 5. Positive-definiteness on the 8-cycle.
Outcome positive_definite() {
  const auto c8 = build_system(SystemSpec::single(FinitePermutation::cyclic(8)));
  const auto gamma = correlation(c8, Observable::delta(0), 32);
  std::mt19937_64 rng(5);
  double worst = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 100; ++trial) {
    const std::int64_t m = uniform_int(rng, 0, 32);
    worst = std::min(worst, positive_definite_check(gamma, m, 1, rng()));
  }
  return {worst >= tol::kHermitian, fmt("min Hermitian form over 100 vectors = %.3g (floor %.0e)", worst, tol::kHermitian)};
}

// 6. Maximal inequality.
Outcome maximal_inequality() {
  FinitePermutation swap;
  swap.perm = {1, 0};
  swap.masses = Eigen::VectorXd::Constant(2, 0.5);
  Eigen::VectorXcd g(2);
  g << 1.0, 0.0;
  const MaximalResult hand =
      maximal_check(build_system(SystemSpec::single(swap)), Observable::tabulated(g), 1, 0.6, 8);
  const bool hand_ok = hand.ok && std::abs(hand.exceedance_mass - 0.5) < 1e-15 && std::abs(hand.bound - 5.0 / 3.0) < 1e-15;

  const auto suite = maximal_json(load_config(std::filesystem::path(WWLAB_CONFIG_DIR) / "maximal_random.ini"));
  int ok = 0, total = 0;
  std::size_t largest = 0;
  for (const auto& c : suite["cases"]) {
    ++total;
    ok += c["ok"].get<bool>() && c["exceedance"].get<double>() <= c["bound"].get<double>();
    largest = std::max(largest, c["states"].get<std::size_t>());
  }
  return {hand_ok && ok == total && total == 300,
          fmt("swap case exceedance %.3g <= bound %.4g; %d/%d random (system, g, p, t, N_max) checks hold, N <= %zu",
              hand.exceedance_mass, hand.bound, ok, total, largest)};
}

// 7. Dissipative decay.
Outcome dissipative_decay() {
  const auto shift = build_system(SystemSpec::single(IntegerShift{32}));
  std::vector<WeightSequence> weights = character_grid(64);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 16; ++i) weights.push_back(WeightSequence::character(uniform01(rng)));
  const auto schedule = CheckpointSchedule::dyadic(1 << 16);
  const auto table = average_table(shift, shift.cells(), Observable::delta(0), weights, schedule);
  int above = 0;
  double worst_ratio = 0.0;
  for (std::size_t p = 0; p < table.point_count(); ++p)
    for (std::size_t w = 0; w < table.weight_count(); ++w)
      for (std::size_t c = 0; c < table.checkpoint_count(); ++c) {
        const double n = static_cast<double>(schedule.points()[c]);
        above += std::abs(table.at(p, w, c)) > 1.0 / n;
        worst_ratio = std::max(worst_ratio, std::abs(table.at(p, w, c)) * n);
      }
  double removed = 0.0;
  for (std::size_t c = 0; c + 1 < schedule.size(); ++c) {
    const std::int64_t N = schedule.points()[c];
    removed = std::max(removed, egorov_estimate(table, table.masses(), 2.0 / static_cast<double>(N), N).removed_mass);
  }
  return {above == 0 && removed == 0.0,
          fmt("%d entries with |M_n| > 1/n (max n |M_n| = %.17g) over %zu weights; removed mass with delta = 2/N: %.3g",
              above, worst_ratio, weights.size(), removed)};
}

// 8. Boole map decay.
Outcome boole_decay() {
  const auto start = std::chrono::steady_clock::now();
  int below = 0;
  double largest = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto sys = build_system(SystemSpec::single(BooleMap{1, 1000.0, seed}));
    const double m = modulus_averages(sys, sys.state_of(sys.cells()[0]), Observable::rational_decay(),
                                      CheckpointSchedule::explicit_list({1000000}))[0];
    below += m < tol::kBooleThreshold;
    largest = std::max(largest, m);
  }
  const double elapsed = seconds_since(start);
  return {below >= tol::kBooleRequired && elapsed < tol::kRuntime8,
          fmt("%d/100 seeds with M_1e6(|f|) < %.2f (need %d), largest %.3g, %.1f s (limit %.0f s)", below,
              tol::kBooleThreshold, tol::kBooleRequired, largest, elapsed, tol::kRuntime8)};
}

// 9. Besicovitch deviation.
Outcome besicovitch_deviation() {
  const auto rot = build_system(SystemSpec::single(CircleRotation{kGolden, 1024}));
  const TrigPoly poly{{{0.5, phase_of_multiple(-1, kGolden)}, {0.25, 0.125}, {Complex(0.0, 0.3), 0.7}}};
  const std::vector<WeightSequence> weights{WeightSequence::trig_poly(poly.terms),
                                            WeightSequence::besicovitch(poly, PowerDecay{1.0, 1.0})};
  std::vector<std::int64_t> checkpoints;
  for (std::int64_t n = 1; n <= 1000; ++n) checkpoints.push_back(n);
  for (std::int64_t n = 2000; n <= 100000; n += 1000) checkpoints.push_back(n);
  std::vector<SampleCell> points;
  for (std::size_t j = 0; j < 64; ++j) points.push_back(rot.cell_by_id(j * 16));
  const auto table = average_table(rot, points, Observable::character(1), weights,
                                   CheckpointSchedule::explicit_list(checkpoints), 2);
  const double sup_f = 1.0;
  double worst_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    const double n = static_cast<double>(checkpoints[c]);
    double dev = 0.0;
    for (std::size_t p = 0; p < points.size(); ++p) dev = std::max(dev, std::abs(table.at(p, 1, c) - table.at(p, 0, c)));
    worst_excess = std::max(worst_excess, dev - sup_f * (1.0 + std::log(n)) / n);
  }
  return {worst_excess <= tol::kBesicovitch,
          fmt("max over %zu checkpoints of deviation - (1 + ln n)/n = %.3g (tol %.0e)", checkpoints.size(), worst_excess,
              tol::kBesicovitch)};
}

// 10. R_mu pipeline on a union with a translation part.
Outcome rmu_pipeline() {
  const SystemSpec spec{{PartSpec{"cycle", FinitePermutation::cyclic(8), {}, {}}, PartSpec{"line", IntegerShift{40}, {}, {}}},
                        true};
  const auto uni = build_system(spec);
  const Observable f = Observable::rational_decay();
  const double delta = 0.3;
  const RmuSplit split = rmu_split(uni, f, delta / 3.0);
  const auto schedule = CheckpointSchedule::dyadic(1 << 14);
  bool exact = true;
  for (const SampleCell& cell : uni.cells()) {
    const StatePoint p = uni.state_of(cell);
    Orbit orbit(uni, p);
    for (int k = 0; k < 200; ++k, orbit.advance()) {
      const StatePoint& s = orbit.state();
      exact = exact && evaluate(split.g, uni, s) + evaluate(split.h, uni, s) == evaluate(f, uni, s);
    }
  }
  const auto weights = character_grid(16);
  const auto tf = average_table(uni, uni.cells(), f, weights, schedule, 2);
  const auto tg = average_table(uni, uni.cells(), split.g, weights, schedule, 2);
  const std::int64_t N = 64;
  const auto report_g = egorov_estimate(tg, tg.masses(), delta, N);
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < tg.point_count(); ++r)
    if (std::find(report_g.retained.begin(), report_g.retained.end(), tg.points()[r].id) != report_g.retained.end())
      rows.push_back(r);
  const auto dev_f = weight_deviations(tf, rows, N);
  const auto dev_g = weight_deviations(tg, rows, N);
  double worst_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t w = 0; w < weights.size(); ++w)
    worst_excess = std::max(worst_excess, dev_f[w] - dev_g[w] - 2.0 * split.h_sup);
  return {exact && worst_excess <= tol::kRmu,
          fmt("split exact: %s, ||h||_inf = %.3g, max(dev_f - dev_g - 2||h||_inf) = %.3g (tol %.0e), retained %zu/%zu",
              exact ? "yes" : "NO", split.h_sup, worst_excess, tol::kRmu, rows.size(), tg.point_count())};
}

// 11. Egorov monotonicity on cyclic-8 and rotation tables.
Outcome egorov_monotonicity() {
  const auto c8 = build_system(SystemSpec::single(FinitePermutation::cyclic(8)));
  const auto rot = build_system(SystemSpec::single(CircleRotation{kGolden, 1024}));
  std::vector<WeightSequence> rot_weights = character_grid(16);
  rot_weights.push_back(WeightSequence::character(phase_of_multiple(-1, kGolden)));
  std::vector<SampleCell> rot_points;
  for (std::size_t j = 0; j < 64; ++j) rot_points.push_back(rot.cell_by_id(j * 16));
  const auto schedule = CheckpointSchedule::dyadic(1 << 14);
  const std::vector<AverageTable> tables{
      average_table(c8, c8.cells(), Observable::delta(0), character_grid(16), schedule),
      average_table(rot, rot_points, Observable::character(1), rot_weights, schedule, 2)};
  int checks = 0, broken = 0;
  for (const AverageTable& t : tables) {
    for (std::size_t c = 0; c + 1 < schedule.size(); ++c) {
      double previous = std::numeric_limits<double>::infinity();
      for (double delta : {0.02, 0.05, 0.1, 0.2}) {
        const double removed = egorov_estimate(t, t.masses(), delta, schedule.points()[c]).removed_mass;
        broken += removed > previous;
        ++checks;
        previous = removed;
      }
    }
    for (double delta : {0.02, 0.05, 0.1, 0.2}) {
      double previous = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c + 1 < schedule.size(); ++c) {
        const double removed = egorov_estimate(t, t.masses(), delta, schedule.points()[c]).removed_mass;
        broken += removed > previous;
        ++checks;
        previous = removed;
      }
    }
  }
  return {broken == 0, fmt("%d monotonicity comparisons in delta and N, %d increases", checks, broken)};
}

std::string command_for(const ExperimentConfig& c) {
  if (c.spectral) return "spectral";
  if (c.egorov) return "egorov";
  if (c.vdc) return "vdc";
  if (c.maximal) return "maximal";
  return "simulate";
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 12. Byte-identical reruns of every shipped config.
Outcome determinism() {
  const std::filesystem::path configs = WWLAB_CONFIG_DIR;
  const auto scratch = std::filesystem::temp_directory_path() / "wwlab_acceptance_determinism";
  std::filesystem::remove_all(scratch);
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(configs))
    if (entry.path().extension() == ".ini") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  int identical = 0, compared = 0;
  std::string mismatches;
  for (const auto& file : files) {
    const std::string name = file.stem().string();
    const ExperimentConfig config = load_config(file);
    const auto a = run_command(command_for(config), config, {scratch / name / "a", {}, {}});
    const auto b = run_command(command_for(config), config, {scratch / name / "b", {}, {}});
    for (std::size_t i = 0; i < a.files.size(); ++i) {
      ++compared;
      const bool same = i < b.files.size() && slurp(a.files[i]) == slurp(b.files[i]);
      identical += same;
      if (!same) mismatches += " " + name + "/" + a.files[i].filename().string();
    }
  }
  std::filesystem::remove_all(scratch);
  return {identical == compared && !files.empty(),
          fmt("%zu configs, %d/%d output files byte-identical%s", files.size(), identical, compared, mismatches.c_str())};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"geometric oracle", geometric_oracle},      {"Van der Corput suite", van_der_corput},
      {"spectral atoms", spectral_atoms},          {"spectral continuity", spectral_continuity},
      {"positive definiteness", positive_definite}, {"maximal inequality", maximal_inequality},
      {"dissipative decay", dissipative_decay},    {"Boole decay", boole_decay},
      {"Besicovitch deviation", besicovitch_deviation}, {"R_mu pipeline", rmu_pipeline},
      {"Egorov monotonicity", egorov_monotonicity}, {"determinism", determinism}};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    failures += !out.pass;
    std::printf("criterion %2zu %s  %-22s %s\n", i + 1, out.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failures);
  return failures == 0 ? 0 : 1;
}
