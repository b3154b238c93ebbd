#include "wwlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wwlab {
namespace {

std::size_t checkpoint_index(const std::vector<std::int64_t>& checkpoints, std::int64_t N) {
  auto it = std::lower_bound(checkpoints.begin(), checkpoints.end(), N);
  if (it == checkpoints.end() || *it != N) throw MalformedSpec("N=" + std::to_string(N) + " is not a checkpoint");
  const auto index = static_cast<std::size_t>(it - checkpoints.begin());
  if (checkpoints.size() - index < 2)
    throw InsufficientCheckpoints("need at least two checkpoints >= " + std::to_string(N));
  return index;
}

// suffix[c] = max over checkpoint pairs i, j >= c of |M_i - M_j|.
std::vector<double> suffix_diameters(const AverageTable& table, std::size_t point, std::size_t weight) {
  const std::size_t k = table.checkpoint_count();
  std::vector<double> suffix(k, 0.0);
  for (std::size_t c = k; c-- > 0;) {
    double widest = c + 1 < k ? suffix[c + 1] : 0.0;
    const Complex head = table.at(point, weight, c);
    for (std::size_t j = c + 1; j < k; ++j) widest = std::max(widest, std::abs(head - table.at(point, weight, j)));
    suffix[c] = widest;
  }
  return suffix;
}

AverageTable slice(const AverageTable& table, const std::vector<std::size_t>& rows) {
  std::vector<SampleCell> points;
  std::vector<double> masses;
  for (std::size_t r : rows) {
    points.push_back(table.points()[r]);
    masses.push_back(table.masses()[r]);
  }
  AverageTable out(points, masses, table.weights(), table.checkpoints());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t w = 0; w < table.weight_count(); ++w)
      for (std::size_t c = 0; c < table.checkpoint_count(); ++c) out.at(i, w, c) = table.at(rows[i], w, c);
  out.system_digest = table.system_digest;
  out.observable = table.observable;
  return out;
}

}  // namespace

const char* to_string(VdcVerdict v) {
  switch (v) {
    case VdcVerdict::StrictHold: return "StrictHold";
    case VdcVerdict::DegenerateEquality: return "DegenerateEquality";
    case VdcVerdict::Violation: return "VIOLATION";
  }
  return "?";
}

VdcBound vdc_bound(const VdcInput& input) {
  const std::int64_t n = input.n();
  const Eigen::Index points = input.values.cols();
  if (n < 1) throw MalformedSpec("Van der Corput input needs n >= 1");
  if (input.m < 0 || input.m > n - 1) throw MalformedSpec("Van der Corput input needs 0 <= m <= n - 1");
  if (input.masses.size() != points)
    throw DimensionMismatch("got " + std::to_string(input.masses.size()) + " masses for " + std::to_string(points) +
                            " points");
  const double nd = static_cast<double>(n);
  double mean_sq = 0.0, energy = 0.0;
  std::vector<double> lag_norm(static_cast<std::size_t>(input.m + 1), 0.0);
  for (Eigen::Index p = 0; p < points; ++p) {
    const auto column = input.values.col(p);
    PairwiseSum<Complex> sum;
    PairwiseSum<double> sq;
    for (std::int64_t k = 0; k < n; ++k) {
      sum.add(column[k]);
      sq.add(std::norm(column[k]));
    }
    mean_sq = std::max(mean_sq, std::norm(sum.total() / nd));
    energy = std::max(energy, sq.total() / nd);
    for (std::int64_t l = 1; l <= input.m; ++l) {
      PairwiseSum<Complex> lag;
      for (std::int64_t k = 0; k + l < n; ++k) lag.add(std::conj(column[k]) * column[k + l]);
      lag_norm[static_cast<std::size_t>(l)] = std::max(lag_norm[static_cast<std::size_t>(l)], std::abs(lag.total() / nd));
    }
  }
  PairwiseSum<double> lags;
  for (std::int64_t l = 1; l <= input.m; ++l) lags.add(lag_norm[static_cast<std::size_t>(l)]);
  const double m1 = static_cast<double>(input.m + 1);
  return {mean_sq, 2.0 / m1 * energy + 4.0 / m1 * lags.total()};
}

VdcResult vdc_check(const VdcInput& input) {
  VdcResult out;
  out.bound = vdc_bound(input);
  if (out.bound.rhs <= 1e-15)
    out.verdict = VdcVerdict::DegenerateEquality;
  else if (out.bound.lhs < out.bound.rhs)
    out.verdict = VdcVerdict::StrictHold;
  else
    out.verdict = VdcVerdict::Violation;
  return out;
}

MaximalResult maximal_check(const DynamicalSystem& sys, const Observable& g, int p, double t, std::int64_t n_max) {
  for (const Part& part : sys.parts())
    if (!std::holds_alternative<FinitePermutation>(part.kind()))
      throw NotFiniteSystem("the maximal inequality check runs on finite permutation parts only");
  if (p != 1 && p != 2) throw MalformedSpec("maximal check supports p = 1 or p = 2");
  if (!(t > 0.0)) throw MalformedSpec("threshold t must be positive");
  if (n_max < 1) throw MalformedSpec("N_max must be >= 1");
  validate(sys, g);

  PairwiseSum<double> norm_p, exceed;
  for (const SampleCell& cell : sys.cells()) {
    const StatePoint start = sys.state_of(cell);
    const double mass = sys.mass_of(cell);
    norm_p.add(mass * std::pow(std::abs(evaluate(g, sys, start)), p));
    PairwiseSum<double> running;
    double sup = 0.0;
    for_each_orbit_value(sys, start, g, n_max, [&](std::int64_t k, Complex v) {
      running.add(std::abs(v));
      sup = std::max(sup, running.total() / static_cast<double>(k + 1));
    });
    if (sup > t) exceed.add(mass);
  }
  MaximalResult out;
  out.exceedance_mass = exceed.total();
  out.bound = std::pow(2.0 * std::pow(norm_p.total(), 1.0 / p) / t, p);
  out.ok = out.exceedance_mass <= out.bound;
  return out;
}

double cauchy_deviation(const std::vector<AverageSample>& samples, std::int64_t N) {
  std::vector<Complex> tail;
  for (const AverageSample& s : samples)
    if (s.n >= N) tail.push_back(s.value);
  if (tail.size() < 2) throw InsufficientCheckpoints("need at least two checkpoints >= " + std::to_string(N));
  double widest = 0.0;
  for (std::size_t i = 0; i < tail.size(); ++i)
    for (std::size_t j = i + 1; j < tail.size(); ++j) widest = std::max(widest, std::abs(tail[i] - tail[j]));
  return widest;
}

std::vector<double> weight_deviations(const AverageTable& table, const std::vector<std::size_t>& rows, std::int64_t N) {
  const std::size_t c0 = checkpoint_index(table.checkpoints(), N);
  std::vector<double> out(table.weight_count(), 0.0);
  for (std::size_t r : rows)
    for (std::size_t w = 0; w < table.weight_count(); ++w) out[w] = std::max(out[w], suffix_diameters(table, r, w)[c0]);
  return out;
}

ConvergenceReport egorov_estimate(const AverageTable& table, const std::vector<double>& masses, double delta,
                                  std::int64_t N) {
  if (masses.size() != table.point_count()) throw DimensionMismatch("one mass per table point is required");
  if (!(delta >= 0.0)) throw MalformedSpec("delta must be >= 0");
  const std::size_t c0 = checkpoint_index(table.checkpoints(), N);
  const std::size_t points = table.point_count(), weights = table.weight_count();

  std::vector<std::vector<std::vector<double>>> diam(points, std::vector<std::vector<double>>(weights));
  std::vector<double> score(points, 0.0);
  for (std::size_t p = 0; p < points; ++p) {
    for (std::size_t w = 0; w < weights; ++w) {
      diam[p][w] = suffix_diameters(table, p, w);
      score[p] = std::max(score[p], diam[p][w][c0]);
    }
  }

  std::vector<std::size_t> order(points);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return table.points()[a].id < table.points()[b].id;
  });

  ConvergenceReport report;
  report.delta = delta;
  report.N = N;
  std::vector<bool> kept(points, true);
  PairwiseSum<double> removed_mass, retained_mass;
  for (std::size_t p : order) {
    if (score[p] <= delta) break;
    kept[p] = false;
    report.removed.emplace_back(table.points()[p].id, masses[p]);
    removed_mass.add(masses[p]);
  }
  for (std::size_t p = 0; p < points; ++p) {
    if (!kept[p]) continue;
    report.retained.push_back(table.points()[p].id);
    retained_mass.add(masses[p]);
  }
  report.removed_mass = removed_mass.total();
  report.retained_mass = retained_mass.total();
  report.epsilon = report.removed_mass;
  report.total_removal = points > 0 && report.retained.empty();

  const std::size_t last_start = table.checkpoint_count() - 2;
  for (std::size_t w = 0; w < weights; ++w) {
    WeightConvergence wc{w, table.checkpoints()[0], 0.0};
    for (std::size_t c = 0; c <= last_start; ++c) {
      double worst = 0.0;
      for (std::size_t p = 0; p < points; ++p)
        if (kept[p]) worst = std::max(worst, diam[p][w][c]);
      if (worst <= delta) {
        wc.n_lambda = table.checkpoints()[c];
        break;
      }
    }
    for (std::size_t p = 0; p < points; ++p)
      if (kept[p]) wc.deviation = std::max(wc.deviation, diam[p][w][c0]);
    report.per_weight.push_back(wc);
  }
  return report;
}

AuWwReport au_ww_report(const DynamicalSystem& sys, const AverageTable& table, double epsilon, double delta,
                        std::int64_t N) {
  if (!(epsilon >= 0.0)) throw MalformedSpec("epsilon must be >= 0");
  AuWwReport out;
  out.overall = egorov_estimate(table, table.masses(), delta, N);
  out.overall.epsilon = epsilon;
  out.overall.pass = out.overall.removed_mass <= epsilon;
  out.pass = out.overall.pass;
  if (sys.is_disjoint_union()) {
    const double share = epsilon / static_cast<double>(sys.parts().size());
    for (std::size_t part = 0; part < sys.parts().size(); ++part) {
      std::vector<std::size_t> rows;
      for (std::size_t r = 0; r < table.point_count(); ++r)
        if (table.points()[r].part == part) rows.push_back(r);
      if (rows.empty()) continue;
      const AverageTable sub = slice(table, rows);
      PartReport pr{part, sys.part(part).name(), sys.part(part).hopf(), egorov_estimate(sub, sub.masses(), delta, N)};
      pr.report.epsilon = share;
      pr.report.pass = pr.report.removed_mass <= share;
      out.pass = out.pass && pr.report.pass;
      out.parts.push_back(std::move(pr));
    }
  }
  return out;
}

AuWwReport au_ww_report(const DynamicalSystem& sys, const Observable& f, const std::vector<WeightSequence>& weights,
                        double epsilon, double delta, const CheckpointSchedule& schedule,
                        const std::vector<SampleCell>& points, std::int64_t N, int threads) {
  const AverageTable table = average_table(sys, points, f, weights, schedule, threads);
  return au_ww_report(sys, table, epsilon, delta, N);
}

nlohmann::json to_json(const ConvergenceReport& report) {
  nlohmann::json removed = nlohmann::json::array();
  for (const auto& [id, mass] : report.removed) removed.push_back({id, mass});
  nlohmann::json per_weight = nlohmann::json::array();
  for (const auto& w : report.per_weight) per_weight.push_back({w.weight_id, w.n_lambda, w.deviation});
  return {{"epsilon", report.epsilon},
          {"delta", report.delta},
          {"N", report.N},
          {"removed", removed},
          {"removed_mass", report.removed_mass},
          {"retained_mass", report.retained_mass},
          {"per_weight", per_weight},
          {"total_removal", report.total_removal},
          {"verdict", report.pass ? "Pass" : "Fail"}};
}

nlohmann::json to_json(const AuWwReport& report) {
  nlohmann::json out = to_json(report.overall);
  out["verdict"] = report.pass ? "Pass" : "Fail";
  if (!report.parts.empty()) {
    nlohmann::json parts = nlohmann::json::array();
    for (const auto& p : report.parts) {
      nlohmann::json entry = to_json(p.report);
      entry["part"] = p.part;
      entry["name"] = p.name;
      entry["hopf"] = to_string(p.hopf);
      parts.push_back(std::move(entry));
    }
    out["parts"] = std::move(parts);
  }
  return out;
}

}  // namespace wwlab
