#include "wwlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace wwlab {
namespace {

const Part& single_finite_part(const DynamicalSystem& sys) {
  if (sys.parts().size() != 1 || !sys.part(0).has_finite_measure())
    throw NotFiniteSystem("spectral quantities need a single finite-measure part");
  return sys.part(0);
}

void require_resolution(const Part& part, std::int64_t lags) {
  if (const auto* d = std::get_if<DoublingMap>(&part.kind())) {
    if (lags + 2 >= 63 || d->resolution < (std::size_t{1} << (lags + 2)))
      throw QuadratureTooCoarse("doubling map with M=" + std::to_string(d->resolution) + " cannot resolve lag " +
                                std::to_string(lags) + "; need M >= 2^" + std::to_string(lags + 2));
  }
}

Complex mean_value(const DynamicalSystem& sys, const Observable& f) {
  const Part& part = single_finite_part(sys);
  return inner_product(sys, Observable::constant(1.0), f) / part.total_mass();
}

}  // namespace

Complex CorrelationSequence::at(std::int64_t l) const {
  const Complex v = values[static_cast<Eigen::Index>(std::abs(l))];
  return l < 0 ? std::conj(v) : v;
}

CorrelationSequence correlation(const DynamicalSystem& sys, const Observable& f, std::int64_t l_max) {
  if (l_max < 0) throw MalformedSpec("l_max must be >= 0");
  const Part& part = single_finite_part(sys);
  require_resolution(part, l_max);
  validate(sys, f);
  std::vector<PairwiseSum<Complex>> acc(static_cast<std::size_t>(l_max + 1));
  for (std::size_t cell = 0; cell < part.cell_count(); ++cell) {
    const double mass = part.cell_mass(cell);
    Complex first = 0.0;
    for_each_orbit_value(sys, {0, part.cell_coordinate(cell)}, f, l_max + 1, [&](std::int64_t l, Complex v) {
      if (l == 0) first = mass * std::conj(v);
      acc[static_cast<std::size_t>(l)].add(first * v);
    });
  }
  CorrelationSequence out;
  out.values.resize(l_max + 1);
  for (std::int64_t l = 0; l <= l_max; ++l) out.values[l] = acc[static_cast<std::size_t>(l)].total();
  out.values[0] = out.values[0].real();
  return out;
}

CorrelationSequence correlation_ergodic(const DynamicalSystem& sys, const std::vector<SampleCell>& base_points,
                                        const Observable& f, std::int64_t l_max, std::int64_t n) {
  if (n < 1) throw MalformedSpec("orbit length must be >= 1");
  if (l_max < 0) throw MalformedSpec("l_max must be >= 0");
  if (base_points.empty()) throw MalformedSpec("at least one base point is required");
  validate(sys, f);
  const std::size_t part_index = base_points.front().part;
  const Part& part = sys.part(part_index);
  if (!part.has_finite_measure()) throw NotFiniteSystem("ergodic correlation estimates need a finite-measure part");
  for (const auto& b : base_points)
    if (b.part != part_index) throw MalformedSpec("base points must lie in one part");

  const auto lags = static_cast<std::size_t>(l_max + 1);
  std::vector<Eigen::VectorXcd> estimates;
  for (const SampleCell& base : base_points) {
    std::vector<PairwiseSum<Complex>> acc(lags);
    std::vector<Complex> ring(lags);
    for_each_orbit_value(sys, sys.state_of(base), f, n + l_max, [&](std::int64_t k, Complex v) {
      ring[static_cast<std::size_t>(k) % lags] = v;
      const std::int64_t j = k - l_max;
      if (j < 0) return;
      const Complex head = std::conj(ring[static_cast<std::size_t>(j) % lags]);
      for (std::size_t l = 0; l < lags; ++l) acc[l].add(head * ring[(static_cast<std::size_t>(j) + l) % lags]);
    });
    Eigen::VectorXcd est(static_cast<Eigen::Index>(lags));
    for (std::size_t l = 0; l < lags; ++l)
      est[static_cast<Eigen::Index>(l)] = part.total_mass() * acc[l].total() / static_cast<double>(n);
    estimates.push_back(std::move(est));
  }

  CorrelationSequence out;
  out.provenance = CorrelationProvenance::ErgodicEstimate;
  out.n = n;
  out.values = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(lags));
  for (const auto& est : estimates) out.values += est;
  out.values /= static_cast<double>(estimates.size());
  for (std::size_t p = 0; p < estimates.size(); ++p) {
    out.base_points.push_back(base_points[p].id);
    for (std::size_t q = p + 1; q < estimates.size(); ++q)
      out.spread = std::max(out.spread, (estimates[p] - estimates[q]).cwiseAbs().maxCoeff());
  }
  return out;
}

Eigen::MatrixXcd toeplitz_matrix(const CorrelationSequence& gamma, std::int64_t m) {
  if (m < 0 || m > gamma.l_max()) throw MalformedSpec("Toeplitz order exceeds the available lags");
  Eigen::MatrixXcd g(m + 1, m + 1);
  for (std::int64_t i = 0; i <= m; ++i)
    for (std::int64_t j = 0; j <= m; ++j) g(i, j) = gamma.at(i - j);
  return g;
}

double hermitian_form(const CorrelationSequence& gamma, const Eigen::VectorXcd& z) {
  const Eigen::MatrixXcd g = toeplitz_matrix(gamma, z.size() - 1);
  return (z.transpose() * g * z.conjugate()).value().real();
}

double positive_definite_check(const CorrelationSequence& gamma, std::int64_t m, int trials, std::uint64_t seed) {
  if (trials < 1) throw MalformedSpec("positive-definiteness check needs at least one trial");
  const Eigen::MatrixXcd g = toeplitz_matrix(gamma, m);
  std::mt19937_64 rng(seed);
  double lowest = std::numeric_limits<double>::infinity();
  Eigen::VectorXcd z(m + 1);
  for (int t = 0; t < trials; ++t) {
    for (Eigen::Index i = 0; i <= m; ++i) {
      const double re = uniform(rng, -1.0, 1.0);
      const double im = uniform(rng, -1.0, 1.0);
      z[i] = {re, im};
    }
    lowest = std::min(lowest, (z.transpose() * g * z.conjugate()).value().real());
  }
  return lowest;
}

double wiener_statistic(const CorrelationSequence& gamma, std::int64_t m) {
  if (m < 0 || m > gamma.l_max()) throw MalformedSpec("Wiener statistic order exceeds the available lags");
  PairwiseSum<double> sum;
  for (std::int64_t l = 1; l <= m; ++l) sum.add(std::norm(gamma.values[l]));
  return sum.total() / static_cast<double>(m + 1);
}

std::vector<Complex> atom_scan(const CorrelationSequence& gamma, const std::vector<double>& thetas, std::int64_t n) {
  if (n < 1 || n > gamma.l_max()) throw MalformedSpec("atom scan length must lie in [1, l_max]");
  std::vector<Complex> out;
  out.reserve(thetas.size());
  for (double theta : thetas) {
    PairwiseSum<Complex> sum;
    for (std::int64_t l = 1; l <= n; ++l) sum.add(gamma.values[l] * unit_phase(-phase_of_multiple(l, theta)));
    out.push_back(sum.total() / static_cast<double>(n));
  }
  return out;
}

double twisted_mean_norm(const DynamicalSystem& sys, const Observable& f, double theta, std::int64_t n) {
  if (n < 1) throw MalformedSpec("twisted mean needs n >= 1");
  const Part& part = single_finite_part(sys);
  require_resolution(part, n);
  validate(sys, f);
  PairwiseSum<double> norm2;
  for (std::size_t cell = 0; cell < part.cell_count(); ++cell) {
    PairwiseSum<Complex> sum;
    for_each_orbit_value(sys, {0, part.cell_coordinate(cell)}, f, n + 1, [&](std::int64_t l, Complex v) {
      if (l > 0) sum.add(unit_phase(phase_of_multiple(l, theta)) * v);
    });
    norm2.add(part.cell_mass(cell) * std::norm(sum.total() / static_cast<double>(n)));
  }
  return std::sqrt(norm2.total());
}

Complex inner_product(const DynamicalSystem& sys, const Observable& f, const Observable& g) {
  const Part& part = single_finite_part(sys);
  PairwiseSum<Complex> sum;
  for (std::size_t cell = 0; cell < part.cell_count(); ++cell) {
    const Coordinate& c = part.cell_coordinate(cell);
    sum.add(part.cell_mass(cell) * std::conj(evaluate(f, part, 0, c)) * evaluate(g, part, 0, c));
  }
  return sum.total();
}

KroneckerModel kronecker_model(const DynamicalSystem& sys, std::int64_t max_frequency) {
  if (sys.parts().size() != 1) throw NoKroneckerModel("Kronecker models are declared per single-part system");
  const Part& part = sys.part(0);
  KroneckerModel model;
  model.label = part.kronecker();
  if (const auto* fp = std::get_if<FinitePermutation>(&part.kind())) {
    const std::size_t n = fp->perm.size();
    std::vector<bool> seen(n, false);
    for (std::size_t start = 0; start < n; ++start) {
      if (seen[start]) continue;
      std::vector<std::size_t> cycle;
      for (std::size_t i = start; !seen[i]; i = fp->perm[i]) {
        seen[i] = true;
        cycle.push_back(i);
      }
      const auto len = static_cast<std::int64_t>(cycle.size());
      for (std::int64_t k = 0; k < len; ++k) {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n));
        for (std::int64_t j = 0; j < len; ++j)
          v[static_cast<Eigen::Index>(cycle[static_cast<std::size_t>(j)])] =
              unit_phase(static_cast<double>((k * j) % len) / static_cast<double>(len));
        model.eigenpairs.push_back({static_cast<double>(k) / static_cast<double>(len), Observable::tabulated(v)});
      }
    }
  } else if (const auto* r = std::get_if<CircleRotation>(&part.kind())) {
    for (std::int64_t k = -max_frequency; k <= max_frequency; ++k)
      model.eigenpairs.push_back({phase_of_multiple(k, r->alpha), Observable::character(k)});
  } else if (std::holds_alternative<DoublingMap>(part.kind())) {
    model.eigenpairs.push_back({0.0, Observable::constant(1.0)});
  } else {
    throw NoKroneckerModel("no Kronecker model is declared for an infinite-measure part");
  }
  return model;
}

double eigen_residual(const DynamicalSystem& sys, const Eigenpair& pair) {
  const Part& part = single_finite_part(sys);
  validate(sys, pair.function);
  const Complex lambda = unit_phase(pair.theta);
  double worst = 0.0;
  for (std::size_t cell = 0; cell < part.cell_count(); ++cell) {
    const Coordinate& c = part.cell_coordinate(cell);
    const Complex image = evaluate(pair.function, part, 0, part.apply(c));
    worst = std::max(worst, std::abs(image - lambda * evaluate(pair.function, part, 0, c)));
  }
  return worst;
}

KroneckerSplit kronecker_project(const DynamicalSystem& sys, const Observable& f) {
  if (sys.parts().size() != 1 || !sys.part(0).has_finite_measure())
    throw NoKroneckerModel("Kronecker projection needs a single finite-measure part");
  validate(sys, f);
  KroneckerSplit split{f, Observable::zero(), 0.0};
  if (sys.part(0).kronecker() == KroneckerLabel::ConstantsOnly) {
    const Complex mean = mean_value(sys, f);
    split.kronecker = Observable::constant(mean);
    split.orthogonal = Observable::combination({{1.0, f}, {-mean, Observable::constant(1.0)}});
  }
  split.inner_product = inner_product(sys, split.kronecker, split.orthogonal);
  return split;
}

SpectralSummary summarize(CorrelationSequence gamma, const std::vector<std::int64_t>& wiener_ms,
                          const std::vector<double>& thetas, std::int64_t atom_n, double threshold) {
  SpectralSummary out;
  for (std::int64_t m : wiener_ms) out.wiener.emplace_back(m, wiener_statistic(gamma, m));
  const std::vector<Complex> masses = atom_scan(gamma, thetas, atom_n);
  out.verdict.tolerance = threshold;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    out.atoms.emplace_back(thetas[i], masses[i]);
    if (masses[i].real() > threshold) {
      out.verdict.atoms_detected = true;
      out.verdict.locations.push_back(thetas[i]);
    }
  }
  out.gamma = std::move(gamma);
  return out;
}

nlohmann::json to_json(const SpectralSummary& summary) {
  nlohmann::json gamma = nlohmann::json::array();
  for (Eigen::Index l = 0; l < summary.gamma.values.size(); ++l)
    gamma.push_back({summary.gamma.values[l].real(), summary.gamma.values[l].imag()});
  nlohmann::json wiener = nlohmann::json::array();
  for (const auto& [m, w] : summary.wiener) wiener.push_back({m, w});
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& [theta, a] : summary.atoms) atoms.push_back({theta, a.real(), a.imag()});
  nlohmann::json verdict;
  if (summary.verdict.atoms_detected) {
    verdict = {{"kind", "AtomsDetected"}, {"locations", summary.verdict.locations}};
  } else {
    verdict = {{"kind", "ContinuousWithin"}, {"tolerance", summary.verdict.tolerance}};
  }
  return {{"gamma", gamma}, {"wiener", wiener}, {"atoms", atoms}, {"verdict", verdict}};
}

}  // namespace wwlab
