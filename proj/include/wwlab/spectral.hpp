#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "wwlab/numeric.hpp"
#include "wwlab/observable.hpp"
#include "wwlab/system.hpp"

namespace wwlab {

enum class CorrelationProvenance { Exact, ErgodicEstimate };

/// gamma(l) = (f, U^l f) = int conj(f) f o T^l dmu for l = 0..l_max. Negative
/// lags are never stored: gamma(-l) = conj(gamma(l)).
struct CorrelationSequence {
  Eigen::VectorXcd values;
  CorrelationProvenance provenance = CorrelationProvenance::Exact;
  /// ErgodicEstimate only: orbit length, base points and the largest
  /// disagreement between base points over all lags.
  std::int64_t n = 0;
  std::vector<std::size_t> base_points;
  double spread = 0.0;

  std::int64_t l_max() const { return static_cast<std::int64_t>(values.size()) - 1; }
  /// gamma at any lag in [-l_max, l_max].
  Complex at(std::int64_t l) const;
};

/// Exact correlation on a single finite-measure part: weighted sum over finite
/// states, M-point quadrature on circle parts. The doubling map needs
/// M >= 2^{l_max+2} (QuadratureTooCoarse otherwise).
CorrelationSequence correlation(const DynamicalSystem& sys, const Observable& f, std::int64_t l_max);

/// Time averages mu(part) (1/n) sum_{k<n} conj(f(T^k w)) f(T^{k+l} w), averaged
/// over the base points.
CorrelationSequence correlation_ergodic(const DynamicalSystem& sys, const std::vector<SampleCell>& base_points,
                                        const Observable& f, std::int64_t l_max, std::int64_t n);

/// sum_{i,j=0}^{m} gamma(i-j) z_i conj(z_j) for one vector z of size m+1.
double hermitian_form(const CorrelationSequence& gamma, const Eigen::VectorXcd& z);

/// Minimum of the Hermitian Toeplitz form over `trials` random vectors z with
/// components uniform in the unit square, drawn from `seed`.
double positive_definite_check(const CorrelationSequence& gamma, std::int64_t m, int trials, std::uint64_t seed);

/// The (m+1) x (m+1) Hermitian Toeplitz matrix G_{ij} = gamma(i - j).
Eigen::MatrixXcd toeplitz_matrix(const CorrelationSequence& gamma, std::int64_t m);

/// W_m = (1/(m+1)) sum_{l=1}^m |gamma(l)|^2.
double wiener_statistic(const CorrelationSequence& gamma, std::int64_t m);

/// A_n(theta) = (1/n) sum_{l=1}^n gamma(l) e^{-2 pi i l theta}; the real part
/// estimates the atom mass sigma_f{e^{2 pi i theta}}.
std::vector<Complex> atom_scan(const CorrelationSequence& gamma, const std::vector<double>& thetas, std::int64_t n);

/// || (1/n) sum_{l=1}^n e^{2 pi i l theta} f o T^l ||_2 on a finite-measure part.
double twisted_mean_norm(const DynamicalSystem& sys, const Observable& f, double theta, std::int64_t n);

struct Eigenpair {
  double theta = 0.0;  ///< f o T = e^{2 pi i theta} f
  Observable function;
};

struct KroneckerModel {
  KroneckerLabel label = KroneckerLabel::Empty;
  std::vector<Eigenpair> eigenpairs;
};

/// Declared Kronecker model of a single-part system. Eigenfunctions: per-cycle
/// Fourier modes for permutations, characters |k| <= max_frequency for
/// rotations, constants for the doubling map.
KroneckerModel kronecker_model(const DynamicalSystem& sys, std::int64_t max_frequency = 4);

/// max over cells of |f(T x) - e^{2 pi i theta} f(x)|.
double eigen_residual(const DynamicalSystem& sys, const Eigenpair& pair);

struct KroneckerSplit {
  Observable kronecker;   ///< f_K
  Observable orthogonal;  ///< f_perp
  /// (f_K, f_perp), by the same quadrature as correlation().
  Complex inner_product;
};

/// f = f_K + f_perp with f_K in the closed span of the eigenfunctions.
KroneckerSplit kronecker_project(const DynamicalSystem& sys, const Observable& f);

/// (f, g) = int conj(f) g dmu over a finite-measure system.
Complex inner_product(const DynamicalSystem& sys, const Observable& f, const Observable& g);

struct SpectralVerdict {
  bool atoms_detected = false;
  std::vector<double> locations;
  double tolerance = 0.0;
};

struct SpectralSummary {
  CorrelationSequence gamma;
  std::vector<std::pair<std::int64_t, double>> wiener;
  std::vector<std::pair<double, Complex>> atoms;
  SpectralVerdict verdict;
};

/// Wiener statistics at every m, an atom scan of length atom_n over thetas,
/// and the verdict: AtomsDetected where Re A_n(theta) > threshold, else
/// ContinuousWithin threshold.
SpectralSummary summarize(CorrelationSequence gamma, const std::vector<std::int64_t>& wiener_ms,
                          const std::vector<double>& thetas, std::int64_t atom_n, double threshold);

nlohmann::json to_json(const SpectralSummary& summary);

}  // namespace wwlab
