#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "wwlab/averages.hpp"
#include "wwlab/observable.hpp"
#include "wwlab/system.hpp"
#include "wwlab/weights.hpp"

namespace wwlab {

/// Sequences f_0..f_{n-1}, each a complex vector over a common set of sample
/// points (one column per point). Lags past n - 1 read as zero.
struct VdcInput {
  std::int64_t m = 0;
  Eigen::MatrixXcd values;  ///< n x points
  Eigen::VectorXd masses;   ///< one per point; the sup norm ignores them

  std::int64_t n() const { return values.rows(); }
};

struct VdcBound {
  double lhs = 0.0;  ///< ||(1/n) sum f_k||_inf^2
  double rhs = 0.0;  ///< 2/(m+1) ||(1/n) sum |f_k|^2||_inf + 4/(m+1) sum_l ||(1/n) sum conj(f_k) f_{k+l}||_inf
};

VdcBound vdc_bound(const VdcInput& input);

enum class VdcVerdict { StrictHold, DegenerateEquality, Violation };
const char* to_string(VdcVerdict v);

struct VdcResult {
  VdcVerdict verdict = VdcVerdict::StrictHold;
  VdcBound bound;
};

/// StrictHold when lhs < rhs; DegenerateEquality when rhs <= 1e-15; anything
/// else is an internal-consistency alarm.
VdcResult vdc_check(const VdcInput& input);

struct MaximalResult {
  double exceedance_mass = 0.0;  ///< mu{ max_{n <= N_max} M_n(T)(|g|) > t }
  double bound = 0.0;            ///< (2 ||g||_p / t)^p
  bool ok = true;
};

/// Maximal ergodic inequality with the supremum truncated at n_max.
/// Every part must be a finite permutation.
MaximalResult maximal_check(const DynamicalSystem& sys, const Observable& g, int p, double t, std::int64_t n_max);

/// max over checkpoint pairs m, n >= N of |M_m - M_n|.
double cauchy_deviation(const std::vector<AverageSample>& samples, std::int64_t N);

struct WeightConvergence {
  std::size_t weight_id = 0;
  std::int64_t n_lambda = 0;  ///< stabilization index N(lambda) on the retained set
  double deviation = 0.0;     ///< max retained Cauchy deviation from the report's N
};

struct ConvergenceReport {
  double epsilon = 0.0;  ///< target exceptional mass (achieved mass when no target is given)
  double delta = 0.0;
  std::int64_t N = 0;
  std::vector<std::pair<std::size_t, double>> removed;  ///< (point id, mass), in removal order
  double removed_mass = 0.0;
  double retained_mass = 0.0;
  std::vector<std::size_t> retained;  ///< point ids
  std::vector<WeightConvergence> per_weight;
  bool total_removal = false;
  bool pass = true;
};

/// Greedy exceptional-set search: points are scored by their worst Cauchy
/// deviation from N over all weights and removed in decreasing score order
/// (ties by ascending id) until every retained score is <= delta. The retained
/// set is shared by all weights.
ConvergenceReport egorov_estimate(const AverageTable& table, const std::vector<double>& masses, double delta,
                                  std::int64_t N);

/// Per-weight max Cauchy deviation from N over the given table rows.
std::vector<double> weight_deviations(const AverageTable& table, const std::vector<std::size_t>& rows, std::int64_t N);

struct PartReport {
  std::size_t part = 0;
  std::string name;
  HopfTag hopf = HopfTag::FinitePart;
  ConvergenceReport report;
};

struct AuWwReport {
  ConvergenceReport overall;
  /// Filled for disjoint unions; each part is held to epsilon / #parts.
  std::vector<PartReport> parts;
  bool pass = true;
};

/// Average table over `points`, then egorov_estimate; Pass iff the removed
/// mass is at most epsilon.
AuWwReport au_ww_report(const DynamicalSystem& sys, const Observable& f, const std::vector<WeightSequence>& weights,
                        double epsilon, double delta, const CheckpointSchedule& schedule,
                        const std::vector<SampleCell>& points, std::int64_t N, int threads = 1);

/// Same report from an existing table.
AuWwReport au_ww_report(const DynamicalSystem& sys, const AverageTable& table, double epsilon, double delta,
                        std::int64_t N);

nlohmann::json to_json(const ConvergenceReport& report);
nlohmann::json to_json(const AuWwReport& report);

}  // namespace wwlab
