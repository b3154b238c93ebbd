#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "wwlab/numeric.hpp"
#include "wwlab/observable.hpp"
#include "wwlab/system.hpp"
#include "wwlab/weights.hpp"

namespace wwlab {

/// Strictly increasing list of averaging lengths n at which M_n is emitted.
class CheckpointSchedule {
 public:
  /// n = 2, 4, 8, ... <= n_max.
  static CheckpointSchedule dyadic(std::int64_t n_max);
  /// n = step, 2 step, ... <= n_max.
  static CheckpointSchedule arithmetic(std::int64_t step, std::int64_t n_max);
  static CheckpointSchedule explicit_list(std::vector<std::int64_t> points);

  const std::vector<std::int64_t>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  std::int64_t n_max() const { return points_.empty() ? 0 : points_.back(); }
  /// Index of checkpoint n, or -1.
  std::ptrdiff_t index_of(std::int64_t n) const;

 private:
  explicit CheckpointSchedule(std::vector<std::int64_t> points);
  std::vector<std::int64_t> points_;
};

struct AverageSample {
  std::int64_t n = 0;
  Complex value;
};

/// M_n(T, b)(f)(w) = (1/n) sum_{k<n} b_k f(T^k w) at every checkpoint, from a
/// single orbit pass with pairwise summation.
std::vector<AverageSample> prefix_averages(const DynamicalSystem& sys, const StatePoint& start, const Observable& f,
                                           const WeightSequence& w, const CheckpointSchedule& schedule);

/// M_n(T)(|f|)(w) at every checkpoint.
std::vector<double> modulus_averages(const DynamicalSystem& sys, const StatePoint& start, const Observable& f,
                                     const CheckpointSchedule& schedule);

/// Averages for every (point, weight, checkpoint) triple.
class AverageTable {
 public:
  AverageTable() = default;
  AverageTable(std::vector<SampleCell> points, std::vector<double> masses, std::vector<WeightSequence> weights,
               std::vector<std::int64_t> checkpoints);

  std::size_t point_count() const { return points_.size(); }
  std::size_t weight_count() const { return weights_.size(); }
  std::size_t checkpoint_count() const { return checkpoints_.size(); }

  const std::vector<SampleCell>& points() const { return points_; }
  const std::vector<double>& masses() const { return masses_; }
  const std::vector<WeightSequence>& weights() const { return weights_; }
  const std::vector<std::int64_t>& checkpoints() const { return checkpoints_; }

  Complex at(std::size_t point, std::size_t weight, std::size_t checkpoint) const {
    return values_(row(point, weight), static_cast<Eigen::Index>(checkpoint));
  }
  Complex& at(std::size_t point, std::size_t weight, std::size_t checkpoint) {
    return values_(row(point, weight), static_cast<Eigen::Index>(checkpoint));
  }
  /// Checkpoint series of one (point, weight) cell.
  std::vector<AverageSample> series(std::size_t point, std::size_t weight) const;

  std::string system_digest;
  std::string observable;
  std::string summation = "pairwise-256";

 private:
  Eigen::Index row(std::size_t point, std::size_t weight) const {
    return static_cast<Eigen::Index>(point * weights_.size() + weight);
  }

  std::vector<SampleCell> points_;
  std::vector<double> masses_;
  std::vector<WeightSequence> weights_;
  std::vector<std::int64_t> checkpoints_;
  Eigen::MatrixXcd values_;
};

/// Fills an AverageTable. Points are distributed over `threads` workers; each
/// cell is summed in a fixed order, so the result does not depend on the
/// thread count.
AverageTable average_table(const DynamicalSystem& sys, const std::vector<SampleCell>& points, const Observable& f,
                           const std::vector<WeightSequence>& weights, const CheckpointSchedule& schedule,
                           int threads = 1);

/// CSV with columns weight_id,theta_or_kind,point_id,n,re,im.
void write_csv(const AverageTable& table, std::ostream& out);

/// Closed form of M_n(T, lambda)(f)(w) for the rotation by alpha,
/// f = e^{2 pi i k_f x} and lambda = e^{2 pi i theta}:
///     e^{2 pi i k_f w} (1/n) (q^n - 1)/(q - 1),  q = e^{2 pi i (theta + k_f alpha)},
/// and e^{2 pi i k_f w} when |q - 1| <= 1e-14.
Complex character_closed_form(double alpha, double theta, double omega, std::int64_t k_f, std::int64_t n);

}  // namespace wwlab
