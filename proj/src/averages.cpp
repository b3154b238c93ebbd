#include "wwlab/averages.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

namespace wwlab {
namespace {

// x mod 2 in [0, 2).
double mod2(double x) {
  double r = x - 2.0 * std::floor(0.5 * x);
  return r >= 2.0 ? 0.0 : r;
}

// n * (hi + lo) mod 2, using the exact two-product for n * hi.
double mod2_multiple(std::int64_t n, double hi, double lo) {
  const double nd = static_cast<double>(n);
  const double p = nd * hi;
  const double err = std::fma(nd, hi, -p);
  return mod2(mod2(p) + err + nd * lo);
}

// sin(pi t) with t reduced mod 2 first.
double sin_pi(double t) {
  double r = mod2(t);
  if (r >= 1.0) r -= 2.0;
  return std::sin(std::numbers::pi * r);
}

struct PointJob {
  const DynamicalSystem* sys;
  const Observable* f;
  const std::vector<WeightSequence>* weights;
  const std::vector<std::int64_t>* checkpoints;
};

// Runs one orbit and writes every weight's averages for that point.
void fill_point(const PointJob& job, const StatePoint& start, std::size_t point, AverageTable& table) {
  const auto& weights = *job.weights;
  const auto& checkpoints = *job.checkpoints;
  if (checkpoints.empty() || weights.empty()) return;
  std::vector<PairwiseSum<Complex>> acc(weights.size());
  std::size_t next = 0;
  const std::int64_t n_max = checkpoints.back();
  for_each_orbit_value(*job.sys, start, *job.f, n_max, [&](std::int64_t k, Complex value) {
    for (std::size_t w = 0; w < weights.size(); ++w)
      acc[w].add(value == Complex(0.0) ? Complex(0.0) : weight_at(weights[w], k) * value);
    if (k + 1 == checkpoints[next]) {
      const double n = static_cast<double>(checkpoints[next]);
      for (std::size_t w = 0; w < weights.size(); ++w) table.at(point, w, next) = acc[w].total() / n;
      ++next;
    }
  });
}

}  // namespace

CheckpointSchedule::CheckpointSchedule(std::vector<std::int64_t> points) : points_(std::move(points)) {
  if (points_.empty()) throw MalformedSpec("checkpoint schedule is empty");
  if (points_.front() < 1) throw MalformedSpec("checkpoints must be >= 1");
  for (std::size_t i = 1; i < points_.size(); ++i)
    if (points_[i] <= points_[i - 1]) throw MalformedSpec("checkpoints must be strictly increasing");
}

CheckpointSchedule CheckpointSchedule::dyadic(std::int64_t n_max) {
  if (n_max < 2) throw MalformedSpec("dyadic schedule needs n_max >= 2");
  std::vector<std::int64_t> pts;
  for (std::int64_t n = 2; n <= n_max; n *= 2) pts.push_back(n);
  return CheckpointSchedule(std::move(pts));
}

CheckpointSchedule CheckpointSchedule::arithmetic(std::int64_t step, std::int64_t n_max) {
  if (step < 1) throw MalformedSpec("arithmetic schedule needs step >= 1");
  if (n_max < step) throw MalformedSpec("arithmetic schedule needs n_max >= step");
  std::vector<std::int64_t> pts;
  for (std::int64_t n = step; n <= n_max; n += step) pts.push_back(n);
  return CheckpointSchedule(std::move(pts));
}

CheckpointSchedule CheckpointSchedule::explicit_list(std::vector<std::int64_t> points) {
  return CheckpointSchedule(std::move(points));
}

std::ptrdiff_t CheckpointSchedule::index_of(std::int64_t n) const {
  auto it = std::lower_bound(points_.begin(), points_.end(), n);
  if (it == points_.end() || *it != n) return -1;
  return it - points_.begin();
}

AverageTable::AverageTable(std::vector<SampleCell> points, std::vector<double> masses,
                           std::vector<WeightSequence> weights, std::vector<std::int64_t> checkpoints)
    : points_(std::move(points)),
      masses_(std::move(masses)),
      weights_(std::move(weights)),
      checkpoints_(std::move(checkpoints)),
      values_(Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(points_.size() * weights_.size()),
                                     static_cast<Eigen::Index>(checkpoints_.size()))) {
  if (masses_.size() != points_.size()) throw DimensionMismatch("one mass per point is required");
}

std::vector<AverageSample> AverageTable::series(std::size_t point, std::size_t weight) const {
  std::vector<AverageSample> out;
  out.reserve(checkpoints_.size());
  for (std::size_t c = 0; c < checkpoints_.size(); ++c) out.push_back({checkpoints_[c], at(point, weight, c)});
  return out;
}

std::vector<AverageSample> prefix_averages(const DynamicalSystem& sys, const StatePoint& start, const Observable& f,
                                           const WeightSequence& w, const CheckpointSchedule& schedule) {
  require_integrable(sys, f);
  const std::vector<WeightSequence> weights{w};
  AverageTable table({SampleCell{0, start.part, 0}}, {0.0}, weights, schedule.points());
  fill_point({&sys, &f, &weights, &schedule.points()}, start, 0, table);
  return table.series(0, 0);
}

std::vector<double> modulus_averages(const DynamicalSystem& sys, const StatePoint& start, const Observable& f,
                                     const CheckpointSchedule& schedule) {
  require_integrable(sys, f);
  const auto& checkpoints = schedule.points();
  std::vector<double> out;
  out.reserve(checkpoints.size());
  PairwiseSum<double> acc;
  std::size_t next = 0;
  for_each_orbit_value(sys, start, f, schedule.n_max(), [&](std::int64_t k, Complex value) {
    acc.add(std::abs(value));
    if (k + 1 == checkpoints[next]) {
      out.push_back(acc.total() / static_cast<double>(checkpoints[next]));
      ++next;
    }
  });
  return out;
}

AverageTable average_table(const DynamicalSystem& sys, const std::vector<SampleCell>& points, const Observable& f,
                           const std::vector<WeightSequence>& weights, const CheckpointSchedule& schedule,
                           int threads) {
  require_integrable(sys, f);
  std::vector<double> masses;
  masses.reserve(points.size());
  for (const SampleCell& cell : points) masses.push_back(sys.mass_of(cell));
  AverageTable table(points, std::move(masses), weights, schedule.points());
  table.system_digest = sys.describe();
  table.observable = describe(f);

  const PointJob job{&sys, &f, &weights, &schedule.points()};
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), points.size()));
  if (workers == 1) {
    for (std::size_t p = 0; p < points.size(); ++p) fill_point(job, sys.state_of(points[p]), p, table);
    return table;
  }
  std::exception_ptr failure;
  std::mutex failure_lock;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t p = t; p < points.size(); p += workers) fill_point(job, sys.state_of(points[p]), p, table);
      } catch (...) {
        std::lock_guard lock(failure_lock);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return table;
}

void write_csv(const AverageTable& table, std::ostream& out) {
  out << "weight_id,theta_or_kind,point_id,n,re,im\n";
  char buf[128];
  for (std::size_t w = 0; w < table.weight_count(); ++w) {
    const std::string label = weight_label(table.weights()[w]);
    for (std::size_t p = 0; p < table.point_count(); ++p) {
      for (std::size_t c = 0; c < table.checkpoint_count(); ++c) {
        const Complex v = table.at(p, w, c);
        std::snprintf(buf, sizeof buf, ",%zu,%lld,%.17g,%.17g\n", table.points()[p].id,
                      static_cast<long long>(table.checkpoints()[c]), v.real(), v.imag());
        out << w << ',' << label << buf;
      }
    }
  }
}

Complex character_closed_form(double alpha, double theta, double omega, std::int64_t k_f, std::int64_t n) {
  if (n < 1) throw MalformedSpec("closed form needs n >= 1");
  // psi = theta + k_f alpha mod 1, kept as hi + lo.
  const double kd = static_cast<double>(k_f);
  const double p = kd * alpha;
  const double p_err = std::fma(kd, alpha, -p);
  const double a = theta, b = p - std::floor(p);
  const double s = a + b;
  const double bb = s - a;
  const double s_err = (a - (s - bb)) + (b - bb);
  double psi_lo = p_err + s_err;
  double psi_hi = s + psi_lo;
  psi_lo -= psi_hi - s;
  psi_hi -= std::floor(psi_hi);

  const Complex prefactor = unit_phase(phase_of_multiple(k_f, omega));
  const double dist = std::min(psi_hi + psi_lo, 1.0 - psi_hi - psi_lo);
  if (2.0 * std::sin(std::numbers::pi * std::abs(dist)) <= 1e-14) return prefactor;
  // (q^n - 1)/(q - 1) = e^{i pi (n-1) psi} sin(pi n psi) / sin(pi psi).
  const double ratio = sin_pi(mod2_multiple(n, psi_hi, psi_lo)) / sin_pi(psi_hi + psi_lo);
  const Complex rotation = unit_phase(0.5 * mod2_multiple(n - 1, psi_hi, psi_lo));
  return prefactor * rotation * (ratio / static_cast<double>(n));
}

}  // namespace wwlab
