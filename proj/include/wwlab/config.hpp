#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "wwlab/observable.hpp"
#include "wwlab/system.hpp"
#include "wwlab/weights.hpp"

namespace wwlab {

struct RunSection {
  std::int64_t n_max = 1024;
  std::string schedule = "dyadic";  ///< dyadic | arithmetic | explicit
  std::int64_t step = 0;
  std::vector<std::int64_t> checkpoints;
  std::size_t points = 8;
  std::string selection = "stride";  ///< stride | random | all | list
  std::vector<std::size_t> point_ids;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct WeightsSection {
  std::int64_t grid = 0;  ///< character_grid(L) when > 0
  std::vector<double> extra_theta;
  /// Adds theta = frac(-k alpha): the weight that resonates with Character(k) on a rotation.
  bool resonant = false;
  std::vector<WeightSequence> named;
};

struct EgorovSection {
  double epsilon = 0.05;
  double delta = 0.02;
  std::optional<std::int64_t> N;
};

struct SpectralSection {
  std::string mode = "exact";  ///< exact | ergodic
  std::int64_t l_max = 16;
  std::vector<std::size_t> base_points;
  std::int64_t orbit_n = 0;
  std::int64_t atom_n = 0;  ///< defaults to l_max
  std::int64_t theta_grid = 0;
  std::vector<double> extra_theta;
  std::vector<std::int64_t> wiener_m;
  double threshold = 1e-10;
  int pd_trials = 0;
  std::int64_t pd_m = 0;
};

struct VdcSection {
  std::string mode = "random";  ///< random | orbit
  int trials = 200;
  std::int64_t n_max = 256;
  std::int64_t m = -1;  ///< random per trial when negative
  std::size_t points = 8;
  bool zero_case = true;
};

struct MaximalSection {
  std::string mode = "random";  ///< random | system
  int cases = 100;
  std::size_t max_states = 64;
  std::vector<int> p{1, 2};
  std::vector<double> t{0.25, 0.5, 1.0};
  std::vector<std::int64_t> n_max{8, 64, 512};
};

struct ExperimentConfig {
  /// Every section and key as written (trimmed), sorted; the manifest digest is taken over this.
  nlohmann::json canonical;
  std::optional<SystemSpec> system;
  /// Per system part: a Boole part without its own seed takes the run seed.
  std::vector<bool> boole_inherits_seed;
  std::optional<Observable> observable;
  std::optional<WeightsSection> weights;
  RunSection run;
  std::optional<EgorovSection> egorov;
  std::optional<SpectralSection> spectral;
  std::optional<VdcSection> vdc;
  std::optional<MaximalSection> maximal;
  std::filesystem::path output_dir = ".";
};

/// INI text with sections. Unknown sections or keys raise ConfigError; out-of-range values raise MalformedSpec.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Lower-case hex SHA-256 of the canonical JSON dump.
std::string config_digest(const ExperimentConfig& config);

}  // namespace wwlab
