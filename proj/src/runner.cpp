#include "wwlab/runner.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

#include "wwlab/analysis.hpp"
#include "wwlab/spectral.hpp"

namespace wwlab {
namespace {

std::filesystem::path prepare_dir(const ExperimentConfig& config) {
  std::filesystem::create_directories(config.output_dir);
  return config.output_dir;
}

std::filesystem::path write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("failed writing " + path.string());
  return path;
}

std::filesystem::path write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  return write_text(path, j.dump(2) + "\n");
}

void write_manifest(const ExperimentConfig& config, const std::string& command, RunResult& result) {
  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& f : result.files) outputs.push_back(f.filename().string());
  const nlohmann::json manifest{{"command", command},
                                {"config", config.canonical},
                                {"config_digest", config_digest(config)},
                                {"outputs", outputs},
                                {"seed", config.run.seed},
                                {"summation", "pairwise-256"},
                                {"threads", config.run.threads},
                                {"verdict", result.verdict}};
  result.files.push_back(write_json(config.output_dir / "manifest.json", manifest));
}

Complex unit_random(std::mt19937_64& rng) { return unit_phase(uniform01(rng)); }

}  // namespace

void apply_overrides(ExperimentConfig& config, const RunOptions& options) {
  if (options.out_dir) config.output_dir = *options.out_dir;
  if (options.seed) config.run.seed = *options.seed;
  if (options.threads) {
    if (*options.threads < 1) throw MalformedSpec("--threads must be >= 1");
    config.run.threads = *options.threads;
  }
}

DynamicalSystem resolve_system(const ExperimentConfig& config) {
  if (!config.system) throw ConfigError("missing section [system]");
  SystemSpec spec = *config.system;
  for (std::size_t i = 0; i < spec.parts.size(); ++i)
    if (i < config.boole_inherits_seed.size() && config.boole_inherits_seed[i])
      std::get<BooleMap>(spec.parts[i].kind).seed = config.run.seed;
  return build_system(spec);
}

const Observable& require_observable(const ExperimentConfig& config) {
  if (!config.observable) throw ConfigError("missing section [observable]");
  return *config.observable;
}

std::vector<WeightSequence> resolve_weights(const ExperimentConfig& config, const DynamicalSystem& sys,
                                            const Observable& f) {
  if (!config.weights) return {WeightSequence::constant()};
  const WeightsSection& ws = *config.weights;
  std::vector<WeightSequence> out;
  if (ws.grid > 0) out = character_grid(ws.grid);
  for (double theta : ws.extra_theta) out.push_back(WeightSequence::character(theta));
  if (ws.resonant) {
    const auto* rotation = sys.parts().size() == 1 ? std::get_if<CircleRotation>(&sys.part(0).kind()) : nullptr;
    const auto* character = std::get_if<CharacterObs>(&f.expr);
    if (!rotation || !character)
      throw MalformedSpec("[weights] resonant needs a rotation system and a character observable");
    out.push_back(WeightSequence::character(phase_of_multiple(-character->frequency, rotation->alpha)));
  }
  out.insert(out.end(), ws.named.begin(), ws.named.end());
  if (out.empty()) throw MalformedSpec("[weights] defines no weights");
  return out;
}

CheckpointSchedule resolve_schedule(const RunSection& run) {
  if (run.schedule == "arithmetic") return CheckpointSchedule::arithmetic(run.step, run.n_max);
  if (run.schedule == "explicit") return CheckpointSchedule::explicit_list(run.checkpoints);
  return CheckpointSchedule::dyadic(run.n_max);
}

std::vector<SampleCell> select_points(const DynamicalSystem& sys, const RunSection& run) {
  const std::vector<SampleCell> cells = sys.cells();
  if (run.selection == "all") return cells;
  std::vector<SampleCell> out;
  if (run.selection == "list") {
    for (std::size_t id : run.point_ids) out.push_back(sys.cell_by_id(id));
    return out;
  }
  const std::size_t total = cells.size();
  if (run.points > total)
    throw MalformedSpec("[run] points=" + std::to_string(run.points) + " exceeds the " + std::to_string(total) +
                        " available cells");
  if (run.selection == "stride") {
    for (std::size_t j = 0; j < run.points; ++j) out.push_back(cells[j * total / run.points]);
    return out;
  }
  std::mt19937_64 rng(run.seed);
  std::vector<std::size_t> ids(total);
  std::iota(ids.begin(), ids.end(), 0);
  for (std::size_t j = 0; j < run.points; ++j) {
    const auto pick = static_cast<std::size_t>(uniform_int(rng, static_cast<std::int64_t>(j),
                                                           static_cast<std::int64_t>(total - 1)));
    std::swap(ids[j], ids[pick]);
  }
  ids.resize(run.points);
  std::sort(ids.begin(), ids.end());
  for (std::size_t id : ids) out.push_back(cells[id]);
  return out;
}

nlohmann::json spectral_json(const ExperimentConfig& config) {
  if (!config.spectral) throw ConfigError("missing section [spectral]");
  const SpectralSection& sp = *config.spectral;
  const DynamicalSystem sys = resolve_system(config);
  const Observable& f = require_observable(config);
  validate(sys, f);

  CorrelationSequence gamma;
  if (sp.mode == "ergodic") {
    std::vector<SampleCell> base;
    for (std::size_t id : sp.base_points) base.push_back(sys.cell_by_id(id));
    gamma = correlation_ergodic(sys, base, f, sp.l_max, sp.orbit_n);
  } else {
    gamma = correlation(sys, f, sp.l_max);
  }
  std::vector<double> thetas;
  for (std::int64_t j = 0; j < sp.theta_grid; ++j)
    thetas.push_back(static_cast<double>(j) / static_cast<double>(sp.theta_grid));
  thetas.insert(thetas.end(), sp.extra_theta.begin(), sp.extra_theta.end());

  nlohmann::json out;
  if (sp.pd_trials > 0) {
    const double min_form = positive_definite_check(gamma, sp.pd_m, sp.pd_trials, config.run.seed);
    out["positive_definite"] = {{"m", sp.pd_m}, {"min_form", min_form}, {"trials", sp.pd_trials}};
  }
  const SpectralSummary summary = summarize(std::move(gamma), sp.wiener_m, thetas, sp.atom_n, sp.threshold);
  out.update(to_json(summary));
  out["mode"] = sp.mode;
  return out;
}

nlohmann::json egorov_json(const ExperimentConfig& config) {
  if (!config.egorov) throw ConfigError("missing section [egorov]");
  const DynamicalSystem sys = resolve_system(config);
  const Observable& f = require_observable(config);
  validate(sys, f);
  const auto weights = resolve_weights(config, sys, f);
  const CheckpointSchedule schedule = resolve_schedule(config.run);
  const auto points = select_points(sys, config.run);
  const std::int64_t N = config.egorov->N.value_or(schedule.points().front());
  const AuWwReport report = au_ww_report(sys, f, weights, config.egorov->epsilon, config.egorov->delta, schedule,
                                         points, N, config.run.threads);
  return to_json(report);
}

nlohmann::json vdc_json(const ExperimentConfig& config) {
  if (!config.vdc) throw ConfigError("missing section [vdc]");
  const VdcSection& v = *config.vdc;
  std::vector<VdcInput> inputs;
  if (v.mode == "random") {
    std::mt19937_64 rng(config.run.seed);
    for (int trial = 0; trial < v.trials; ++trial) {
      VdcInput in;
      const std::int64_t n = uniform_int(rng, 1, v.n_max);
      in.m = v.m >= 0 ? std::min(v.m, n - 1) : uniform_int(rng, 0, n - 1);
      in.values.resize(n, static_cast<Eigen::Index>(v.points));
      for (Eigen::Index p = 0; p < in.values.cols(); ++p)
        for (Eigen::Index k = 0; k < n; ++k) in.values(k, p) = unit_random(rng);
      in.masses = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(v.points), 1.0 / static_cast<double>(v.points));
      inputs.push_back(std::move(in));
    }
  } else {
    const DynamicalSystem sys = resolve_system(config);
    const Observable& f = require_observable(config);
    require_integrable(sys, f);
    const auto weights = resolve_weights(config, sys, f);
    const auto points = select_points(sys, config.run);
    for (const WeightSequence& w : weights) {
      VdcInput in;
      const std::int64_t n = v.n_max;
      in.m = v.m >= 0 ? v.m : n / 16;
      in.values.resize(n, static_cast<Eigen::Index>(points.size()));
      in.masses.resize(static_cast<Eigen::Index>(points.size()));
      for (std::size_t p = 0; p < points.size(); ++p) {
        const auto col = static_cast<Eigen::Index>(p);
        in.masses[col] = sys.mass_of(points[p]);
        for_each_orbit_value(sys, sys.state_of(points[p]), f, n,
                             [&](std::int64_t k, Complex value) { in.values(k, col) = weight_at(w, k) * value; });
      }
      inputs.push_back(std::move(in));
    }
  }
  if (v.zero_case) {
    VdcInput zero;
    zero.m = 0;
    zero.values = Eigen::MatrixXcd::Zero(1, static_cast<Eigen::Index>(v.points));
    zero.masses = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(v.points), 1.0);
    inputs.push_back(std::move(zero));
  }

  nlohmann::json cases = nlohmann::json::array();
  int violations = 0, degenerate = 0;
  for (const VdcInput& in : inputs) {
    const VdcResult r = vdc_check(in);
    violations += r.verdict == VdcVerdict::Violation;
    degenerate += r.verdict == VdcVerdict::DegenerateEquality;
    cases.push_back({{"n", in.n()}, {"m", in.m}, {"lhs", r.bound.lhs}, {"rhs", r.bound.rhs},
                     {"verdict", to_string(r.verdict)}});
  }
  return {{"cases", cases},
          {"degenerate", degenerate},
          {"violations", violations},
          {"verdict", violations == 0 ? "Hold" : "VIOLATION"}};
}

nlohmann::json maximal_json(const ExperimentConfig& config) {
  if (!config.maximal) throw ConfigError("missing section [maximal]");
  const MaximalSection& mx = *config.maximal;
  nlohmann::json cases = nlohmann::json::array();
  bool all_ok = true;
  auto record = [&](std::size_t states, int p, double t, std::int64_t n_max, const MaximalResult& r) {
    all_ok = all_ok && r.ok;
    cases.push_back({{"states", states}, {"p", p}, {"t", t}, {"n_max", n_max}, {"exceedance", r.exceedance_mass},
                     {"bound", r.bound}, {"ok", r.ok}});
  };
  if (mx.mode == "system") {
    const DynamicalSystem sys = resolve_system(config);
    const Observable& g = require_observable(config);
    for (int p : mx.p)
      for (double t : mx.t)
        for (std::int64_t n : mx.n_max) record(sys.cell_count(), p, t, n, maximal_check(sys, g, p, t, n));
  } else {
    std::mt19937_64 rng(config.run.seed);
    for (int c = 0; c < mx.cases; ++c) {
      const auto states = static_cast<std::size_t>(uniform_int(rng, 1, static_cast<std::int64_t>(mx.max_states)));
      FinitePermutation perm;
      perm.perm.resize(states);
      std::iota(perm.perm.begin(), perm.perm.end(), 0);
      for (std::size_t i = states; i-- > 1;)
        std::swap(perm.perm[i], perm.perm[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(i)))]);
      // One random mass per cycle, normalized to a probability measure.
      perm.masses = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(states));
      for (std::size_t i = 0; i < states; ++i) {
        if (perm.masses[static_cast<Eigen::Index>(i)] != 0.0) continue;
        const double mass = uniform(rng, 0.5, 1.5);
        for (std::size_t j = i; perm.masses[static_cast<Eigen::Index>(j)] == 0.0; j = perm.perm[j])
          perm.masses[static_cast<Eigen::Index>(j)] = mass;
      }
      perm.masses /= perm.masses.sum();
      Eigen::VectorXcd g(static_cast<Eigen::Index>(states));
      for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = uniform01(rng);
      const int p = mx.p[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(mx.p.size()) - 1))];
      const double t = mx.t[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(mx.t.size()) - 1))];
      const DynamicalSystem sys = build_system(SystemSpec::single(std::move(perm)));
      const Observable obs = Observable::tabulated(std::move(g));
      for (std::int64_t n : mx.n_max) record(states, p, t, n, maximal_check(sys, obs, p, t, n));
    }
  }
  return {{"cases", cases}, {"verdict", all_ok ? "Pass" : "Fail"}};
}

RunResult run_simulate(ExperimentConfig config, const RunOptions& options) {
  apply_overrides(config, options);
  const DynamicalSystem sys = resolve_system(config);
  const Observable& f = require_observable(config);
  validate(sys, f);
  const auto weights = resolve_weights(config, sys, f);
  const CheckpointSchedule schedule = resolve_schedule(config.run);
  const auto points = select_points(sys, config.run);
  const AverageTable table = average_table(sys, points, f, weights, schedule, config.run.threads);

  RunResult result;
  const auto dir = prepare_dir(config);
  std::ofstream csv(dir / "averages.csv", std::ios::binary | std::ios::trunc);
  if (!csv) throw ConfigError("cannot write " + (dir / "averages.csv").string());
  write_csv(table, csv);
  csv.close();
  result.files.push_back(dir / "averages.csv");
  result.verdict = "Done";
  write_manifest(config, "simulate", result);
  return result;
}

namespace {

RunResult finish_json(const ExperimentConfig& config, const std::string& command, const std::string& file,
                      const nlohmann::json& j) {
  RunResult result;
  const auto dir = prepare_dir(config);
  result.files.push_back(write_json(dir / file, j));
  if (j.contains("verdict") && j["verdict"].is_string()) {
    result.verdict = j["verdict"].get<std::string>();
  } else if (j.contains("verdict")) {
    result.verdict = j["verdict"]["kind"].get<std::string>();
  }
  if (result.verdict == "Fail") result.exit_code = kExitFail;
  if (result.verdict == "VIOLATION") result.exit_code = kExitViolation;
  write_manifest(config, command, result);
  return result;
}

}  // namespace

RunResult run_spectral(ExperimentConfig config, const RunOptions& options) {
  apply_overrides(config, options);
  return finish_json(config, "spectral", "spectral.json", spectral_json(config));
}

RunResult run_egorov(ExperimentConfig config, const RunOptions& options) {
  apply_overrides(config, options);
  return finish_json(config, "egorov", "egorov.json", egorov_json(config));
}

RunResult run_vdc(ExperimentConfig config, const RunOptions& options) {
  apply_overrides(config, options);
  return finish_json(config, "vdc", "vdc.json", vdc_json(config));
}

RunResult run_maximal(ExperimentConfig config, const RunOptions& options) {
  apply_overrides(config, options);
  return finish_json(config, "maximal", "maximal.json", maximal_json(config));
}

RunResult run_command(const std::string& command, ExperimentConfig config, const RunOptions& options) {
  if (command == "simulate") return run_simulate(std::move(config), options);
  if (command == "spectral") return run_spectral(std::move(config), options);
  if (command == "egorov") return run_egorov(std::move(config), options);
  if (command == "vdc") return run_vdc(std::move(config), options);
  if (command == "maximal") return run_maximal(std::move(config), options);
  throw ConfigError("unknown command '" + command + "'");
}

}  // namespace wwlab
