#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "wwlab/config.hpp"
#include "wwlab/errors.hpp"
#include "wwlab/runner.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 0;
};

void add_flags(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--config", flags.config, "experiment configuration (INI)")->required();
  cmd->add_option("--out", flags.out, "output directory, overrides [output] directory");
  cmd->add_option("--seed", flags.seed, "RNG seed, overrides [run] seed");
  cmd->add_option("--threads", flags.threads, "worker threads, overrides [run] threads");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted ergodic average laboratory"};
  app.require_subcommand(1);
  Flags flags;
  const char* commands[][2] = {{"simulate", "prefix averages table (averages.csv)"},
                               {"spectral", "correlation, Wiener statistic and atom scan (spectral.json)"},
                               {"egorov", "exceptional-set report (egorov.json)"},
                               {"vdc", "Van der Corput inequality checks (vdc.json)"},
                               {"maximal", "maximal inequality checks (maximal.json)"}};
  for (const auto& [name, help] : commands) add_flags(app.add_subcommand(name, help), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : wwlab::kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const CLI::App* sub = app.get_subcommands().front();
  wwlab::RunOptions options;
  if (sub->count("--out")) options.out_dir = flags.out;
  if (sub->count("--seed")) options.seed = flags.seed;
  if (sub->count("--threads")) options.threads = flags.threads;

  try {
    const wwlab::RunResult result = wwlab::run_command(command, wwlab::load_config(flags.config), options);
    std::cout << command << ": " << result.verdict << '\n';
    for (const auto& f : result.files) std::cout << "  wrote " << f.string() << '\n';
    return result.exit_code;
  } catch (const wwlab::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return wwlab::kExitConfig;
  } catch (const wwlab::MalformedSpec& e) {
    std::cerr << e.what() << '\n';
    return wwlab::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return wwlab::kExitFail;
  }
}
