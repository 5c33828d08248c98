#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "experiment.hpp"
#include "json.hpp"
#include "robdet/errors.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  long long seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
  cmd->add_option("--seed", args.seed, "random seed (overrides config)");
}

int run(const CommonArgs& args, const std::string& forced_experiment) {
  std::ifstream in(args.config_path);
  std::stringstream buf;
  buf << in.rdbuf();

  robdet::cli::ParseResult parsed = robdet::cli::validate_config(buf.str());
  if (!parsed.ok()) {
    for (const auto& err : parsed.errors)
      std::cerr << args.config_path << ": " << err.where << ": " << err.message << "\n";
    return 2;
  }
  robdet::cli::ExperimentConfig config = *parsed.config;
  if (!forced_experiment.empty()) config.experiment = forced_experiment;
  if (config.experiment.empty()) {
    std::cerr << args.config_path << ": experiment: required (or use a dedicated subcommand)\n";
    return 2;
  }
  if (!args.out_dir.empty()) config.output_dir = args.out_dir;
  if (args.seed >= 0) config.seed = static_cast<std::uint64_t>(args.seed);

  try {
    const robdet::cli::RunOutcome outcome = robdet::cli::run_experiment(config);
    std::cout << outcome.message << "\n";
    return outcome.exit_code;
  } catch (const robdet::Error& e) {
    nlohmann::json record{{"error", {{"kind", "numerical_or_infeasible"}, {"message", e.what()},
                                     {"experiment", config.experiment}}}};
    std::cerr << record.dump() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimax robust detection toolkit: least favorable distributions, robust "
               "likelihood-ratio tests, and their evaluation"};
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* description;
    const char* experiment;  // empty: taken from the config
  };
  const Sub subs[] = {
      {"lfd", "Solve the LFDs and write density data (lfd.csv)", "lfd-plot"},
      {"limits", "Maximum robustness radii curves (limits.csv, h_limits.csv)", "limit-curves"},
      {"rate", "Large-deviation rate curves (rates.csv)", "rate-curves"},
      {"fss", "Fixed-sample-size error sweep (fss.csv)", "fss-sweep"},
      {"sprt", "Sequential test threshold scan (sprt.csv)", "sprt-scan"},
      {"experiment", "Run the experiment named in the config", ""},
  };

  CommonArgs args[6];
  for (std::size_t i = 0; i < 6; ++i) {
    CLI::App* cmd = app.add_subcommand(subs[i].name, subs[i].description);
    add_common(cmd, args[i]);
    cmd->callback([&, i] { std::exit(run(args[i], subs[i].experiment)); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // flag/usage problems are exit 2; --help is 0
  }
  return 0;
}
