#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nlt/experiments.hpp"

namespace {

struct Args {
  std::string config;
  std::string out;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Args& a) {
  cmd->add_option("--config", a.config, "experiment config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", a.out, "output directory (overrides output.dir)");
  cmd->add_option("--jobs", a.jobs, "parallel runs for sweeps")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", a.seed, "seed for random_bv initial data");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal traffic flow experiments"};
  app.set_version_flag("--version", nlt::kVersion);
  app.require_subcommand(1);

  Args args;
  const std::pair<const char*, nlt::ExperimentKind> commands[] = {
      {"run", nlt::ExperimentKind::run},
      {"sweep", nlt::ExperimentKind::sweep},
      {"compare", nlt::ExperimentKind::compare},
      {"check", nlt::ExperimentKind::check},
  };
  const char* help[] = {
      "solve the nonlocal law once and write every snapshot",
      "epsilon sweep against the local Godunov reference",
      "nonlocal, local and relaxation solutions side by side",
      "check the speed law and relaxation-frame conditions",
  };
  std::vector<CLI::App*> subs;
  for (std::size_t k = 0; k < 4; ++k) {
    subs.push_back(app.add_subcommand(commands[k].first, help[k]));
    add_common(subs.back(), args);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  nlt::ExperimentKind kind = nlt::ExperimentKind::run;
  for (std::size_t k = 0; k < 4; ++k)
    if (subs[k]->parsed()) kind = commands[k].second;

  nlt::ExperimentConfig config;
  try {
    config = nlt::load_config(args.config, kind);
  } catch (const nlt::Error& e) {
    const nlohmann::json record = {{"error", {{"code", std::string(nlt::to_string(e.code()))}, {"message", e.what()}}},
                                   {"exit_code", nlt::exit_code_for(e)}};
    std::cerr << record.dump() << '\n';
    return nlt::exit_code_for(e);
  }

  nlt::RunOptions options;
  options.jobs = args.jobs;
  options.seed = args.seed;
  if (!args.out.empty()) options.out_dir = args.out;
  const auto outcome = nlt::run_experiment(config, options);
  for (const auto& f : outcome.files) std::cout << f << '\n';
  if (outcome.exit_code != 0) std::cerr << "experiment finished with exit code " << outcome.exit_code << '\n';
  return outcome.exit_code;
}
