#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "focusfl/errors.hpp"
#include "focusfl/experiment.hpp"
#include "focusfl/io.hpp"

namespace focusfl {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitTheorem = 4;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

// Flags override config fields; config overrides built-in defaults.
ExperimentManifest resolve(const CommonFlags& flags) {
  ExperimentManifest m = flags.config.empty() ? ExperimentManifest{} : load_manifest(flags.config);
  if (flags.seed) m.scenario.seed = *flags.seed;
  if (flags.out) m.output_dir = *flags.out;
  m.validate();
  return m;
}

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config, "Flat JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", flags.seed, "Base seed (overrides config)");
  cmd->add_option("--out", flags.out, "Output directory (overrides config)");
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Soft-clustered federated learning simulator"};
  app.require_subcommand(1);

  CommonFlags synth_flags;
  auto* synth = app.add_subcommand("synth", "Write per-agent training CSVs and a manifest");
  add_common(synth, synth_flags);

  CommonFlags run_flags;
  std::string algo;
  std::optional<int> repetitions;
  auto* run = app.add_subcommand("run", "Train the selected algorithms and write logs and reports");
  add_common(run, run_flags);
  run->add_option("--algo", algo, "fedavg, focus, fedavg_hardcluster, a comma list, or all");
  run->add_option("--repetitions", repetitions, "Number of seeds (overrides config)");

  CommonFlags thm_flags;
  std::string which;
  auto* thm = app.add_subcommand("theorem-check", "Numerical checks of the convergence and fairness results");
  add_common(thm, thm_flags);
  thm->add_option("--which", which, "thm1 or thm3")->required()->check(CLI::IsMember({"thm1", "thm3"}));

  CommonFlags sweep_flags;
  std::string param;
  std::string values;
  std::string sweep_algo;
  std::optional<int> sweep_reps;
  auto* sweep = app.add_subcommand("sweep", "Repeat runs over a list of parameter values");
  add_common(sweep, sweep_flags);
  sweep->add_option("--param", param, "M, K, eta, E, r or R")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();
  sweep->add_option("--algo", sweep_algo, "Algorithms to run (default: config or all)");
  sweep->add_option("--repetitions", sweep_reps, "Number of seeds per value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*synth) {
      const ExperimentManifest m = resolve(synth_flags);
      const auto files = synthesize(m.scenario, m.output_dir);
      std::cout << "wrote " << files.size() << " agent files to " << m.output_dir.string() << "\n";
      return kExitOk;
    }
    if (*run) {
      ExperimentManifest m = resolve(run_flags);
      if (!algo.empty()) m.algorithms = parse_algorithm_list(algo);
      if (repetitions) m.repetitions = *repetitions;
      m.validate();
      const ExperimentResult result = run_experiment(m, true);
      std::cout << summary_csv_header();
      for (const auto& row : result.rows) std::cout << summary_csv_line(row);
      return kExitOk;
    }
    if (*thm) {
      const ExperimentManifest m = resolve(thm_flags);
      const TheoremVerdict v = which == "thm1" ? check_theorem1(m.scenario) : check_theorem3(m.scenario);
      std::cout << v.details.dump(2) << "\n";
      if (thm_flags.out) write_file_atomic(m.output_dir / ("theorem_" + which + ".json"), v.details.dump(2) + "\n");
      return v.pass ? kExitOk : kExitTheorem;
    }
    if (*sweep) {
      ExperimentManifest m = resolve(sweep_flags);
      if (!sweep_algo.empty()) m.algorithms = parse_algorithm_list(sweep_algo);
      if (sweep_reps) m.repetitions = *sweep_reps;
      m.validate();
      const SweepParam p = parse_sweep_param(param);
      const std::vector<double> vals = parse_sweep_values(values);
      const std::string csv = sweep_csv(run_sweep(m, p, vals));
      write_file_atomic(m.output_dir / ("sweep_" + std::string(to_string(p)) + ".csv"), csv);
      std::cout << csv;
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DivergenceError& e) {
    std::cerr << e.what() << " (round " << e.round() << ")\n";
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace focusfl
