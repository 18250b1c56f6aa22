#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "focusfl/errors.hpp"
#include "focusfl/experiment.hpp"
#include "focusfl/io.hpp"
#include "focusfl/parallel.hpp"

using namespace focusfl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "focusfl_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int cli(std::initializer_list<std::string> args) {
  std::vector<std::string> storage{"focus_fl"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

fs::path write_config(const fs::path& dir, const nlohmann::json& j) {
  const fs::path path = dir / "config.json";
  write_file_atomic(path, j.dump());
  return path;
}

nlohmann::json small_config() {
  return {{"dimension", 5}, {"samples_per_agent", 200}, {"rounds", 20}, {"eval_samples_per_agent", 2000}};
}

std::size_t data_lines(const fs::path& csv) {
  std::ifstream in(csv);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') ++n;
  }
  return n - 1;
}

}  // namespace

TEST_CASE("manifest parsing") {
  const ExperimentManifest defaults = manifest_from_json(nlohmann::json::object());
  CHECK(defaults.scenario == ScenarioConfig{});
  CHECK(defaults.algorithms.size() == 3);
  const auto resolved = to_json(defaults);
  for (const auto& key : scenario_field_names()) CHECK(resolved.contains(key));

  CHECK_THROWS_AS(manifest_from_json({{"num_agent", 10}}), ConfigError);
  CHECK_THROWS_AS(manifest_from_json({{"repetitions", 0}}), ConfigError);
  CHECK_THROWS_AS(manifest_from_json({{"learning_rate", "fast"}}), ConfigError);
  CHECK_THROWS_AS(manifest_from_json({{"algorithms", {"fedprox"}}}), ConfigError);
  CHECK(manifest_from_json({{"algorithms", "focus,fedavg"}}).algorithms ==
        std::vector<Algorithm>{Algorithm::focus, Algorithm::fedavg});
  CHECK(manifest_from_json(resolved).scenario == defaults.scenario);

  CHECK(parse_sweep_values("1,2.5,3") == std::vector<double>{1.0, 2.5, 3.0});
  CHECK_THROWS_AS(parse_sweep_values(""), ConfigError);
  CHECK_THROWS_AS(parse_sweep_values("1,x"), ConfigError);
  CHECK_THROWS_AS(parse_sweep_param("lambda"), ConfigError);
}

TEST_CASE("synth writes one CSV per agent, deterministically") {
  const fs::path a = scratch("synth_a"), b = scratch("synth_b");
  CHECK(cli({"synth", "--out", a.string()}) == 0);
  CHECK(cli({"synth", "--out", b.string()}) == 0);
  std::size_t csvs = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    if (entry.path().extension() == ".csv") {
      ++csvs;
      CHECK(read_file(entry.path()) == read_file(b / entry.path().filename()));
    }
  }
  CHECK(csvs == 10);
  CHECK(read_file(a / "manifest.json") == read_file(b / "manifest.json"));
  CHECK(nlohmann::json::parse(read_file(a / "manifest.json"))["seed"] == 1);
}

TEST_CASE("config errors exit with code 2") {
  const fs::path dir = scratch("config_errors");
  CHECK(cli({"synth", "--config", write_config(dir, {{"num_agents", 2}}).string(), "--out", dir.string()}) == 2);
  write_file_atomic(dir / "broken.json", "{\"num_agents\": ");
  CHECK(cli({"run", "--config", (dir / "broken.json").string()}) == 2);
  CHECK(cli({"run", "--algo", "sgd"}) == 2);
  CHECK(cli({"frobnicate"}) == 2);
  CHECK(cli({"theorem-check", "--which", "thm2"}) == 2);
  const fs::path logistic = write_config(dir, {{"model_kind", "ridge_logistic"}});
  CHECK(cli({"theorem-check", "--which", "thm3", "--config", logistic.string()}) == 2);
  CHECK(cli({"sweep", "--param", "M", "--values", ""}) == 2);
  CHECK(cli({"sweep", "--param", "gamma", "--values", "1"}) == 2);
}

TEST_CASE("divergence exits with code 3") {
  const fs::path dir = scratch("diverge");
  auto cfg = small_config();
  cfg["learning_rate"] = 50.0;
  CHECK(cli({"run", "--algo", "fedavg", "--config", write_config(dir, cfg).string(), "--out", dir.string()}) == 3);
}

TEST_CASE("run on the default scenario separates the algorithms") {
  const fs::path dir = scratch("run_default");
  CHECK(cli({"run", "--algo", "focus,fedavg", "--seed", "1", "--out", dir.string()}) == 0);
  const auto summary = nlohmann::json::parse(read_file(dir / "summary.json"));
  REQUIRE(summary["runs"].size() == 2);
  CHECK(summary["runs"][0]["algo"] == "focus");
  CHECK(summary["runs"][0]["report"]["faa"].get<double>() <= 0.01);
  CHECK(summary["runs"][1]["report"]["faa"].get<double>() >= 0.7);
  CHECK(summary["config"]["seed"] == 1);
  CHECK(summary.dump().find("wall") == std::string::npos);

  CHECK(read_file(dir / "rounds_focus_seed1.csv").starts_with("# schema=1\nround,agent,train_loss,test_loss\n"));
  CHECK(read_file(dir / "pi_focus_seed1.csv").starts_with("# schema=1\nround,agent,m,pi\n"));
  CHECK(data_lines(dir / "rounds_fedavg_seed1.csv") == 100 * 10);
  CHECK(data_lines(dir / "pi_focus_seed1.csv") == 101 * 10 * 2);
  CHECK(fs::exists(dir / "timing.json"));
  CHECK(fs::exists(dir / "checkpoints" / "focus_seed1_final.json"));
  CHECK(fs::exists(dir / "checkpoints" / "fedavg_seed1_round50.json"));
}

TEST_CASE("repetitions multiply summary rows") {
  const fs::path dir = scratch("reps");
  const fs::path cfg = write_config(dir, small_config());
  CHECK(cli({"run", "--algo", "all", "--repetitions", "5", "--config", cfg.string(), "--out", dir.string()}) == 0);
  CHECK(data_lines(dir / "summary.csv") == 15);
  const auto summary = nlohmann::json::parse(read_file(dir / "summary.json"));
  CHECK(summary["runs"].back()["seed"] == 5);
}

TEST_CASE("identical invocations give byte-identical summaries regardless of threads") {
  const fs::path dir = scratch("determinism");
  const fs::path cfg = write_config(dir, small_config());
  std::string json_one, csv_one;
  {
    ScopedThreadLimit limit(1);
    CHECK(cli({"run", "--config", cfg.string(), "--out", dir.string()}) == 0);
    json_one = read_file(dir / "summary.json");
    csv_one = read_file(dir / "summary.csv");
  }
  {
    ScopedThreadLimit limit(6);
    CHECK(cli({"run", "--config", cfg.string(), "--out", dir.string()}) == 0);
  }
  CHECK(read_file(dir / "summary.json") == json_one);
  CHECK(read_file(dir / "summary.csv") == csv_one);
}

TEST_CASE("theorem checks") {
  const fs::path dir = scratch("theorems");
  CHECK(cli({"theorem-check", "--which", "thm3"}) == 0);
  CHECK(cli({"theorem-check", "--which", "thm3", "--config",
             write_config(dir, {{"intra_radius", 0.0}}).string()}) == 0);
  CHECK(cli({"theorem-check", "--which", "thm1", "--config",
             write_config(dir, {{"scenario_kind", "multi_cluster"}, {"num_clusters", 3}}).string()}) == 0);
  // Too few rounds to converge: a reported failure, not an error.
  CHECK(cli({"theorem-check", "--which", "thm1", "--config", write_config(dir, {{"rounds", 1}}).string()}) == 4);

  const TheoremVerdict v = check_theorem3(ScenarioConfig{});
  CHECK(v.pass);
  CHECK(v.details["closed_form"]["faa_focus"].get<double>() <= 1e-4);
  CHECK(v.details["closed_form"]["faa_avg"].get<double>() >= 0.7981);
}

TEST_CASE("sweeps") {
  const fs::path dir = scratch("sweep");
  const fs::path cfg = write_config(dir, small_config());
  CHECK(cli({"sweep", "--param", "M", "--values", "1,2", "--algo", "focus", "--config", cfg.string(), "--out",
             dir.string()}) == 0);
  CHECK(data_lines(dir / "sweep_M.csv") == 2);

  auto full_rounds = small_config();
  full_rounds["rounds"] = 100;
  ExperimentManifest m = manifest_from_json(full_rounds);
  m.algorithms = {Algorithm::focus};
  m.repetitions = 2;
  const std::vector<double> steps{1, 5, 10};
  const auto rows = run_sweep(m, SweepParam::local_steps, steps);
  CHECK(rows.size() == 6);
  double lo = rows.front().summary.avg_loss, hi = lo;
  for (const auto& r : rows) {
    CHECK(std::isfinite(r.summary.avg_loss));
    lo = std::min(lo, r.summary.avg_loss);
    hi = std::max(hi, r.summary.avg_loss);
  }
  CHECK(hi <= 1.1 * lo);
  CHECK_THROWS_AS(run_sweep(m, SweepParam::num_clusters, std::vector<double>{1.5}), ConfigError);
}
