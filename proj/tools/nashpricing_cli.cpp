#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "nashpricing/harness.hpp"
#include "nashpricing/io.hpp"

using namespace nashpricing;

namespace {

TrainConfig load_config(const std::string& path, const Scenario& scenario,
                        int action_dims) {
  TrainConfig config;
  config.noise_sigma = scenario.noise_sigma;
  config.action_dims = action_dims;
  if (!path.empty()) {
    const auto j = nlohmann::json::parse(read_text_file(path));
    from_json(j, config);
  }
  config.validate();
  return config;
}

// action_dims decides the price grid, so read it before building the scenario.
int config_action_dims(const std::string& path) {
  if (path.empty()) return TrainConfig{}.action_dims;
  const auto j = nlohmann::json::parse(read_text_file(path));
  return j.value("action_dims", TrainConfig{}.action_dims);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic-pricing Markov game laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(NASHPRICING_VERSION));

  std::string scenario_name = "scenario2";
  std::string out = "out";
  int agents = 3;
  int resolution = 10;
  std::string seeds = "1";
  std::string mode = "nash";
  std::string config_path;
  std::string replay_path;
  int jobs = 1;
  int samples = 1000;

  auto* surface = app.add_subcommand("surface", "ε surface and equilibrium reward bands");
  surface->add_option("--scenario", scenario_name, "scenario1..scenario4");
  surface->add_option("--agents", agents, "number of agents")->check(CLI::Range(2, 64));
  surface->add_option("--resolution", resolution, "grid points per axis")
      ->check(CLI::PositiveNumber);
  surface->add_option("--out", out, "output directory");

  auto* train_cmd = app.add_subcommand("train", "train learners over a seed sweep");
  train_cmd->add_option("--scenario", scenario_name, "scenario1..scenario4");
  train_cmd->add_option("--agents", agents, "number of agents")->check(CLI::Range(2, 64));
  train_cmd->add_option("--seeds", seeds, "e.g. 1,2,3 or 1-10");
  train_cmd->add_option("--mode", mode, "nash or baseline");
  train_cmd->add_option("--config", config_path, "JSON hyperparameter file")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--jobs", jobs, "parallel seeds")->check(CLI::PositiveNumber);
  train_cmd->add_option("--replay", replay_path, "re-run a manifest.json into --out")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--out", out, "output directory");

  auto* compare = app.add_subcommand("compare", "nash learner against the baseline");
  compare->add_option("--scenario", scenario_name, "scenario1..scenario4");
  compare->add_option("--agents", agents, "number of agents")->check(CLI::Range(2, 64));
  compare->add_option("--seeds", seeds, "e.g. 1,2,3 or 1-10");
  compare->add_option("--config", config_path, "JSON hyperparameter file")
      ->check(CLI::ExistingFile);
  compare->add_option("--jobs", jobs, "parallel seeds")->check(CLI::PositiveNumber);
  compare->add_option("--out", out, "output directory");

  auto* verify = app.add_subcommand("verify", "run the oracle checks");
  verify->add_option("--scenario", scenario_name, "scenario1..scenario4");
  verify->add_option("--agents", agents, "number of agents")->check(CLI::Range(2, 64));
  verify->add_option("--samples", samples, "random contexts per check")
      ->check(CLI::PositiveNumber);
  verify->add_option("--out", out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (surface->parsed()) {
      const Scenario s = find_scenario(scenario_name, agents);
      const auto r = cmd_surface(s, resolution, out);
      std::cout << s.name << ": " << r.surface.ne_count() << " of "
                << r.surface.epsilon.size() << " cells below "
                << s.epsilon_threshold << "\n";
      for (const auto& f : r.files) std::cout << "wrote " << f.string() << "\n";
      return 0;
    }
    if (train_cmd->parsed() && !replay_path.empty()) {
      const TrainReport r = replay_manifest(replay_path, out);
      std::cout << "replayed " << r.market_mean.size() << " episodes into " << out
                << "\n";
      return r.aborted ? 2 : 0;
    }
    if (train_cmd->parsed() || compare->parsed()) {
      const int dims = config_action_dims(config_path);
      TrainRequest req;
      req.scenario = find_scenario(scenario_name, agents, dims);
      req.config = load_config(config_path, req.scenario, dims);
      req.seeds = parse_seed_list(seeds);
      req.jobs = jobs;
      if (compare->parsed()) {
        const auto r = cmd_compare(req, out);
        std::cout << "nash >= baseline in " << r.nash_at_least_baseline << " of "
                  << r.rows.size() << " seeds; wrote " << out << "/compare.csv\n";
        return 0;
      }
      req.mode = parse_train_mode(mode);
      const auto summary = cmd_train(req, out);
      for (const auto& s : summary.seeds)
        std::cout << "seed " << s.seed << ": market " << s.final_market_mean
                  << ", agent0 " << s.final_agent0_mean
                  << (s.in_band ? " (in band)" : "") << (s.aborted ? " ABORTED" : "")
                  << "\n";
      std::cout << "band hit rate " << summary.band_hit_rate << "\n";
      return 0;
    }
    if (verify->parsed()) {
      const auto report = cmd_verify(find_scenario(scenario_name, agents), out,
                                     VerifyOptions{samples});
      for (const auto& c : report["checks"])
        std::cout << c["name"].get<std::string>() << ": "
                  << (c["pass"].get<bool>() ? "pass" : "fail")
                  << (c.value("informational", false) ? " (informational)" : "")
                  << "\n";
      return report["all_required_pass"].get<bool>() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
