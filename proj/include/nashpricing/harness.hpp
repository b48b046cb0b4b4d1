#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"
#include "nashpricing/equilibrium.hpp"
#include "nashpricing/nash_q.hpp"
#include "nashpricing/scenarios.hpp"

namespace nashpricing {

namespace fs = std::filesystem;

enum class TrainMode { kNash, kBaseline };
std::string to_string(TrainMode mode);
TrainMode parse_train_mode(const std::string& text);

// "1,2,5" or "1-10" or a mix ("1-3,7").
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

constexpr int kBandPoints = 181;  // x̃ samples per reference price
constexpr int kFinalEpisodes = 10;

struct BandSet {
  double epsilon_threshold = 1e-4;
  std::vector<double> reference_prices;
  std::vector<std::optional<RewardBand>> bands;
  std::vector<Interval> merged;

  nlohmann::json to_json() const;
};

// Per-state reward bands over the scenario's state grid and their union.
BandSet compute_bands(const Scenario& scenario,
                      const DeviationOptions& options = {},
                      int band_points = kBandPoints);

struct SurfaceOutput {
  EpsilonSurface surface;
  BandSet bands;
  std::vector<fs::path> files;
};

// Writes surface.csv and ne_bands.json under `out`. The surface grid has
// `resolution` points per axis on the price range.
SurfaceOutput cmd_surface(const Scenario& scenario, int resolution,
                          const fs::path& out, const DeviationOptions& options = {});

struct SeedOutcome {
  std::uint64_t seed = 0;
  double final_market_mean = 0.0;
  double final_agent0_mean = 0.0;
  bool in_band = false;
  bool aborted = false;
  std::string error;
  TrainReport report;
};

struct TrainSummary {
  std::string scenario;
  TrainMode mode = TrainMode::kNash;
  int n_agents = 0;
  std::vector<SeedOutcome> seeds;
  BandSet bands;
  double band_hit_rate = 0.0;

  nlohmann::json to_json() const;
};

struct TrainRequest {
  Scenario scenario;
  TrainConfig config;
  std::vector<std::uint64_t> seeds;
  TrainMode mode = TrainMode::kNash;
  int jobs = 1;
};

// Runs every seed and writes seed_<n>/{rewards.csv,losses.csv,manifest.json}
// plus summary.json under `out`.
TrainSummary cmd_train(const TrainRequest& request, const fs::path& out);

struct CompareRow {
  std::uint64_t seed = 0;
  double nash_market = 0.0;
  double baseline_market = 0.0;
  double nash_agent0 = 0.0;
  double baseline_agent0 = 0.0;
};

struct CompareOutput {
  TrainSummary nash;
  TrainSummary baseline;
  std::vector<CompareRow> rows;
  int nash_at_least_baseline = 0;
};

// Nash and baseline runs on the same seeds under out/nash and out/baseline,
// paired in out/compare.csv.
CompareOutput cmd_compare(const TrainRequest& request, const fs::path& out);
std::string compare_csv(const std::vector<CompareRow>& rows);

struct VerifyOptions {
  int samples = 1000;
  std::uint64_t seed = 7;
};

// Oracle checks, reported in verify.json. Never throws on a failed check.
nlohmann::json cmd_verify(const Scenario& scenario, const fs::path& out,
                          const VerifyOptions& options = {});

// Manifest for one training run; the config hash covers everything that
// determines the run's outputs.
nlohmann::json run_manifest(const Scenario& scenario, const TrainConfig& config,
                            TrainMode mode, std::uint64_t seed,
                            const TrainReport& report,
                            const std::vector<std::string>& files);
std::string config_hash(const nlohmann::json& run_definition);

// Re-runs the training described by a manifest into `out`.
TrainReport replay_manifest(const fs::path& manifest_path, const fs::path& out);

}  // namespace nashpricing
