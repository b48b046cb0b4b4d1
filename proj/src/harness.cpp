#include "nashpricing/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "nashpricing/io.hpp"
#include "nashpricing/random.hpp"
#include "nashpricing/small_game.hpp"

namespace nashpricing {

std::string to_string(TrainMode mode) {
  return mode == TrainMode::kBaseline ? "baseline" : "nash";
}

TrainMode parse_train_mode(const std::string& text) {
  if (text == "nash") return TrainMode::kNash;
  if (text == "baseline") return TrainMode::kBaseline;
  throw std::invalid_argument("mode must be nash or baseline, got '" + text + "'");
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    try {
      const auto dash = item.find('-');
      if (dash == std::string::npos) {
        seeds.push_back(std::stoull(item));
        continue;
      }
      const auto lo = std::stoull(item.substr(0, dash));
      const auto hi = std::stoull(item.substr(dash + 1));
      if (hi < lo) throw std::invalid_argument("descending range");
      for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    } catch (const std::logic_error&) {
      throw std::invalid_argument("bad seed list entry '" + item + "'");
    }
  }
  if (seeds.empty()) throw std::invalid_argument("seed list is empty");
  return seeds;
}

nlohmann::json BandSet::to_json() const {
  nlohmann::json j;
  j["epsilon_threshold"] = epsilon_threshold;
  nlohmann::json bands_json = nlohmann::json::object();
  for (std::size_t i = 0; i < reference_prices.size(); ++i) {
    const std::string key = format_number(reference_prices[i]);
    if (bands[i])
      bands_json[key] = {{"low", bands[i]->low}, {"high", bands[i]->high}};
    else
      bands_json[key] = {{"empty", true}};
  }
  j["bands"] = bands_json;
  nlohmann::json u = nlohmann::json::array();
  for (const auto& iv : merged) u.push_back({iv.lo, iv.hi});
  j["union"] = u;
  return j;
}

BandSet compute_bands(const Scenario& scenario, const DeviationOptions& options,
                      int band_points) {
  BandSet set;
  set.epsilon_threshold = scenario.epsilon_threshold;
  set.reference_prices = scenario.params.price_grid;
  const auto x_grid = linear_price_grid(scenario.params.price_grid.front(),
                                        scenario.params.price_grid.back(),
                                        band_points);
  std::vector<RewardBand> present;
  for (double p : set.reference_prices) {
    auto band = ne_reward_band(scenario.params, p, scenario.epsilon_threshold,
                               x_grid, options);
    if (band) present.push_back(*band);
    set.bands.push_back(band);
  }
  set.merged = merge_bands(present);
  return set;
}

SurfaceOutput cmd_surface(const Scenario& scenario, int resolution,
                          const fs::path& out, const DeviationOptions& options) {
  if (resolution < 1) throw std::invalid_argument("resolution must be >= 1");
  SurfaceOutput result;
  const auto grid = linear_price_grid(kPriceLow, kPriceHigh, resolution);
  result.surface = epsilon_surface(scenario.params, grid, grid,
                                   scenario.epsilon_threshold, options);
  result.bands = compute_bands(scenario, options);
  write_text_file(out / "surface.csv", result.surface.to_csv());
  write_text_file(out / "ne_bands.json", result.bands.to_json().dump(2) + "\n");
  result.files = {out / "surface.csv", out / "ne_bands.json"};
  return result;
}

std::string config_hash(const nlohmann::json& run_definition) {
  return git_blob_hash(run_definition.dump());
}

namespace {

nlohmann::json run_definition(const Scenario& scenario, const TrainConfig& config,
                              TrainMode mode, std::uint64_t seed) {
  return {{"scenario", scenario.name},
          {"market_params", scenario.params},
          {"epsilon_threshold", scenario.epsilon_threshold},
          {"mode", to_string(mode)},
          {"seed", seed},
          {"config", config}};
}

TrainReport run_one(const Scenario& scenario, const TrainConfig& config,
                    TrainMode mode, std::uint64_t seed) {
  return mode == TrainMode::kNash ? train(scenario.params, config, seed)
                                  : train_baseline(scenario.params, config, seed);
}

std::vector<std::string> write_run(const fs::path& dir, const Scenario& scenario,
                                   const TrainConfig& config, TrainMode mode,
                                   std::uint64_t seed, const TrainReport& report) {
  std::vector<std::string> files = {"rewards.csv", "losses.csv", "manifest.json"};
  write_text_file(dir / "rewards.csv", report.rewards_csv());
  write_text_file(dir / "losses.csv", report.losses_csv());
  const auto manifest = run_manifest(scenario, config, mode, seed, report, files);
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return files;
}

double mean_of(const std::vector<SeedOutcome>& seeds, bool market) {
  double sum = 0.0;
  int n = 0;
  for (const auto& s : seeds) {
    const double v = market ? s.final_market_mean : s.final_agent0_mean;
    if (std::isfinite(v)) {
      sum += v;
      ++n;
    }
  }
  return n ? sum / n : std::nan("");
}

}  // namespace

nlohmann::json run_manifest(const Scenario& scenario, const TrainConfig& config,
                            TrainMode mode, std::uint64_t seed,
                            const TrainReport& report,
                            const std::vector<std::string>& files) {
  nlohmann::json j = run_definition(scenario, config, mode, seed);
  j["tool"] = "nashpricing";
  j["version"] = NASHPRICING_VERSION;
  j["config_hash"] = config_hash(run_definition(scenario, config, mode, seed));
  j["outputs"] = files;
  j["episodes_completed"] = report.market_mean.size();
  j["updates"] = report.losses.size();
  j["turbo_calls"] = report.turbo_calls;
  j["simplex_guard_violations"] = report.guard_violations;
  j["max_block_error"] = report.max_block_error;
  j["aborted"] = report.aborted;
  j["error"] = report.error;
  j["wall_seconds"] = report.wall_seconds;
  return j;
}

nlohmann::json TrainSummary::to_json() const {
  nlohmann::json j;
  j["scenario"] = scenario;
  j["mode"] = to_string(mode);
  j["n_agents"] = n_agents;
  j["final_episodes"] = kFinalEpisodes;
  nlohmann::json per_seed = nlohmann::json::array();
  for (const auto& s : seeds) {
    per_seed.push_back({{"seed", s.seed},
                        {"final_market_mean", s.final_market_mean},
                        {"final_agent0_mean", s.final_agent0_mean},
                        {"in_band", s.in_band},
                        {"aborted", s.aborted},
                        {"error", s.error}});
  }
  j["seeds"] = per_seed;
  j["mean_final_market"] = mean_of(seeds, true);
  j["mean_final_agent0"] = mean_of(seeds, false);
  j["band_hit_rate"] = band_hit_rate;
  nlohmann::json u = nlohmann::json::array();
  for (const auto& iv : bands.merged) u.push_back({iv.lo, iv.hi});
  j["band_union"] = u;
  return j;
}

TrainSummary cmd_train(const TrainRequest& request, const fs::path& out) {
  if (request.seeds.empty()) throw std::invalid_argument("no seeds given");
  request.config.validate();
  TrainSummary summary;
  summary.scenario = request.scenario.name;
  summary.mode = request.mode;
  summary.n_agents = request.scenario.params.n_agents;
  summary.bands = compute_bands(request.scenario);
  summary.seeds.resize(request.seeds.size());

  // Seeds are independent; each worker writes only its own directory.
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t i = next++; i < request.seeds.size(); i = next++) {
      try {
        const auto seed = request.seeds[i];
        SeedOutcome o;
        o.seed = seed;
        o.report = run_one(request.scenario, request.config, request.mode, seed);
        o.final_market_mean = o.report.final_market_mean(kFinalEpisodes);
        o.final_agent0_mean = o.report.final_agent0_mean(kFinalEpisodes);
        o.in_band = !o.report.aborted &&
                    in_band_union(summary.bands.merged, o.final_agent0_mean);
        o.aborted = o.report.aborted;
        o.error = o.report.error;
        write_run(out / ("seed_" + std::to_string(seed)), request.scenario,
                  request.config, request.mode, seed, o.report);
        summary.seeds[i] = std::move(o);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(request.jobs, request.seeds.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  int hits = 0;
  for (const auto& s : summary.seeds) hits += s.in_band ? 1 : 0;
  summary.band_hit_rate = static_cast<double>(hits) / summary.seeds.size();
  write_text_file(out / "summary.json", summary.to_json().dump(2) + "\n");
  return summary;
}

std::string compare_csv(const std::vector<CompareRow>& rows) {
  std::ostringstream csv;
  csv << "seed,nash_market_mean,baseline_market_mean,nash_agent0_mean,"
         "baseline_agent0_mean,nash_ge_baseline\n";
  for (const auto& r : rows)
    csv << r.seed << ',' << format_number(r.nash_market) << ','
        << format_number(r.baseline_market) << ',' << format_number(r.nash_agent0)
        << ',' << format_number(r.baseline_agent0) << ','
        << (r.nash_market >= r.baseline_market ? 1 : 0) << '\n';
  return csv.str();
}

CompareOutput cmd_compare(const TrainRequest& request, const fs::path& out) {
  CompareOutput result;
  TrainRequest nash = request;
  nash.mode = TrainMode::kNash;
  TrainRequest base = request;
  base.mode = TrainMode::kBaseline;
  result.nash = cmd_train(nash, out / "nash");
  result.baseline = cmd_train(base, out / "baseline");
  for (std::size_t i = 0; i < request.seeds.size(); ++i) {
    CompareRow row;
    row.seed = request.seeds[i];
    row.nash_market = result.nash.seeds[i].final_market_mean;
    row.baseline_market = result.baseline.seeds[i].final_market_mean;
    row.nash_agent0 = result.nash.seeds[i].final_agent0_mean;
    row.baseline_agent0 = result.baseline.seeds[i].final_agent0_mean;
    if (row.nash_market >= row.baseline_market) ++result.nash_at_least_baseline;
    result.rows.push_back(row);
  }
  write_text_file(out / "compare.csv", compare_csv(result.rows));
  return result;
}

nlohmann::json cmd_verify(const Scenario& scenario, const fs::path& out,
                          const VerifyOptions& options) {
  const MarketParams& params = scenario.params;
  Rng rng(options.seed);
  auto random_context = [&] {
    for (;;) {
      const double x = rng.uniform(kPriceLow, kPriceHigh);
      const double p = rng.uniform(kPriceLow, kPriceHigh);
      auto ctx = DeviationContext::make(params, x, p);
      if (!admissible_range(ctx).empty()) return ctx;
    }
  };
  nlohmann::json checks = nlohmann::json::array();

  {
    double worst = 0.0;
    for (int i = 0; i < options.samples; ++i) {
      const auto ctx = random_context();
      const Interval range = admissible_range(ctx);
      const double d = range.lo + (range.hi - range.lo) * (0.001 + 0.998 * rng.uniform());
      const double via_gain = gain(ctx, d, PhiMode::kExact) * ctx.symmetric_profit();
      const double direct = expected_profit(params, 0, deviation_observation(ctx, d));
      worst = std::max(worst, std::abs(via_gain - direct));
    }
    checks.push_back({{"name", "gain_profit_equivalence"},
                      {"samples", options.samples},
                      {"max_abs_discrepancy", worst},
                      {"tolerance", 1e-9},
                      {"pass", worst <= 1e-9}});
  }

  {
    double worst = 0.0;
    double cf_worst = 0.0;
    int cf_nan = 0, cf_compared = 0;
    const DeviationOptions dopt;
    for (int i = 0; i < options.samples; ++i) {
      const auto ctx = random_context();
      const OptimalDeviation opt = optimal_deviation(ctx, dopt);
      for (double d : deviation_grid(ctx, dopt)) {
        const double eps = std::max(0.0, deviation_advantage(ctx, d, dopt.phi));
        worst = std::max(worst, eps - opt.epsilon);
      }
      const ClosedFormDeviation cf = closed_form_deviation(ctx, dopt.phi);
      if (std::isnan(cf.d_star)) {
        ++cf_nan;
      } else {
        cf_worst = std::max(cf_worst, std::abs(cf.d_star - opt.d_star));
        ++cf_compared;
      }
    }
    checks.push_back({{"name", "d_star_optimality"},
                      {"samples", options.samples},
                      {"max_grid_excess", worst},
                      {"tolerance", 1e-9},
                      {"pass", worst <= 1e-9}});
    checks.push_back({{"name", "d_star_closed_form_comparison"},
                      {"samples", options.samples},
                      {"compared", cf_compared},
                      {"closed_form_undefined", cf_nan},
                      {"max_abs_difference", cf_worst},
                      {"tolerance", 1e-3},
                      {"informational", true},
                      {"pass", cf_nan == 0 && cf_worst <= 1e-3}});
  }

  {
    const DeltaBoundCheck c = check_delta_bound(desk_game(), 0.9, 1e-6);
    checks.push_back({{"name", "small_game_delta_bound"},
                      {"comparisons", c.comparisons},
                      {"worst_excess", c.worst_excess},
                      {"max_gain", c.max_gain},
                      {"max_delta", c.max_delta},
                      {"tolerance", 1e-6},
                      {"pass", c.pass}});
  }

  bool all = true;
  for (const auto& c : checks)
    if (!c.value("informational", false)) all = all && c["pass"].get<bool>();
  nlohmann::json report = {{"scenario", scenario.name},
                           {"checks", checks},
                           {"all_required_pass", all}};
  write_text_file(out / "verify.json", report.dump(2) + "\n");
  return report;
}

TrainReport replay_manifest(const fs::path& manifest_path, const fs::path& out) {
  const auto j = nlohmann::json::parse(read_text_file(manifest_path));
  Scenario scenario;
  scenario.name = j.at("scenario").get<std::string>();
  scenario.params = j.at("market_params").get<MarketParams>();
  scenario.epsilon_threshold = j.at("epsilon_threshold").get<double>();
  const TrainConfig config = j.at("config").get<TrainConfig>();
  scenario.noise_sigma = config.noise_sigma;
  const TrainMode mode = parse_train_mode(j.at("mode").get<std::string>());
  const auto seed = j.at("seed").get<std::uint64_t>();
  const auto expected = j.at("config_hash").get<std::string>();
  if (config_hash(run_definition(scenario, config, mode, seed)) != expected)
    throw std::runtime_error("manifest config hash mismatch: " + manifest_path.string());
  TrainReport report = run_one(scenario, config, mode, seed);
  write_run(out, scenario, config, mode, seed, report);
  return report;
}

}  // namespace nashpricing
