// Runs every acceptance criterion at its stated tolerance and prints one
// PASS/FAIL line per criterion. Exit status is non-zero if any criterion fails.
//
//   acceptance [--out DIR] [--seeds N] [--only 1,2,...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nashpricing/equilibrium.hpp"
#include "nashpricing/harness.hpp"
#include "nashpricing/io.hpp"
#include "nashpricing/mlp.hpp"
#include "nashpricing/small_game.hpp"

using namespace nashpricing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit;  // seconds, 0 = none stated
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

DeviationContext random_context(const MarketParams& params, Rng& rng) {
  for (;;) {
    const auto ctx = DeviationContext::make(params, rng.uniform(kPriceLow, kPriceHigh),
                                            rng.uniform(kPriceLow, kPriceHigh));
    if (!admissible_range(ctx).empty()) return ctx;
  }
}

Outcome plateau_existence() {
  std::ostringstream detail;
  bool pass = true;
  const auto grid = linear_price_grid(kPriceLow, kPriceHigh, 10);
  for (const auto& name : scenario_names()) {
    const Scenario sc = find_scenario(name);
    const auto surface = epsilon_surface(sc.params, grid, grid, sc.epsilon_threshold);
    const double lowest = *std::min_element(surface.epsilon.begin(), surface.epsilon.end());
    const bool ok = surface.ne_count() > 0 && lowest >= 0.0;
    pass = pass && ok;
    detail << name << " ne_cells=" << surface.ne_count() << " min_eps=" << lowest << "; ";
  }
  return {pass, detail.str()};
}

// ε at d from the same advantage the maximizer uses.
double eps_at(const DeviationContext& ctx, double d, PhiMode phi) {
  return std::max(0.0, deviation_advantage(ctx, d, phi));
}

Outcome d_star_optimality() {
  double worst = -1e300;
  int contexts = 0, cf_undefined = 0, cf_compared = 0;
  double cf_worst = 0.0;
  for (const auto& name : scenario_names()) {
    const Scenario sc = find_scenario(name);
    Rng rng(derive_seed(2024, contexts));
    for (int i = 0; i < 1000; ++i, ++contexts) {
      const auto ctx = random_context(sc.params, rng);
      for (DeviationDomain domain : {DeviationDomain::kAdmissible, DeviationDomain::kUndercut}) {
        DeviationOptions opt;
        opt.domain = domain;
        const OptimalDeviation best = optimal_deviation(ctx, opt);
        const Interval range = admissible_range(ctx);
        const double hi = domain == DeviationDomain::kUndercut ? ctx.mean_price : range.hi;
        const double lo = domain == DeviationDomain::kUndercut ? 0.0 : range.lo;
        for (int k = 0; k < 512; ++k) {
          const double d = lo + (hi - lo) * (k + 0.5) / 512.0;
          worst = std::max(worst, eps_at(ctx, d, opt.phi) - best.epsilon);
        }
        if (domain == DeviationDomain::kUndercut) {
          const auto cf = closed_form_deviation(ctx, opt.phi);
          if (std::isnan(cf.d_star)) {
            ++cf_undefined;
          } else {
            ++cf_compared;
            cf_worst = std::max(cf_worst, std::abs(cf.d_star - best.d_star));
          }
        }
      }
    }
  }
  return {worst <= 1e-9,
          fmt("contexts=%d max_grid_excess=%.3g; closed-form report: compared=%d "
              "undefined=%d max_abs_diff=%.3g (agreement not required)",
              contexts, worst, cf_compared, cf_undefined, cf_worst)};
}

Outcome gain_equivalence() {
  double worst = 0.0;
  int n = 0;
  for (const auto& name : scenario_names()) {
    const Scenario sc = find_scenario(name);
    Rng rng(derive_seed(77, n));
    for (int i = 0; i < 250; ++i, ++n) {
      const auto ctx = random_context(sc.params, rng);
      const Interval range = admissible_range(ctx);
      const double d = range.lo + (range.hi - range.lo) * (0.001 + 0.998 * rng.uniform());
      const double lhs = gain(ctx, d, PhiMode::kExact) * ctx.symmetric_profit();
      const double rhs = expected_profit(sc.params, 0, deviation_observation(ctx, d));
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return {worst <= 1e-9, fmt("samples=%d max_abs_discrepancy=%.3g", n, worst)};
}

double worst_gradient_error(MlpNet& net, int batch, Rng& rng) {
  Eigen::MatrixXd x(net.input_size(), batch), t(net.output_size(), batch);
  for (int c = 0; c < batch; ++c) {
    for (int r = 0; r < x.rows(); ++r) x(r, c) = rng.uniform(-1, 1);
    for (int r = 0; r < t.rows(); ++r) t(r, c) = rng.uniform(0, 1);
  }
  std::vector<double> grad;
  net.loss_and_gradient(x, t, &grad);
  auto p = net.parameters();
  double worst = 0.0;
  for (int probe = 0; probe < 10; ++probe) {
    const std::size_t k = rng.uniform_int(p.size());
    const double h = 1e-6, saved = p[k];
    p[k] = saved + h;
    net.set_parameters(p);
    const double up = net.loss(x, t);
    p[k] = saved - h;
    net.set_parameters(p);
    const double down = net.loss(x, t);
    p[k] = saved;
    net.set_parameters(p);
    const double numeric = (up - down) / (2 * h);
    const double scale = std::max({std::abs(numeric), std::abs(grad[k]), 1e-7});
    worst = std::max(worst, std::abs(numeric - grad[k]) / scale);
  }
  return worst;
}

Outcome gradient_correctness() {
  Rng rng(5);
  MlpNet linear({3, 3, 2}, OutputHead::kLinear, NetRole::kQ);
  linear.initialize(11);
  auto p = linear.parameters();
  for (auto& v : p) v += 0.05;  // keep units off the ReLU kink
  linear.set_parameters(p);
  MlpNet softmax({3, 6, 6}, OutputHead::kPerAgentSoftmax, NetRole::kPsi, 3);
  softmax.initialize(12);
  const double e_lin = worst_gradient_error(linear, 5, rng);
  const double e_soft = worst_gradient_error(softmax, 5, rng);
  return {e_lin < 1e-4 && e_soft < 1e-4,
          fmt("linear head max_rel_err=%.3g, softmax head max_rel_err=%.3g", e_lin, e_soft)};
}

Outcome small_game_bound() {
  const auto c = check_delta_bound(desk_game(), 0.9, 1e-6);
  return {c.pass, fmt("comparisons=%d worst_excess=%.3g max_gain=%.4g max_delta=%.4g",
                      c.comparisons, c.worst_excess, c.max_gain, c.max_delta)};
}

struct TrainingRuns {
  bool done = false;
  CompareOutput compare;
  double seconds = 0.0;
  double slowest_seed = 0.0;
};

double quartile_mean(const std::vector<LossRecord>& losses, bool last, bool psi) {
  const std::size_t q = losses.size() / 4;
  if (q == 0) return std::nan("");
  double s = 0.0;
  for (std::size_t i = 0; i < q; ++i) {
    const auto& l = losses[last ? losses.size() - q + i : i];
    s += psi ? l.loss_psi : l.loss_q;
  }
  return s / q;
}

}  // namespace

int main(int argc, char** argv) {
  fs::path out = "acceptance_runs";
  int n_seeds = 10;
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--out" && i + 1 < argc) {
      out = argv[++i];
    } else if (a == "--seeds" && i + 1 < argc) {
      n_seeds = std::stoi(argv[++i]);
    } else if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string tok; std::getline(ss, tok, ',');) only.insert(std::stoi(tok));
    } else {
      std::cerr << "usage: acceptance [--out DIR] [--seeds N] [--only 1,2,...]\n";
      return 2;
    }
  }

  TrainingRuns runs;
  std::vector<std::uint64_t> seeds;
  for (int s = 1; s <= n_seeds; ++s) seeds.push_back(s);
  auto ensure_runs = [&]() -> TrainingRuns& {
    if (runs.done) return runs;
    TrainRequest req;
    req.scenario = find_scenario("scenario2");
    req.seeds = seeds;
    req.mode = TrainMode::kNash;
    req.jobs = 1;
    const auto start = std::chrono::steady_clock::now();
    runs.compare = cmd_compare(req, out / "compare");
    runs.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const auto& s : runs.compare.nash.seeds)
      runs.slowest_seed = std::max(runs.slowest_seed, s.report.wall_seconds);
    runs.done = true;
    return runs;
  };

  const std::vector<Criterion> criteria = {
      {1, "NE plateau exists in every scenario's 10x10 surface", 10, plateau_existence},
      {2, "numeric d* beats every grid deviation", 30, d_star_optimality},
      {3, "gain function matches the market profit oracle", 5, gain_equivalence},
      {4, "MLP gradients match finite differences", 5, gradient_correctness},
      {5, "every TuRBO-p evaluation lies on the simplex product", 0,
       [&]() -> Outcome {
         const auto& r = ensure_runs();
         int violations = 0, calls = 0;
         double worst = 0.0;
         bool aborted = false;
         for (const auto& s : r.compare.nash.seeds) {
           violations += s.report.guard_violations;
           calls += s.report.turbo_calls;
           worst = std::max(worst, s.report.max_block_error);
           aborted = aborted || s.aborted;
         }
         return {violations == 0 && calls > 0 && !aborted,
                 fmt("runs=%zu turbo_calls=%d violations=%d max_block_error=%.3g",
                     r.compare.nash.seeds.size(), calls, violations, worst)};
       }},
      {6, "small-game deviation gains bounded by max delta", 60, small_game_bound},
      {7, "Nash learner converges into the NE reward band", 0,
       [&]() -> Outcome {
         const auto& r = ensure_runs();
         int in_band = 0, loss_down = 0;
         std::ostringstream per_seed;
         for (const auto& s : r.compare.nash.seeds) {
           const auto& l = s.report.losses;
           const bool q_down = quartile_mean(l, true, false) < quartile_mean(l, false, false);
           const bool psi_down = quartile_mean(l, true, true) < quartile_mean(l, false, true);
           in_band += s.in_band ? 1 : 0;
           loss_down += q_down && psi_down ? 1 : 0;
           per_seed << " seed" << s.seed << "(r0=" << fmt("%.3f", s.final_agent0_mean)
                    << (s.in_band ? " in" : " out") << (q_down ? " Q-" : " Q+")
                    << (psi_down ? " Psi-" : " Psi+") << ")";
         }
         std::ostringstream band;
         for (const auto& iv : r.compare.nash.bands.merged) band << "[" << iv.lo << "," << iv.hi << "]";
         const bool time_ok = r.slowest_seed < 30 * 60;
         const int need_band = (6 * n_seeds + 9) / 10, need_loss = (8 * n_seeds + 9) / 10;
         return {in_band >= need_band && loss_down >= need_loss && time_ok,
                 fmt("in_band=%d/%d (need %d) loss_decrease=%d/%d (need %d) "
                     "slowest_seed=%.1fs band=",
                     in_band, n_seeds, need_band, loss_down, n_seeds, need_loss,
                     r.slowest_seed) +
                     band.str() + ";" + per_seed.str()};
       }},
      {8, "Nash learner earns at least the baseline's market reward", 0,
       [&]() -> Outcome {
         const auto& r = ensure_runs();
         std::ostringstream rows;
         for (const auto& row : r.compare.rows)
           rows << fmt(" seed%d(%.3f vs %.3f)", static_cast<int>(row.seed), row.nash_market,
                       row.baseline_market);
         const int need = (6 * n_seeds + 9) / 10;
         return {r.compare.nash_at_least_baseline >= need,
                 fmt("nash>=baseline in %d/%zu pairs (need %d);",
                     r.compare.nash_at_least_baseline, r.compare.rows.size(), need) +
                     rows.str()};
       }},
      {9, "identical seed and config reproduce rewards.csv bit-exactly", 0,
       [&]() -> Outcome {
         const auto& r = ensure_runs();
         int identical = 0, checked = 0;
         for (std::size_t i = 0; i < std::min<std::size_t>(3, r.compare.nash.seeds.size()); ++i) {
           const auto seed = r.compare.nash.seeds[i].seed;
           const fs::path dir = out / "compare" / "nash" / ("seed_" + std::to_string(seed));
           const fs::path again = out / "replay" / ("seed_" + std::to_string(seed));
           replay_manifest(dir / "manifest.json", again);
           ++checked;
           if (read_text_file(dir / "rewards.csv") == read_text_file(again / "rewards.csv"))
             ++identical;
         }
         return {checked == 3 && identical == 3,
                 fmt("identical=%d/%d seeds", identical, checked)};
       }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit > 0 && secs >= c.time_limit) {
      o.pass = false;
      o.detail += fmt(" [over time limit %.0fs]", c.time_limit);
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.name
              << " (" << fmt("%.1fs", secs) << ") " << o.detail << std::endl;
  }
  if (runs.done)
    std::cout << "training runs: " << fmt("%.1fs", runs.seconds) << " for " << n_seeds
              << " nash + baseline seeds, outputs in " << (out / "compare").string()
              << std::endl;
  return failed == 0 ? 0 : 1;
}
