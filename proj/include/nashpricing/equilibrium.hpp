#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nashpricing/market_model.hpp"

namespace nashpricing {

// Which win-factor the deviation gain uses: the exact softmax ratio, or the
// exponential bound e^{N_Φ·a·d} that makes ε an upper bound on the advantage.
enum class PhiMode { kExact, kUpperBound };

// Deviations searched when maximizing ε. kUndercut covers d in [0, x̃), where
// the exponential bound is valid. kAdmissible covers the whole interval on
// which the gain stays positive.
enum class DeviationDomain { kUndercut, kAdmissible };

// One agent prices at x̃ − d while the other N − 1 hold x̃.
struct DeviationContext {
  MarketParams params;
  double mean_price = 0.0;       // x̃
  double reference_price = 0.0;  // p̄
  double gamma = 0.0;            // −(β1 + β2)
  double n_phi = 0.0;            // Σ over non-deviators of e^{φ(x̃)}
  double demand = 0.0;           // f(x̃), clamped at zero

  static DeviationContext make(const MarketParams& params, double mean_price,
                               double reference_price);
  // E[Π]⁰ = x̃·f(x̃)/N, the symmetric-pricing profit of any one agent.
  double symmetric_profit() const;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool empty() const { return !(lo < hi); }
  bool contains(double v) const { return v > lo && v < hi; }
};

// Ratio of the deviator's win probability to the symmetric share 1/N.
double phi_d(const DeviationContext& ctx, double d);
double phi_d_upper_bound(const DeviationContext& ctx, double d);

// (1 + γd/f)(1 − d/x̃): the demand-times-price part of the gain.
double gain_polynomial(const DeviationContext& ctx, double d);

// Ω(d) = E[Π]'/E[Π]⁰. Throws std::domain_error naming the violated bound
// when d is outside the admissible range.
double gain(const DeviationContext& ctx, double d,
            PhiMode mode = PhiMode::kExact);

// (−f(x̃)/γ, x̃); empty when f(x̃) = 0.
Interval admissible_range(const DeviationContext& ctx);

struct UndercutResult {
  bool profitable = false;
  Interval interval;  // (0, x̃ − f(x̃)/γ) when profitable
};
UndercutResult undercut_profitable(const DeviationContext& ctx);

// Price above which undercutting pays: (β2·p̄ − β0) / (2(β1 + β2)).
double undercut_price_threshold(const MarketParams& params,
                                double reference_price);

// Observation whose expected_profit for agent 0 equals Ω(d)·E[Π]⁰. Demand is
// driven by the deviator's price, matching f(x̃ − d) = f(x̃) + γd.
MarketObservation deviation_observation(const DeviationContext& ctx, double d);

struct DeviationOptions {
  PhiMode phi = PhiMode::kUpperBound;
  DeviationDomain domain = DeviationDomain::kUndercut;
  int grid_points = 512;
  double tolerance = 1e-6;  // golden-section bracket width, price units
};

// E[Π]⁰·(Ω(d) − 1) without range checks.
double deviation_advantage(const DeviationContext& ctx, double d,
                           PhiMode mode);

// Seeding grid for the maximizer; empty when the domain is empty.
std::vector<double> deviation_grid(const DeviationContext& ctx,
                                   const DeviationOptions& options);

struct OptimalDeviation {
  double d_star = 0.0;
  double epsilon = 0.0;  // max(0, best advantage)
};
OptimalDeviation optimal_deviation(const DeviationContext& ctx,
                                   const DeviationOptions& options = {});

// Closed-form stationary point from the derivative condition. d_star is NaN
// when the radicand is negative. Kept for comparison against the numeric
// maximizer, which is authoritative.
struct ClosedFormDeviation {
  double c1 = 0.0;
  double c2 = 0.0;
  double radicand = 0.0;
  double d_star = 0.0;
  double epsilon = 0.0;  // NaN when d_star is NaN or outside x̃'s range
  bool zero_condition = false;  // c1² + 4(c2−1)c2 == c1 + 2c2
};
double closed_form_d_star(double c1, double c2);
ClosedFormDeviation closed_form_deviation(const DeviationContext& ctx,
                                          PhiMode mode = PhiMode::kUpperBound);

struct EpsilonSurface {
  std::vector<double> x_grid;
  std::vector<double> p_grid;
  double threshold = 1e-4;
  // Row-major over (x index, p index).
  std::vector<double> epsilon;
  std::vector<bool> ne_mask;

  double at(std::size_t xi, std::size_t pj) const {
    return epsilon[xi * p_grid.size() + pj];
  }
  bool is_ne(std::size_t xi, std::size_t pj) const {
    return ne_mask[xi * p_grid.size() + pj];
  }
  std::size_t ne_count() const;
  // Header x_mean,p_ref,epsilon,is_ne; one row per cell.
  std::string to_csv() const;
};

// Cells are independent; `threads` > 1 splits rows across workers and the
// result is identical to the serial evaluation.
EpsilonSurface epsilon_surface(const MarketParams& params,
                               const std::vector<double>& x_grid,
                               const std::vector<double>& p_grid,
                               double epsilon_threshold,
                               const DeviationOptions& options = {},
                               int threads = 1);

struct RewardBand {
  double low = 0.0;
  double high = 0.0;
};

// Min and max symmetric per-agent reward x̃·f(x̃)/N over the x̃ in `x_grid`
// whose ε is below the threshold. nullopt when no such x̃ exists.
std::optional<RewardBand> ne_reward_band(const MarketParams& params,
                                         double reference_price,
                                         double epsilon_threshold,
                                         const std::vector<double>& x_grid,
                                         const DeviationOptions& options = {});

// Sorted, merged union of bands.
std::vector<Interval> merge_bands(const std::vector<RewardBand>& bands);
bool in_band_union(const std::vector<Interval>& merged, double value);

}  // namespace nashpricing
