#include "nashpricing/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "nashpricing/io.hpp"

namespace nashpricing {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;

// Elasticity weight that tolerates the non-positive prices the raw formulas
// may probe; callers range-check where the model requires it.
double weight(const MarketParams& params, double price) {
  if (params.a == 0.0) return params.b;
  return price < params.b / params.a ? params.b - params.a * price : 0.0;
}

double golden_max(const DeviationContext& ctx, PhiMode mode, double lo,
                  double hi, double tolerance, double* best_value) {
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = deviation_advantage(ctx, x1, mode);
  double f2 = deviation_advantage(ctx, x2, mode);
  while (hi - lo > tolerance) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = deviation_advantage(ctx, x2, mode);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = deviation_advantage(ctx, x1, mode);
    }
  }
  if (f1 >= f2) {
    *best_value = f1;
    return x1;
  }
  *best_value = f2;
  return x2;
}

}  // namespace

DeviationContext DeviationContext::make(const MarketParams& params,
                                        double mean_price,
                                        double reference_price) {
  DeviationContext ctx;
  ctx.params = params;
  ctx.mean_price = mean_price;
  ctx.reference_price = reference_price;
  ctx.gamma = -(params.beta1 + params.beta2);
  ctx.n_phi = (params.n_agents - 1) * std::exp(weight(params, mean_price));
  ctx.demand = expected_demand(params, mean_price, reference_price).value;
  return ctx;
}

double DeviationContext::symmetric_profit() const {
  return mean_price * demand / params.n_agents;
}

double phi_d(const DeviationContext& ctx, double d) {
  const double deviator_price = ctx.mean_price - d;
  if (!(deviator_price > 0.0))
    throw std::domain_error("phi_d requires x̃ − d > 0");
  const double w_sym = weight(ctx.params, ctx.mean_price);
  const double w_dev = weight(ctx.params, deviator_price);
  const double denominator = ctx.n_phi + std::exp(w_dev);
  if (!(denominator > 0.0)) throw std::domain_error("phi_d denominator <= 0");
  return std::exp(w_dev - w_sym) * (ctx.n_phi + std::exp(w_sym)) / denominator;
}

double phi_d_upper_bound(const DeviationContext& ctx, double d) {
  return std::exp(ctx.n_phi * ctx.params.a * d);
}

double gain_polynomial(const DeviationContext& ctx, double d) {
  return (1.0 + ctx.gamma / ctx.demand * d) * (1.0 - d / ctx.mean_price);
}

double gain(const DeviationContext& ctx, double d, PhiMode mode) {
  const Interval range = admissible_range(ctx);
  if (range.empty())
    throw std::domain_error("gain undefined: f(x̃) = 0, admissible range empty");
  if (!(d > range.lo))
    throw std::domain_error("deviation below lower bound −f(x̃)/γ = " +
                            format_number(range.lo));
  if (!(d < range.hi))
    throw std::domain_error("deviation above upper bound x̃ = " +
                            format_number(range.hi));
  const double factor =
      mode == PhiMode::kExact ? phi_d(ctx, d) : phi_d_upper_bound(ctx, d);
  return factor * gain_polynomial(ctx, d);
}

Interval admissible_range(const DeviationContext& ctx) {
  if (!(ctx.demand > 0.0)) return {0.0, 0.0};
  return {-ctx.demand / ctx.gamma, ctx.mean_price};
}

UndercutResult undercut_profitable(const DeviationContext& ctx) {
  UndercutResult result;
  if (!(ctx.demand > 0.0)) return result;
  const double cutoff = ctx.mean_price - ctx.demand / ctx.gamma;
  if (cutoff > 0.0) {
    result.profitable = true;
    result.interval = {0.0, cutoff};
  }
  return result;
}

double undercut_price_threshold(const MarketParams& params,
                                double reference_price) {
  return (params.beta2 * reference_price - params.beta0) /
         (2.0 * (params.beta1 + params.beta2));
}

MarketObservation deviation_observation(const DeviationContext& ctx,
                                        double d) {
  MarketObservation obs;
  obs.reference_price = ctx.reference_price;
  obs.per_agent_prices.assign(ctx.params.n_agents, ctx.mean_price);
  obs.per_agent_prices[0] = ctx.mean_price - d;
  obs.mean_price = ctx.mean_price - d;
  return obs;
}

double deviation_advantage(const DeviationContext& ctx, double d,
                           PhiMode mode) {
  const double factor =
      mode == PhiMode::kExact ? phi_d(ctx, d) : phi_d_upper_bound(ctx, d);
  return ctx.symmetric_profit() * (factor * gain_polynomial(ctx, d) - 1.0);
}

std::vector<double> deviation_grid(const DeviationContext& ctx,
                                   const DeviationOptions& options) {
  const Interval range = admissible_range(ctx);
  std::vector<double> grid;
  if (range.empty() || options.grid_points < 1) return grid;
  const int n = options.grid_points;
  grid.reserve(n);
  if (options.domain == DeviationDomain::kUndercut) {
    // [0, x̃) including the no-deviation point.
    for (int i = 0; i < n; ++i) grid.push_back(ctx.mean_price * i / n);
  } else {
    const double width = range.hi - range.lo;
    for (int i = 0; i < n; ++i)
      grid.push_back(range.lo + (i + 0.5) * width / n);
  }
  return grid;
}

OptimalDeviation optimal_deviation(const DeviationContext& ctx,
                                   const DeviationOptions& options) {
  const auto grid = deviation_grid(ctx, options);
  if (grid.empty()) return {};

  // d = 0 is always available and worth exactly zero.
  double best_d = 0.0;
  double best_value = 0.0;
  std::size_t best_index = grid.size();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double value = deviation_advantage(ctx, grid[i], options.phi);
    if (value > best_value) {
      best_value = value;
      best_d = grid[i];
      best_index = i;
    }
  }

  if (best_index < grid.size()) {
    const Interval range = admissible_range(ctx);
    const double floor_d =
        options.domain == DeviationDomain::kUndercut ? 0.0 : range.lo;
    double lo = best_index > 0 ? grid[best_index - 1] : floor_d;
    double hi = best_index + 1 < grid.size()
                    ? grid[best_index + 1]
                    : 0.5 * (grid[best_index] + range.hi);
    lo = std::max(lo, floor_d);
    double refined_value = 0.0;
    const double refined_d =
        golden_max(ctx, options.phi, lo, hi, options.tolerance, &refined_value);
    if (refined_value > best_value) {
      best_value = refined_value;
      best_d = refined_d;
    }
  }
  return {best_d, std::max(0.0, best_value)};
}

double closed_form_d_star(double c1, double c2) {
  const double radicand = c1 * c1 - c1 + 4.0 * (c2 - 1.0) * c2 - 2.0 * c2;
  if (radicand < 0.0) return kNaN;
  return std::sqrt(radicand) / (2.0 * c2);
}

ClosedFormDeviation closed_form_deviation(const DeviationContext& ctx,
                                          PhiMode mode) {
  ClosedFormDeviation out;
  if (!(ctx.demand > 0.0)) {
    out.d_star = kNaN;
    out.epsilon = kNaN;
    out.radicand = kNaN;
    return out;
  }
  out.c1 = ctx.gamma / ctx.demand - 1.0 / ctx.mean_price;
  out.c2 = ctx.gamma / (ctx.demand * ctx.mean_price);
  out.radicand =
      out.c1 * out.c1 - out.c1 + 4.0 * (out.c2 - 1.0) * out.c2 - 2.0 * out.c2;
  out.d_star = closed_form_d_star(out.c1, out.c2);
  const double lhs = out.c1 * out.c1 + 4.0 * (out.c2 - 1.0) * out.c2;
  const double rhs = out.c1 + 2.0 * out.c2;
  out.zero_condition = std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs));
  const Interval range = admissible_range(ctx);
  if (std::isfinite(out.d_star) && range.contains(out.d_star)) {
    out.epsilon = deviation_advantage(ctx, out.d_star, mode);
  } else {
    out.epsilon = kNaN;
  }
  return out;
}

std::size_t EpsilonSurface::ne_count() const {
  return static_cast<std::size_t>(
      std::count(ne_mask.begin(), ne_mask.end(), true));
}

std::string EpsilonSurface::to_csv() const {
  std::ostringstream out;
  out << "x_mean,p_ref,epsilon,is_ne\n";
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    for (std::size_t j = 0; j < p_grid.size(); ++j) {
      out << format_number(x_grid[i]) << ',' << format_number(p_grid[j]) << ','
          << format_number(at(i, j)) << ',' << (is_ne(i, j) ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

EpsilonSurface epsilon_surface(const MarketParams& params,
                               const std::vector<double>& x_grid,
                               const std::vector<double>& p_grid,
                               double epsilon_threshold,
                               const DeviationOptions& options, int threads) {
  EpsilonSurface surface;
  surface.x_grid = x_grid;
  surface.p_grid = p_grid;
  surface.threshold = epsilon_threshold;
  const std::size_t cells = x_grid.size() * p_grid.size();
  surface.epsilon.assign(cells, 0.0);
  surface.ne_mask.assign(cells, false);

  auto fill_rows = [&](std::size_t first, std::size_t last) {
    for (std::size_t i = first; i < last; ++i) {
      for (std::size_t j = 0; j < p_grid.size(); ++j) {
        const auto ctx = DeviationContext::make(params, x_grid[i], p_grid[j]);
        surface.epsilon[i * p_grid.size() + j] =
            optimal_deviation(ctx, options).epsilon;
      }
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(
      threads < 1 ? 1 : static_cast<std::size_t>(threads), 1,
      std::max<std::size_t>(1, x_grid.size()));
  if (workers == 1) {
    fill_rows(0, x_grid.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (x_grid.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t first = w * chunk;
      const std::size_t last = std::min(x_grid.size(), first + chunk);
      if (first < last) pool.emplace_back(fill_rows, first, last);
    }
    for (auto& t : pool) t.join();
  }
  // vector<bool> is not safe for concurrent writes; mask is set serially.
  for (std::size_t c = 0; c < cells; ++c)
    surface.ne_mask[c] = surface.epsilon[c] < epsilon_threshold;
  return surface;
}

std::optional<RewardBand> ne_reward_band(const MarketParams& params,
                                         double reference_price,
                                         double epsilon_threshold,
                                         const std::vector<double>& x_grid,
                                         const DeviationOptions& options) {
  std::optional<RewardBand> band;
  for (double x : x_grid) {
    const auto ctx = DeviationContext::make(params, x, reference_price);
    if (!(optimal_deviation(ctx, options).epsilon < epsilon_threshold)) continue;
    const double reward = ctx.symmetric_profit();
    if (!band) {
      band = RewardBand{reward, reward};
    } else {
      band->low = std::min(band->low, reward);
      band->high = std::max(band->high, reward);
    }
  }
  return band;
}

std::vector<Interval> merge_bands(const std::vector<RewardBand>& bands) {
  std::vector<Interval> sorted;
  for (const auto& b : bands) sorted.push_back({b.low, b.high});
  std::sort(sorted.begin(), sorted.end(),
            [](const Interval& l, const Interval& r) { return l.lo < r.lo; });
  std::vector<Interval> merged;
  for (const auto& iv : sorted) {
    if (!merged.empty() && iv.lo <= merged.back().hi) {
      merged.back().hi = std::max(merged.back().hi, iv.hi);
    } else {
      merged.push_back(iv);
    }
  }
  return merged;
}

bool in_band_union(const std::vector<Interval>& merged, double value) {
  return std::any_of(merged.begin(), merged.end(), [value](const Interval& iv) {
    return value >= iv.lo && value <= iv.hi;
  });
}

}  // namespace nashpricing
