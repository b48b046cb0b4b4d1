#include "nashpricing/turbo.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "nashpricing/io.hpp"

namespace nashpricing {

SimplexLayout SimplexLayout::uniform_blocks(int n_blocks, int block_size) {
  if (n_blocks < 1 || block_size < 1)
    throw std::invalid_argument("layout needs positive block count and size");
  return SimplexLayout{std::vector<int>(n_blocks, block_size)};
}

int SimplexLayout::dimension() const {
  return std::accumulate(block_sizes.begin(), block_sizes.end(), 0);
}

int SimplexLayout::block_offset(int block) const {
  return std::accumulate(block_sizes.begin(), block_sizes.begin() + block, 0);
}

std::vector<double> normalize_candidate(const SimplexLayout& layout,
                                        std::span<const double> raw) {
  if (static_cast<int>(raw.size()) != layout.dimension())
    throw std::invalid_argument("candidate dimension does not match layout");
  std::vector<double> out(raw.begin(), raw.end());
  int offset = 0;
  for (int size : layout.block_sizes) {
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
      out[offset + i] = std::max(0.0, out[offset + i]);
      sum += out[offset + i];
    }
    for (int i = 0; i < size; ++i)
      out[offset + i] = sum > 0.0 ? out[offset + i] / sum : 1.0 / size;
    offset += size;
  }
  return out;
}

double simplex_block_error(const SimplexLayout& layout,
                           std::span<const double> point) {
  double worst = 0.0;
  int offset = 0;
  for (int size : layout.block_sizes) {
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
      const double v = point[offset + i];
      if (!(v >= 0.0)) return std::numeric_limits<double>::infinity();
      sum += v;
    }
    worst = std::max(worst, std::abs(sum - 1.0));
    offset += size;
  }
  return worst;
}

std::vector<std::vector<double>> latin_hypercube(const SimplexLayout& layout,
                                                 int count, Rng& rng) {
  const int dim = layout.dimension();
  std::vector<std::vector<double>> raw(count, std::vector<double>(dim));
  std::vector<int> perm(count);
  for (int j = 0; j < dim; ++j) {
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = count - 1; i > 0; --i)
      std::swap(perm[i], perm[rng.uniform_int(i + 1)]);
    for (int i = 0; i < count; ++i)
      raw[i][j] = (perm[i] + rng.uniform()) / count;
  }
  for (auto& p : raw) p = normalize_candidate(layout, p);
  return raw;
}

std::string TurboResult::eval_log_csv() const {
  std::ostringstream out;
  out << "round,eval_index,value,incumbent\n";
  for (const auto& r : log)
    out << r.round << ',' << r.eval_index << ',' << format_number(r.value)
        << ',' << format_number(r.incumbent) << '\n';
  return out.str();
}

namespace {

struct Candidate {
  std::vector<double> point;
  int region = 0;
  double score = 0.0;  // sampled value in maximization orientation
  bool from_model = false;
};

void restart_region(TrustRegionState& region, const SimplexLayout& layout,
                    const TurboOptions& options, int init_size, Rng& rng) {
  region.center.clear();
  region.side_length = options.length_init;
  region.success_count = 0;
  region.failure_count = 0;
  region.archive_points.clear();
  region.archive_values.clear();
  region.pending_initial = latin_hypercube(layout, init_size, rng);
}

// Best archived point in maximization orientation.
int best_index(const std::vector<double>& values) {
  int best = -1;
  for (int i = 0; i < static_cast<int>(values.size()); ++i)
    if (best < 0 || values[i] > values[best]) best = i;
  return best;
}

std::vector<Candidate> thompson_candidates(const TrustRegionState& region,
                                           int region_index,
                                           const SimplexLayout& layout,
                                           const TurboOptions& options,
                                           Rng& rng) {
  const int dim = layout.dimension();
  const int n_cand = std::max(1, options.candidates_per_dim * dim);
  const double p_perturb = std::min(1.0, 20.0 / dim);
  const double half = region.side_length / 2.0;

  std::vector<Candidate> cands(n_cand);
  for (auto& c : cands) {
    std::vector<double> raw = region.center;
    bool any = false;
    for (int j = 0; j < dim; ++j) {
      if (rng.uniform() < p_perturb) {
        raw[j] = std::clamp(rng.uniform(region.center[j] - half,
                                        region.center[j] + half),
                            0.0, 1.0);
        any = true;
      }
    }
    if (!any) {
      const int j = static_cast<int>(rng.uniform_int(dim));
      raw[j] = std::clamp(
          rng.uniform(region.center[j] - half, region.center[j] + half), 0.0,
          1.0);
    }
    c.point = normalize_candidate(layout, raw);
    c.region = region_index;
    c.from_model = true;
  }

  // Local model: the archive points nearest the center.
  const int n_arch = static_cast<int>(region.archive_points.size());
  std::vector<int> order(n_arch);
  std::iota(order.begin(), order.end(), 0);
  if (n_arch > options.max_gp_points) {
    auto dist = [&](int i) {
      double s = 0.0;
      for (int j = 0; j < dim; ++j) {
        const double d = region.archive_points[i][j] - region.center[j];
        s += d * d;
      }
      return s;
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return dist(x) < dist(y); });
    order.resize(options.max_gp_points);
  }
  Eigen::MatrixXd x(order.size(), dim);
  Eigen::VectorXd y(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    for (int j = 0; j < dim; ++j) x(r, j) = region.archive_points[order[r]][j];
    y(r) = region.archive_values[order[r]];
  }
  Eigen::MatrixXd q(n_cand, dim);
  for (int r = 0; r < n_cand; ++r)
    for (int j = 0; j < dim; ++j) q(r, j) = cands[r].point[j];

  try {
    const GaussianProcess gp = GaussianProcess::fit(x, y, options.gp);
    const Eigen::VectorXd draw = gp.sample(q, rng);
    for (int r = 0; r < n_cand; ++r) cands[r].score = draw(r);
  } catch (const std::runtime_error& e) {
    std::cerr << "turbo: surrogate fit failed (" << e.what()
              << "), using random candidates\n";
    for (auto& c : cands) c.score = rng.uniform();
  }
  return cands;
}

}  // namespace

TurboResult optimize(const Objective& objective, const SimplexLayout& layout,
                     const TurboOptions& options, std::uint64_t seed,
                     OptimizeMode mode,
                     const std::vector<std::vector<double>>& initial_points) {
  if (options.batch < 1 || options.max_evals < options.batch)
    throw std::invalid_argument("turbo needs max_evals >= batch >= 1");
  if (options.n_regions < 1)
    throw std::invalid_argument("turbo needs at least one trust region");
  const int dim = layout.dimension();
  const double sign = mode == OptimizeMode::kMaximize ? 1.0 : -1.0;
  Rng rng(seed);

  TurboResult result;
  result.best_value = std::numeric_limits<double>::quiet_NaN();
  result.regions.resize(options.n_regions);
  const int init_size = std::max(2, options.batch);
  for (auto& region : result.regions)
    restart_region(region, layout, options, init_size, rng);
  if (!initial_points.empty()) {
    auto& first = result.regions.front().pending_initial;
    std::vector<std::vector<double>> design;
    for (const auto& p : initial_points) {
      if (static_cast<int>(p.size()) != dim)
        throw std::invalid_argument("initial point dimension mismatch");
      design.push_back(normalize_candidate(layout, p));
    }
    // Forced points take the place of design points.
    for (std::size_t i = 0; design.size() < static_cast<std::size_t>(init_size); ++i)
      design.push_back(first[i]);
    first = std::move(design);
  }

  double best_oriented = -std::numeric_limits<double>::infinity();
  const int rounds = (options.max_evals + options.batch - 1) / options.batch;
  for (int round = 0; round < rounds; ++round) {
    const int slots =
        std::min(options.batch, options.max_evals - result.evaluations);
    std::vector<Candidate> chosen;

    for (int r = 0; r < options.n_regions && static_cast<int>(chosen.size()) < slots; ++r) {
      auto& pending = result.regions[r].pending_initial;
      while (!pending.empty() && static_cast<int>(chosen.size()) < slots) {
        chosen.push_back({pending.front(), r, 0.0, false});
        pending.erase(pending.begin());
      }
    }
    if (static_cast<int>(chosen.size()) < slots) {
      std::vector<Candidate> pool;
      for (int r = 0; r < options.n_regions; ++r) {
        auto& region = result.regions[r];
        if (!region.pending_initial.empty()) continue;
        if (region.archive_points.size() < 2) {
          region.pending_initial = latin_hypercube(layout, init_size, rng);
          continue;
        }
        if (region.center.empty())
          region.center = region.archive_points[best_index(region.archive_values)];
        auto cands = thompson_candidates(region, r, layout, options, rng);
        pool.insert(pool.end(), std::make_move_iterator(cands.begin()),
                    std::make_move_iterator(cands.end()));
      }
      const std::size_t take =
          std::min(pool.size(), static_cast<std::size_t>(slots - chosen.size()));
      std::partial_sort(pool.begin(), pool.begin() + take, pool.end(),
                        [](const Candidate& a, const Candidate& b) {
                          return a.score > b.score ||
                                 (a.score == b.score && a.region < b.region);
                        });
      pool.resize(take);
      for (auto& c : pool) {
        if (static_cast<int>(chosen.size()) >= slots) break;
        chosen.push_back(std::move(c));
      }
      // Regions that were all initializing fill the rest from fresh designs.
      for (int r = 0; static_cast<int>(chosen.size()) < slots; r = (r + 1) % options.n_regions) {
        auto& pending = result.regions[r].pending_initial;
        if (pending.empty()) pending = latin_hypercube(layout, init_size, rng);
        chosen.push_back({pending.front(), r, 0.0, false});
        pending.erase(pending.begin());
      }
    }

    std::vector<double> round_best(options.n_regions,
                                   -std::numeric_limits<double>::infinity());
    std::vector<double> previous_best(options.n_regions,
                                      -std::numeric_limits<double>::infinity());
    for (int r = 0; r < options.n_regions; ++r)
      for (double v : result.regions[r].archive_values)
        previous_best[r] = std::max(previous_best[r], v);
    std::vector<bool> region_touched(options.n_regions, false);
    std::vector<bool> region_from_model(options.n_regions, false);
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      const auto& c = chosen[i];
      const double err = simplex_block_error(layout, c.point);
      result.max_block_error = std::max(result.max_block_error, err);
      if (!(err <= 1e-12)) ++result.guard_violations;

      const double value = objective(c.point);
      ++result.evaluations;
      EvalRecord rec;
      rec.round = round;
      rec.eval_index = result.evaluations - 1;
      rec.region = c.region;
      rec.value = value;
      if (!std::isfinite(value)) {
        ++result.discarded;
        rec.value = std::numeric_limits<double>::quiet_NaN();
        std::cerr << "turbo: non-finite objective at evaluation "
                  << rec.eval_index << ", discarded\n";
        if (result.best_point.empty()) result.best_point = c.point;
      } else {
        const double oriented = sign * value;
        auto& region = result.regions[c.region];
        region.archive_points.push_back(c.point);
        region.archive_values.push_back(oriented);
        region_touched[c.region] = true;
        if (c.from_model) region_from_model[c.region] = true;
        round_best[c.region] = std::max(round_best[c.region], oriented);
        if (oriented > best_oriented) {
          best_oriented = oriented;
          result.best_point = c.point;
          result.best_value = value;
        }
      }
      rec.incumbent = std::isfinite(best_oriented)
                          ? sign * best_oriented
                          : std::numeric_limits<double>::quiet_NaN();
      result.log.push_back(rec);
    }

    for (int r = 0; r < options.n_regions; ++r) {
      auto& region = result.regions[r];
      if (!region_touched[r]) continue;
      const int bi = best_index(region.archive_values);
      if (region.center.empty() || !region_from_model[r]) {
        // Initial design just landed: center on its best point.
        if (region.pending_initial.empty() && bi >= 0)
          region.center = region.archive_points[bi];
        continue;
      }
      if (round_best[r] > previous_best[r] + 1e-3 * std::abs(previous_best[r])) {
        ++region.success_count;
        region.failure_count = 0;
      } else {
        ++region.failure_count;
        region.success_count = 0;
      }
      if (region.success_count >= options.success_tolerance) {
        region.side_length = std::min(options.length_max, 2.0 * region.side_length);
        region.success_count = 0;
      } else if (region.failure_count >= options.failure_tolerance) {
        region.side_length /= 2.0;
        region.failure_count = 0;
      }
      region.center = region.archive_points[bi];
      if (region.side_length < options.length_min) {
        const int restarts = region.restarts + 1;
        restart_region(region, layout, options, init_size, rng);
        region.restarts = restarts;
      }
    }
    ++result.rounds;
  }
  return result;
}

}  // namespace nashpricing
