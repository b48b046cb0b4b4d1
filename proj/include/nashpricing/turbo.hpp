#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nashpricing/gaussian_process.hpp"

namespace nashpricing {

// Partition of the search dimensions into probability blocks.
struct SimplexLayout {
  std::vector<int> block_sizes;

  static SimplexLayout uniform_blocks(int n_blocks, int block_size);
  int dimension() const;
  int n_blocks() const { return static_cast<int>(block_sizes.size()); }
  int block_offset(int block) const;
};

// Each block divided by its sum; an all-zero block becomes uniform.
std::vector<double> normalize_candidate(const SimplexLayout& layout,
                                        std::span<const double> raw);
// Largest |block sum − 1|, or infinity when a coordinate is negative.
double simplex_block_error(const SimplexLayout& layout,
                           std::span<const double> point);

enum class OptimizeMode { kMinimize, kMaximize };

struct TurboOptions {
  int max_evals = 10;
  int batch = 4;
  int n_regions = 1;
  double length_init = 0.4;
  double length_min = 0.01;
  double length_max = 1.0;
  int failure_tolerance = 3;
  int success_tolerance = 2;
  int candidates_per_dim = 50;
  int max_gp_points = 100;
  GpOptions gp;
};

struct TrustRegionState {
  std::vector<double> center;
  double side_length = 0.4;
  int success_count = 0;
  int failure_count = 0;
  int restarts = 0;
  std::vector<std::vector<double>> archive_points;
  std::vector<double> archive_values;
  std::vector<std::vector<double>> pending_initial;
};

struct EvalRecord {
  int round = 0;
  int eval_index = 0;
  int region = 0;
  double value = 0.0;      // NaN when the objective was not finite
  double incumbent = 0.0;  // best finite value so far
};

struct TurboResult {
  std::vector<double> best_point;
  double best_value = 0.0;  // NaN when no evaluation was finite
  std::vector<EvalRecord> log;
  std::vector<TrustRegionState> regions;
  int evaluations = 0;
  int rounds = 0;
  int discarded = 0;
  // Points handed to the objective that broke the block invariant.
  int guard_violations = 0;
  double max_block_error = 0.0;

  // round,eval_index,value,incumbent
  std::string eval_log_csv() const;
};

using Objective = std::function<double(std::span<const double>)>;

// Trust-region Bayesian optimization over products of simplexes. The first
// round evaluates `initial_points` (normalized) followed by a Latin hypercube
// design; later rounds pick candidates by Thompson sampling from a GP fit to
// each region's archive. Exactly ceil(max_evals / batch) rounds.
TurboResult optimize(const Objective& objective, const SimplexLayout& layout,
                     const TurboOptions& options, std::uint64_t seed,
                     OptimizeMode mode,
                     const std::vector<std::vector<double>>& initial_points = {});

// Points of a Latin hypercube on [0,1]^dim, normalized into the layout.
std::vector<std::vector<double>> latin_hypercube(const SimplexLayout& layout,
                                                 int count, Rng& rng);

}  // namespace nashpricing
