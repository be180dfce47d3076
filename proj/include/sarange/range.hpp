#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sarange/anneal.hpp"
#include "sarange/domain.hpp"
#include "sarange/objectives.hpp"

namespace sarange {

/// [f_min, f_max] with witnesses. The interval is the hull of values actually
/// observed, so it is an inner approximation of the true range.
struct RangeResult {
  double f_min = 0.0;
  double f_max = 0.0;
  Point x_min;
  Point x_max;
  std::size_t eval_count = 0;
  std::vector<std::uint64_t> seeds_used;
  /// One chain per seed minimizing f, and one per seed minimizing -f.
  std::vector<AnnealResult> min_chains;
  std::vector<AnnealResult> max_chains;
};

/// Runs n_seeds annealing chains on f and on -f with seeds cfg.seed + k. The
/// -f chains reuse the same seeds, so swapping f for -f swaps and negates the
/// interval exactly. Chains run on up to `threads` worker threads (0 = one
/// per hardware thread); results do not depend on the thread count.
RangeResult estimate_range(const Objective& f, const BoxDomain& domain,
                           const AnnealConfig& cfg, std::size_t n_seeds,
                           std::size_t threads = 0);

/// Runs one chain per config on worker threads and returns results in input
/// order.
std::vector<AnnealResult> run_chains(const Objective& f, const BoxDomain& domain,
                                     const std::vector<AnnealConfig>& configs,
                                     std::size_t threads = 0);

struct OracleResult {
  double min_value = 0.0;
  Point min_point;
  double max_value = 0.0;
  Point max_point;
  /// Every grid point attaining min_value exactly (capped at kMaxTies).
  std::vector<Point> min_points;
  std::vector<Point> max_points;
  std::size_t points_per_dim = 0;
  std::size_t evaluations = 0;

  static constexpr std::size_t kMaxTies = 1024;
};

inline constexpr std::size_t kOracleBudget = 100'000'000;

/// Exhaustive evaluation on the uniform tensor grid with both endpoints in
/// every dimension. The first coordinate varies slowest; the first grid point
/// reaching an extreme is reported.
OracleResult grid_oracle(const Objective& f, const BoxDomain& domain,
                         std::size_t points_per_dim);

/// Coordinate k of the grid along interval iv (k = n - 1 lands exactly on
/// the upper bound).
double grid_coordinate(const Interval& iv, std::size_t k, std::size_t n);

}  // namespace sarange
