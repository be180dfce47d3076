#include "sarange/range.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include "sarange/error.hpp"

namespace sarange {

namespace {

template <typename Task>
void parallel_for(std::size_t count, std::size_t threads, Task&& task) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  std::vector<std::exception_ptr> errors(count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            task(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  // Lowest index wins so the reported failure does not depend on scheduling.
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::vector<AnnealResult> run_chains(const Objective& f, const BoxDomain& domain,
                                     const std::vector<AnnealConfig>& configs,
                                     std::size_t threads) {
  std::vector<AnnealResult> results(configs.size());
  parallel_for(configs.size(), threads,
               [&](std::size_t i) { results[i] = run(f, domain, configs[i]); });
  return results;
}

RangeResult estimate_range(const Objective& f, const BoxDomain& domain,
                           const AnnealConfig& cfg, std::size_t n_seeds,
                           std::size_t threads) {
  require(n_seeds >= 1, "n_seeds must be at least 1");
  cfg.validate();
  require_dimension(domain.dim(), f.dim(), "estimate_range: domain vs objective");

  RangeResult result;
  std::vector<AnnealConfig> configs(n_seeds, cfg);
  for (std::size_t k = 0; k < n_seeds; ++k) {
    configs[k].seed = cfg.seed + k;
    result.seeds_used.push_back(configs[k].seed);
  }

  const Objective negated = f.negated();
  std::vector<AnnealResult> chains(2 * n_seeds);
  parallel_for(chains.size(), threads, [&](std::size_t i) {
    const bool is_max = i >= n_seeds;
    chains[i] = run(is_max ? negated : f, domain, configs[i % n_seeds]);
  });
  result.min_chains.assign(std::make_move_iterator(chains.begin()),
                           std::make_move_iterator(chains.begin() +
                                                   static_cast<std::ptrdiff_t>(n_seeds)));
  result.max_chains.assign(std::make_move_iterator(chains.begin() +
                                                   static_cast<std::ptrdiff_t>(n_seeds)),
                           std::make_move_iterator(chains.end()));

  // Incumbents are restricted to feasible states (identical to the plain
  // incumbent in reflected mode).
  const AnnealResult* best_min = &result.min_chains.front();
  const AnnealResult* best_max = &result.max_chains.front();
  for (std::size_t k = 0; k < n_seeds; ++k) {
    result.eval_count += result.min_chains[k].evaluations +
                         result.max_chains[k].evaluations;
    if (result.min_chains[k].best_feasible_value < best_min->best_feasible_value) {
      best_min = &result.min_chains[k];
    }
    if (result.max_chains[k].best_feasible_value < best_max->best_feasible_value) {
      best_max = &result.max_chains[k];
    }
  }
  result.x_min = best_min->best_feasible;
  result.x_max = best_max->best_feasible;

  // Witnesses are re-evaluated; a mismatch means the objective is not
  // deterministic.
  result.f_min = f(result.x_min);
  result.f_max = f(result.x_max);
  result.eval_count += 2;
  if (result.f_min != best_min->best_feasible_value ||
      result.f_max != -best_max->best_feasible_value) {
    throw Error(ErrorCode::numerical,
                "re-evaluation of the range witnesses disagrees with the "
                "chains; objective is not deterministic");
  }
  return result;
}

double grid_coordinate(const Interval& iv, std::size_t k, std::size_t n) {
  if (k + 1 == n) return iv.high;
  return iv.low + (iv.width() * static_cast<double>(k)) / static_cast<double>(n - 1);
}

OracleResult grid_oracle(const Objective& f, const BoxDomain& domain,
                         std::size_t points_per_dim) {
  require(points_per_dim >= 2, "grid oracle needs at least 2 points per dimension");
  require_dimension(domain.dim(), f.dim(), "grid_oracle: domain vs objective");
  const std::size_t dim = domain.dim();

  std::size_t total = 1;
  for (std::size_t j = 0; j < dim; ++j) {
    if (total > kOracleBudget / points_per_dim) {
      throw Error(ErrorCode::budget_exceeded,
                  "grid of " + std::to_string(points_per_dim) + "^" +
                      std::to_string(dim) + " points exceeds the budget of " +
                      std::to_string(kOracleBudget) +
                      " evaluations; use fewer points per dimension");
    }
    total *= points_per_dim;
  }

  std::vector<std::vector<double>> axes(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    axes[j].resize(points_per_dim);
    for (std::size_t k = 0; k < points_per_dim; ++k) {
      axes[j][k] = grid_coordinate(domain[j], k, points_per_dim);
    }
  }

  OracleResult out;
  out.points_per_dim = points_per_dim;
  out.evaluations = total;

  constexpr std::size_t kChunk = 8192;
  std::vector<std::size_t> index(dim, 0);
  std::vector<double> points;
  std::vector<double> values;
  bool first = true;
  for (std::size_t start = 0; start < total; start += kChunk) {
    const std::size_t n = std::min(kChunk, total - start);
    points.resize(n * dim);
    values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < dim; ++j) points[i * dim + j] = axes[j][index[j]];
      // Odometer: last coordinate varies fastest.
      for (std::size_t j = dim; j-- > 0;) {
        if (++index[j] < points_per_dim) break;
        index[j] = 0;
      }
    }
    f.evaluate_batch(points, values);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = values[i];
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::numerical, "grid oracle: objective returned a non-finite value");
      }
      const std::span<const double> p(points.data() + i * dim, dim);
      if (first || v < out.min_value) {
        out.min_value = v;
        out.min_point.assign(p.begin(), p.end());
        out.min_points.clear();
      }
      if (first || v > out.max_value) {
        out.max_value = v;
        out.max_point.assign(p.begin(), p.end());
        out.max_points.clear();
      }
      first = false;
      if (v == out.min_value && out.min_points.size() < OracleResult::kMaxTies) {
        out.min_points.emplace_back(p.begin(), p.end());
      }
      if (v == out.max_value && out.max_points.size() < OracleResult::kMaxTies) {
        out.max_points.emplace_back(p.begin(), p.end());
      }
    }
  }
  return out;
}

}  // namespace sarange
