#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sarange/domain.hpp"
#include "sarange/objectives.hpp"
#include "sarange/rng.hpp"

namespace sarange {

/// reflected: proposals are folded back into the box by cyclic reflection.
/// classical: the same loop without the fold; the chain may leave the box.
enum class Mode { reflected, classical };

/// theorem:    T_i = T_0 * delta^i
/// algorithm1: T_i = T_{i-1} * delta^i (super-geometric decay)
enum class Cooling { theorem, algorithm1 };

std::string_view to_string(Mode m);
std::string_view to_string(Cooling c);
Mode parse_mode(std::string_view name);
Cooling parse_cooling(std::string_view name);

struct AnnealConfig {
  double t_max = 10.0;
  double t_min = 1e-3;
  double delta = 0.95;
  std::size_t inner_iters = 100;
  /// Per-coordinate variance of the Gaussian step. Non-positive means
  /// (0.1 * smallest box width)^2.
  double proposal_variance = 0.0;
  std::uint64_t seed = 0;
  Mode mode = Mode::reflected;
  Cooling cooling = Cooling::theorem;
  bool record_trace = true;

  void validate() const;
};

double effective_variance(const AnnealConfig& cfg, const BoxDomain& domain);

/// Temperatures of every level the loop visits (each strictly above t_min).
std::vector<double> temperature_schedule(const AnnealConfig& cfg);

struct AnnealState {
  Point current;
  double current_value = 0.0;
  Point best;
  double best_value = 0.0;
  /// Best point among visited states inside the box. In reflected mode this
  /// always coincides with best.
  Point best_feasible;
  double best_feasible_value = 0.0;
  double temperature = 0.0;
  std::size_t iteration = 0;
  std::size_t evaluations = 0;
};

struct TraceRecord {
  std::size_t iteration;
  double temperature;
  Point point;
  double value;
  bool accepted;
  double best_value;
};

using Trace = std::vector<TraceRecord>;

/// x + g with g ~ N(0, variance * I). No reflection.
Point propose(std::span<const double> x, double variance, Rng& rng);

/// min{1, exp(-delta_f / T)}. Throws for temperature <= 0.
double acceptance_probability(double delta_f, double temperature);

/// Draws X_0 uniformly on the box and evaluates it once.
AnnealState initial_state(const Objective& f, const BoxDomain& domain,
                          double temperature, Rng& rng);

/// One propose / reflect / accept transition at state.temperature. Evaluates
/// the objective exactly once. Returns whether the proposal was accepted.
bool step(AnnealState& state, const Objective& f, const BoxDomain& domain,
          const AnnealConfig& cfg, Rng& rng);

struct AnnealResult {
  Point best;
  double best_value = 0.0;
  Point best_feasible;
  double best_feasible_value = 0.0;
  std::size_t evaluations = 0;
  std::size_t levels = 0;
  std::uint64_t seed = 0;
  Trace trace;
};

/// The full annealing loop: N inner steps per temperature level while
/// T_i > t_min. Uses 1 + N * levels objective evaluations.
AnnealResult run(const Objective& f, const BoxDomain& domain,
                 const AnnealConfig& cfg);

struct ChainSummary {
  double best_value = 0.0;
  /// First iteration at which the incumbent reached its final value.
  std::size_t iterations_to_best = 0;
  /// Largest distance outside the box over all visited states.
  double max_excursion = 0.0;
  std::size_t outside_count = 0;
};

ChainSummary summarize(const AnnealResult& result, const BoxDomain& domain);

/// First recorded iteration whose incumbent is within tol of target; nullopt
/// if the chain never gets there.
std::optional<std::size_t> iterations_to_within(const AnnealResult& result,
                                                double target, double tol);

/// Stationary density exp(-(F(y) - F_min) / T) / C on a uniform grid over a
/// one-dimensional box, normalized by the trapezoidal rule.
struct GibbsTable {
  std::vector<double> x;
  std::vector<double> density;
  double normalization = 0.0;
};

GibbsTable gibbs_density(const Objective& f, const BoxDomain& domain,
                         double temperature, std::size_t grid_n);

/// CSV: iter,temperature,x1..xd,value,accepted,best_value
std::string trace_csv(const Trace& trace, std::size_t dim);

}  // namespace sarange
