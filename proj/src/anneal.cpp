#include "sarange/anneal.hpp"

#include <algorithm>
#include <cmath>

#include "sarange/error.hpp"
#include "sarange/report.hpp"

namespace sarange {

std::string_view to_string(Mode m) {
  return m == Mode::reflected ? "reflected" : "classical";
}

std::string_view to_string(Cooling c) {
  return c == Cooling::theorem ? "theorem" : "algorithm1";
}

Mode parse_mode(std::string_view name) {
  if (name == "reflected") return Mode::reflected;
  if (name == "classical") return Mode::classical;
  throw Error(ErrorCode::invalid_argument,
              "unknown mode '" + std::string(name) + "'; use reflected|classical");
}

Cooling parse_cooling(std::string_view name) {
  if (name == "theorem") return Cooling::theorem;
  if (name == "algorithm1") return Cooling::algorithm1;
  throw Error(ErrorCode::invalid_argument,
              "unknown cooling '" + std::string(name) +
                  "'; use theorem|algorithm1");
}

void AnnealConfig::validate() const {
  require(std::isfinite(t_max) && t_max > 0.0, "t_max must be positive");
  require(std::isfinite(t_min) && t_min > 0.0, "t_min must be positive");
  require(t_min < t_max, "t_min must be below t_max");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  require(inner_iters >= 1, "inner_iters must be at least 1");
  require(std::isfinite(proposal_variance), "proposal_variance must be finite");
}

double effective_variance(const AnnealConfig& cfg, const BoxDomain& domain) {
  if (cfg.proposal_variance > 0.0) return cfg.proposal_variance;
  const double scale = 0.1 * domain.min_width();
  return scale * scale;
}

std::vector<double> temperature_schedule(const AnnealConfig& cfg) {
  cfg.validate();
  std::vector<double> temps;
  double t = cfg.t_max;
  for (std::size_t i = 0; t > cfg.t_min; ++i) {
    temps.push_back(t);
    const auto next = static_cast<double>(i + 1);
    if (cfg.cooling == Cooling::theorem) {
      t = cfg.t_max * std::pow(cfg.delta, next);
    } else {
      t = t * std::pow(cfg.delta, next);
    }
  }
  return temps;
}

Point propose(std::span<const double> x, double variance, Rng& rng) {
  require(variance > 0.0, "proposal variance must be positive");
  std::normal_distribution<double> step(0.0, std::sqrt(variance));
  Point y(x.begin(), x.end());
  for (double& v : y) v += step(rng);
  return y;
}

double acceptance_probability(double delta_f, double temperature) {
  if (!(temperature > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "temperature must be positive");
  }
  if (delta_f <= 0.0) return 1.0;
  return std::exp(-delta_f / temperature);
}

AnnealState initial_state(const Objective& f, const BoxDomain& domain,
                          double temperature, Rng& rng) {
  require_dimension(domain.dim(), f.dim(), "anneal: domain vs objective");
  AnnealState s;
  s.current = sample_uniform(domain, rng);
  s.current_value = f(s.current);
  s.best = s.current;
  s.best_value = s.current_value;
  s.best_feasible = s.current;
  s.best_feasible_value = s.current_value;
  s.temperature = temperature;
  s.evaluations = 1;
  return s;
}

bool step(AnnealState& state, const Objective& f, const BoxDomain& domain,
          const AnnealConfig& cfg, Rng& rng) {
  Point y = propose(state.current, effective_variance(cfg, domain), rng);
  if (cfg.mode == Mode::reflected) reflect_in_place(domain, y);
  const double fy = f(y);
  ++state.evaluations;
  ++state.iteration;

  const double q = acceptance_probability(fy - state.current_value,
                                          state.temperature);
  // The uniform is drawn on every step so that two chains sharing a seed
  // consume identical random streams.
  const double u = uniform01(rng);
  const bool accepted = u <= q;
  if (accepted) {
    state.current = std::move(y);
    state.current_value = fy;
  }
  if (state.current_value < state.best_value) {
    state.best = state.current;
    state.best_value = state.current_value;
  }
  if (state.current_value < state.best_feasible_value &&
      (cfg.mode == Mode::reflected || contains(domain, state.current))) {
    state.best_feasible = state.current;
    state.best_feasible_value = state.current_value;
  }
  return accepted;
}

AnnealResult run(const Objective& f, const BoxDomain& domain,
                 const AnnealConfig& cfg) {
  cfg.validate();
  require_dimension(domain.dim(), f.dim(), "anneal: domain vs objective");
  const auto temps = temperature_schedule(cfg);
  Rng rng(cfg.seed);
  AnnealState state = initial_state(f, domain, cfg.t_max, rng);

  AnnealResult result;
  result.seed = cfg.seed;
  result.levels = temps.size();
  if (cfg.record_trace) result.trace.reserve(temps.size() * cfg.inner_iters);
  for (double t : temps) {
    state.temperature = t;
    for (std::size_t k = 0; k < cfg.inner_iters; ++k) {
      const bool accepted = step(state, f, domain, cfg, rng);
      if (cfg.record_trace) {
        result.trace.push_back({state.iteration, t, state.current,
                                state.current_value, accepted,
                                state.best_value});
      }
    }
  }
  result.best = std::move(state.best);
  result.best_value = state.best_value;
  result.best_feasible = std::move(state.best_feasible);
  result.best_feasible_value = state.best_feasible_value;
  result.evaluations = state.evaluations;
  return result;
}

ChainSummary summarize(const AnnealResult& result, const BoxDomain& domain) {
  ChainSummary s;
  s.best_value = result.best_value;
  for (const auto& rec : result.trace) {
    const double e = excursion(domain, rec.point);
    if (e > 0.0) ++s.outside_count;
    s.max_excursion = std::max(s.max_excursion, e);
    if (s.iterations_to_best == 0 && rec.best_value == result.best_value) {
      s.iterations_to_best = rec.iteration;
    }
  }
  return s;
}

std::optional<std::size_t> iterations_to_within(const AnnealResult& result,
                                                double target, double tol) {
  if (result.trace.empty()) {
    if (std::abs(result.best_value - target) <= tol) return 0;
    return std::nullopt;
  }
  for (const auto& rec : result.trace) {
    if (std::abs(rec.best_value - target) <= tol) return rec.iteration;
  }
  return std::nullopt;
}

GibbsTable gibbs_density(const Objective& f, const BoxDomain& domain,
                         double temperature, std::size_t grid_n) {
  require(domain.dim() == 1, "gibbs_density: domain must be one-dimensional");
  require(grid_n >= 100, "gibbs_density: grid_n must be at least 100");
  require(temperature > 0.0, "gibbs_density: temperature must be positive");
  const auto iv = domain[0];
  GibbsTable table;
  table.x.resize(grid_n);
  std::vector<double> values(grid_n);
  for (std::size_t i = 0; i < grid_n; ++i) {
    const double x = i + 1 == grid_n
                         ? iv.high
                         : iv.low + iv.width() * static_cast<double>(i) /
                                        static_cast<double>(grid_n - 1);
    table.x[i] = x;
    values[i] = f(std::span<const double>(&table.x[i], 1));
  }
  const double f_min = *std::min_element(values.begin(), values.end());
  table.density.resize(grid_n);
  for (std::size_t i = 0; i < grid_n; ++i) {
    table.density[i] = std::exp(-(values[i] - f_min) / temperature);
  }
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < grid_n; ++i) {
    integral += 0.5 * (table.density[i] + table.density[i + 1]) *
                (table.x[i + 1] - table.x[i]);
  }
  for (double& d : table.density) d /= integral;
  table.normalization = 1.0 / integral;
  return table;
}

std::string trace_csv(const Trace& trace, std::size_t dim) {
  std::string out = "iter,temperature,";
  for (std::size_t j = 0; j < dim; ++j) out += "x" + std::to_string(j + 1) + ",";
  out += "value,accepted,best_value\n";
  for (const auto& rec : trace) {
    out += std::to_string(rec.iteration);
    out += ',';
    append_number(out, rec.temperature);
    out += ',';
    for (double v : rec.point) {
      append_number(out, v);
      out += ',';
    }
    append_number(out, rec.value);
    out += rec.accepted ? ",1," : ",0,";
    append_number(out, rec.best_value);
    out += '\n';
  }
  return out;
}

}  // namespace sarange
