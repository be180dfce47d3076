// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. Pass criterion numbers to run a subset.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sarange/sarange.hpp"

using namespace sarange;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---- 1: reflection ------------------------------------------------------------

Outcome reflection_properties() {
  const auto t0 = Clock::now();
  Rng rng(20240601);
  constexpr double slack = 1e-12;
  std::size_t closure = 0, identity = 0, periodic = 0, mirror = 0;
  const std::size_t cases = 1'000'000;
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t dim = 1 + static_cast<std::size_t>(uniform01(rng) * 4);
    std::vector<Interval> bounds(dim);
    for (auto& iv : bounds) {
      iv.low = uniform01(rng) * 20 - 10;
      iv.high = iv.low + 1e-3 + uniform01(rng) * 10;
    }
    const BoxDomain box(bounds);
    Point y(dim), inside(dim), shifted(dim), left(dim), right(dim);
    std::vector<double> offset(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      const auto& iv = bounds[j];
      const double w = iv.width();
      y[j] = iv.low + (uniform01(rng) * 22 - 11) * w;
      inside[j] = iv.low + uniform01(rng) * w;
      const int k = static_cast<int>(uniform01(rng) * 11) - 5;
      shifted[j] = y[j] + 2.0 * w * k;
      offset[j] = uniform01(rng) * 3 * w;
      left[j] = iv.low - offset[j];
      right[j] = iv.low + offset[j];
    }
    const Point r = reflect(box, y);
    closure += contains(box, r);
    identity += reflect(box, inside) == inside;

    const Point rs = reflect(box, shifted);
    bool same = true;
    for (std::size_t j = 0; j < dim; ++j) same = same && std::abs(rs[j] - r[j]) <= slack;
    periodic += same;

    // Mirror symmetry about the lower face, then about the upper face.
    const Point rl = reflect(box, left), rr = reflect(box, right);
    bool sym = true;
    for (std::size_t j = 0; j < dim; ++j) {
      sym = sym && std::abs(rl[j] - rr[j]) <= slack;
      const double up = bounds[j].high;
      sym = sym && std::abs(reflect_coordinate(up + offset[j], bounds[j]) -
                            reflect_coordinate(up - offset[j], bounds[j])) <= slack;
    }
    mirror += sym;
  }
  const double secs = seconds_since(t0);
  const bool pass = closure == cases && identity == cases && periodic == cases &&
                    mirror == cases && secs < 10.0;
  return {pass, fmt("%zu cases: closure %zu, identity %zu, periodicity %zu, mirror %zu; %.1f s "
                    "(limit 10 s)",
                    cases, closure, identity, periodic, mirror, secs)};
}

// ---- 2: acceptance rule -------------------------------------------------------

Outcome acceptance_rule() {
  Rng rng(7);
  std::size_t ok = 0, underflow = 0, underflow_ok = 0;
  double worst = 0.0;
  const std::size_t n = 100'000;
  for (std::size_t i = 0; i < n; ++i) {
    const double fx = uniform01(rng) * 200 - 100;
    const double fy = uniform01(rng) * 200 - 100;
    const double t = std::exp(uniform01(rng) * 20 - 10);
    // e^{(1/T) min{0, F(x) - F(y)}} evaluated in extended precision.
    const long double ref = std::exp(std::min(0.0L, static_cast<long double>(fx) - fy) /
                                     static_cast<long double>(t));
    const double got = acceptance_probability(fy - fx, t);
    if (ref < std::numeric_limits<double>::min()) {
      // Below the normal double range a relative bound is meaningless; the
      // probability must just be (sub)normal-small and non-negative.
      ++underflow;
      underflow_ok += got >= 0.0 && got < std::numeric_limits<double>::min();
      continue;
    }
    const double rel = static_cast<double>(std::abs((got - ref) / ref));
    worst = std::max(worst, rel);
    ok += rel <= 1e-12;
  }
  const bool tab = acceptance_probability(-3.2, 0.37) == 1.0 &&
                   acceptance_probability(-3.2, 1e4) == 1.0 &&
                   acceptance_probability(0.0, 2.5) == 1.0 &&
                   acceptance_probability(2.5, 2.5) == 0.36787944117144233;
  return {ok + underflow == n && underflow_ok == underflow && tab,
          fmt("%zu/%zu random pairs within 1e-12 (worst %.2e), %zu/%zu below the double range "
              "returned < DBL_MIN; tabulated examples %s",
              ok, n - underflow, worst, underflow_ok, underflow, tab ? "exact" : "WRONG")};
}

// ---- 3: gradients -------------------------------------------------------------

double min_abs_preactivation(const ResNet& net, std::span<const double> x) {
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  double closest = INFINITY;
  for (const auto& layer : net.layers()) {
    Eigen::VectorXd z = layer.weights * a + layer.bias;
    Eigen::VectorXd out = z;
    if (layer.has_activation) {
      closest = std::min(closest, z.cwiseAbs().minCoeff());
      out = z.cwiseMax(0.0);
    }
    if (layer.has_skip) out += a;
    a = out;
  }
  return closest;
}

Outcome gradient_oracle() {
  const auto t0 = Clock::now();
  Rng rng(99);
  std::size_t nets = 0, checked = 0, failed = 0, skipped = 0;
  double worst = 0.0;
  while (nets < 50) {
    const std::size_t depth = 1 + static_cast<std::size_t>(uniform01(rng) * 4);
    std::vector<std::size_t> widths = {1 + static_cast<std::size_t>(uniform01(rng) * 8)};
    for (std::size_t l = 0; l < depth; ++l) {
      // Repeat the previous width half the time so skips are exercised.
      widths.push_back(uniform01(rng) < 0.5 ? widths.back()
                                            : 1 + static_cast<std::size_t>(uniform01(rng) * 8));
    }
    widths.push_back(1);
    ResNet net = ResNet::from_widths(widths, Activation::relu, nets + 1);
    auto params = net.flat_parameters();
    for (double& p : params) p = uniform01(rng) * 2 - 1;
    net.set_flat_parameters(params);
    std::vector<double> x(widths.front());
    for (double& v : x) v = uniform01(rng) * 4 - 2;
    const double target = uniform01(rng) * 2 - 1;
    if (min_abs_preactivation(net, x) < 1e-6) {
      ++skipped;
      continue;
    }
    ++nets;
    const auto g = gradient(net, x, target);
    const double h = 1e-5;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double saved = params[i];
      params[i] = saved + h;
      net.set_flat_parameters(params);
      const double up = std::pow(net.forward(x) - target, 2);
      params[i] = saved - h;
      net.set_flat_parameters(params);
      const double down = std::pow(net.forward(x) - target, 2);
      params[i] = saved;
      const double fd = (up - down) / (2 * h);
      const double rel = std::abs(g[i] - fd) / std::max({std::abs(g[i]), std::abs(fd), 1e-4});
      worst = std::max(worst, rel);
      ++checked;
      failed += rel > 1e-4;
    }
    net.set_flat_parameters(params);
  }
  const double secs = seconds_since(t0);
  return {failed == 0 && secs < 30.0,
          fmt("%zu nets, %zu parameters checked, %zu over 1e-4 (worst %.2e), %zu probes near a "
              "breakpoint skipped; %.1f s (limit 30 s)",
              nets, checked, failed, worst, skipped, secs)};
}

// ---- 4: stationarity ----------------------------------------------------------

Outcome stationarity() {
  const auto t0 = Clock::now();
  const Objective f(1, [](std::span<const double> x) { return x[0] * x[0]; });
  const BoxDomain box = BoxDomain::cube(1, -1, 1);
  const double temperature = 0.5;
  AnnealConfig cfg;
  cfg.seed = 4;
  Rng rng(cfg.seed);
  AnnealState s = initial_state(f, box, temperature, rng);
  const std::size_t burn_in = 20'000, steps = 200'000, bins = 20;
  for (std::size_t i = 0; i < burn_in; ++i) step(s, f, box, cfg, rng);
  std::vector<double> hist(bins, 0.0);
  for (std::size_t i = 0; i < steps; ++i) {
    step(s, f, box, cfg, rng);
    const auto b = std::min(bins - 1, static_cast<std::size_t>((s.current[0] + 1.0) / 2.0 * bins));
    hist[b] += 1.0 / steps;
  }
  // Bin masses of the tabulated Gibbs density (grid nodes fall on bin edges).
  const std::size_t per_bin = 200;
  const auto table = gibbs_density(f, box, temperature, bins * per_bin + 1);
  const double dx = table.x[1] - table.x[0];
  double tv = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    double mass = 0.0;
    for (std::size_t k = b * per_bin; k < (b + 1) * per_bin; ++k) {
      mass += 0.5 * (table.density[k] + table.density[k + 1]) * dx;
    }
    tv += 0.5 * std::abs(hist[b] - mass);
  }
  const double secs = seconds_since(t0);
  return {tv <= 0.05 && secs < 10.0,
          fmt("TV distance %.4f over %zu bins (limit 0.05); %.1f s (limit 10 s)", tv, bins, secs)};
}

// ---- 5-7: analytic objectives -------------------------------------------------

std::vector<AnnealResult> twenty_runs(const Objective& f, const BoxDomain& box) {
  std::vector<AnnealConfig> configs(20);
  for (std::size_t k = 0; k < configs.size(); ++k) configs[k].seed = k;
  return run_chains(f, box, configs);
}

Outcome analytic(const char* name, double median_limit, double all_limit) {
  const auto t0 = Clock::now();
  const auto runs = twenty_runs(builtin_objective(name), builtin_domain(name));
  std::vector<double> best;
  for (const auto& r : runs) best.push_back(r.best_value);
  const double med = median(best);
  const double worst = *std::max_element(best.begin(), best.end());
  const double secs = seconds_since(t0);
  return {med <= median_limit && worst <= all_limit && secs < 60.0,
          fmt("median best %.4g (limit %g), worst %.4g (limit %g); %.1f s (limit 60 s)", med,
              median_limit, worst, all_limit, secs)};
}

Outcome multi_minima_runs() {
  const auto t0 = Clock::now();
  const auto runs = twenty_runs(multi_minima_objective(), builtin_domain("multimin"));
  std::set<int> found;
  std::size_t good = 0;
  double worst_dist = 0.0, worst_value = 0.0;
  for (const auto& r : runs) {
    double d2 = 0.0;
    int corner = 0;
    for (std::size_t j = 0; j < 3; ++j) {
      const double c = r.best[j] >= 0 ? 1.0 : -1.0;
      d2 += (r.best[j] - c) * (r.best[j] - c);
      corner = corner * 2 + (c > 0);
    }
    const double dist = std::sqrt(d2);
    worst_dist = std::max(worst_dist, dist);
    worst_value = std::max(worst_value, r.best_value);
    if (dist <= 0.2 && r.best_value <= 0.05) {
      ++good;
      found.insert(corner);
    }
  }
  const double secs = seconds_since(t0);
  return {good == runs.size() && found.size() >= 2 && secs < 120.0,
          fmt("%zu/20 runs within 0.2 of a minimum with value <= 0.05 (worst distance %.3g, "
              "worst value %.3g); %zu distinct minima; %.1f s (limit 120 s)",
              good, worst_dist, worst_value, found.size(), secs)};
}

// ---- 8-9: trained networks ----------------------------------------------------

struct Pipeline {
  FitReport fit;
  double sa_min;
  double grid_min;
  double seconds;
};

Pipeline run_pipeline(const std::string& preset, std::size_t divisor, std::size_t epochs,
                      const BoxDomain& eval_domain, std::size_t eval_n) {
  const auto t0 = Clock::now();
  const auto f = builtin_objective(preset);
  const auto box = builtin_domain(preset);
  const auto data = sample_dataset(f, box, 2000, 0.1, 7);
  auto net = std::make_shared<ResNet>(architecture(preset, 0, divisor));
  TrainConfig tc;
  tc.epochs = epochs;
  train(*net, data, tc);
  const FitReport fit = evaluate_fit(*net, f, eval_domain, eval_n, 1);
  const auto g = make_objective(net, preset + "-net");
  const auto range = estimate_range(g, box, AnnealConfig{}, 10);
  const auto oracle = grid_oracle(g, box, 801);
  return {fit, range.f_min, oracle.min_value, seconds_since(t0)};
}

Outcome ackley_pipeline() {
  const Pipeline full = run_pipeline("ackley", 1, 1000, BoxDomain::cube(2, -5, 5), 1000);
  const double gap = std::abs(full.sa_min - full.grid_min);
  const Pipeline reduced = run_pipeline("ackley", 4, 300, BoxDomain::cube(2, -5, 5), 1000);
  const double rgap = std::abs(reduced.sa_min - reduced.grid_min);
  const bool pass = full.fit.mae <= 2.0 && gap <= 0.1 && full.seconds < 1800.0 && rgap <= 0.1 &&
                    reduced.seconds < 180.0;
  return {pass,
          fmt("full: MAE %.4f (limit 2.0), MSE %.4f, SA min %.5f vs grid %.5f, gap %.2e "
              "(limit 0.1), %.0f s (limit 1800 s); reduced: gap %.2e (limit 0.1), %.0f s "
              "(limit 180 s)",
              full.fit.mae, full.fit.mse, full.sa_min, full.grid_min, gap, full.seconds, rgap,
              reduced.seconds)};
}

Outcome dropwave_pipeline() {
  const Pipeline p = run_pipeline("dropwave", 1, 1000, builtin_domain("dropwave"), 1500);
  const double gap = std::abs(p.sa_min - p.grid_min);
  return {p.fit.mae <= 0.1 && gap <= 0.05,
          fmt("MAE %.4f (limit 0.1), MSE %.4f, SA min %.5f vs grid %.5f, gap %.2e (limit "
              "0.05); %.0f s",
              p.fit.mae, p.fit.mse, p.sa_min, p.grid_min, gap, p.seconds)};
}

// ---- 10: classical vs reflected -----------------------------------------------

Outcome classical_vs_reflected() {
  const auto f = ackley_objective();
  const auto box = builtin_domain("ackley");
  const double target = grid_oracle(f, box, 801).min_value;
  std::vector<AnnealConfig> configs;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    AnnealConfig cfg;
    cfg.seed = seed;
    cfg.proposal_variance = 1.0;
    cfg.mode = Mode::reflected;
    configs.push_back(cfg);
    cfg.mode = Mode::classical;
    configs.push_back(cfg);
  }
  const auto runs = run_chains(f, box, configs);
  std::size_t classical_outside = 0, reflected_outside = 0, not_slower = 0, both_missed = 0;
  for (std::size_t k = 0; k < 20; ++k) {
    const auto& refl = runs[2 * k];
    const auto& clas = runs[2 * k + 1];
    reflected_outside += summarize(refl, box).outside_count;
    classical_outside += summarize(clas, box).outside_count > 0;
    // Never reaching the target counts as infinitely many iterations.
    const auto a = iterations_to_within(refl, target, 0.1);
    const auto b = iterations_to_within(clas, target, 0.1);
    both_missed += !a && !b;
    not_slower += !b || (a && *a <= *b);
  }
  const bool pass = classical_outside >= 1 && reflected_outside == 0 && not_slower >= 14;
  return {pass, fmt("classical chains leaving the box: %zu/20; reflected states outside: %zu; "
                    "reflected reached within 0.1 of %.3g no later in %zu/20 seeds (need 14; "
                    "%zu where neither reached it)",
                    classical_outside, reflected_outside, target, not_slower, both_missed)};
}

// ---- 11: determinism ----------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) files[fs::relative(entry.path(), root).string()] = slurp(entry.path());
  }
  return files;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "sarange_acceptance_determinism";
  const std::string cli = SARANGE_CLI_PATH;
  const std::string d = root.string();
  const std::vector<std::string> cmds = {
      "generate-data --fn ackley --m 300 --seed 7 --out " + d + "/data",
      "train --data " + d + "/data/dataset.csv --width-divisor 16 --epochs 10 --quiet --out " +
          d + "/train",
      "evaluate --weights " + d + "/train/weights.json --fn ackley --n 200 --out " + d + "/eval",
      "estimate-range --weights " + d + "/train/weights.json --preset ackley --n-seeds 3 --out " +
          d + "/range",
      "oracle --fn dropwave --points 201 --out " + d + "/oracle",
      "compare --fn ackley --variance 1 --n-seeds 3 --out " + d + "/compare",
  };
  std::vector<std::string> problems;
  std::map<std::string, std::string> first;
  for (int pass = 0; pass < 2; ++pass) {
    fs::remove_all(root);
    for (const auto& c : cmds) {
      const int status = std::system((cli + " " + c + " > /dev/null 2>&1").c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) problems.push_back("failed: " + c);
    }
    if (pass == 0) first = snapshot(root);
  }
  const auto second = snapshot(root);
  for (const auto& [name, text] : first) {
    const auto it = second.find(name);
    if (it == second.end() || it->second != text) problems.push_back("differs: " + name);
  }
  if (second.size() != first.size()) problems.push_back("file sets differ");
  std::string detail = fmt("%zu commands run twice, %zu output files compared byte for byte",
                           cmds.size(), first.size());
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty() && !first.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria = {
      {1, {"reflection properties", reflection_properties}},
      {2, {"acceptance rule", acceptance_rule}},
      {3, {"gradient oracle", gradient_oracle}},
      {4, {"fixed-temperature stationarity", stationarity}},
      {5, {"Ackley minimization", [] { return analytic("ackley", 0.05, 0.5); }}},
      {6, {"Drop-Wave minimization", [] { return analytic("dropwave", -0.98, -0.90); }}},
      {7, {"multi-minima", multi_minima_runs}},
      {8, {"Ackley network pipeline", ackley_pipeline}},
      {9, {"Drop-Wave network pipeline", dropwave_pipeline}},
      {10, {"classical vs reflected", classical_vs_reflected}},
      {11, {"determinism", determinism}},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& [id, c] : criteria) {
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = c.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("Criterion %d (%s): %s  %s\n", id, c.first, o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
