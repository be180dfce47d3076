// sarange command-line driver. Uses the C interface only.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sarange/sarange.h"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// ---- errors -----------------------------------------------------------------

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RuntimeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(sar_status status) {
  if (status == SAR_OK) return;
  const std::string msg = sar_last_error();
  if (status == SAR_ERR_INVALID_ARGUMENT || status == SAR_ERR_DIMENSION) {
    throw UsageError(msg);
  }
  throw RuntimeFailure(msg);
}

// ---- handles ------------------------------------------------------------------

template <typename T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};

using Domain = std::unique_ptr<sar_domain, Deleter<sar_domain, sar_domain_destroy>>;
using Objective =
    std::unique_ptr<sar_objective, Deleter<sar_objective, sar_objective_destroy>>;
using Dataset = std::unique_ptr<sar_dataset, Deleter<sar_dataset, sar_dataset_destroy>>;
using Net = std::unique_ptr<sar_resnet, Deleter<sar_resnet, sar_resnet_destroy>>;
using AnnealResult = std::unique_ptr<sar_anneal_result,
                                     Deleter<sar_anneal_result, sar_anneal_result_destroy>>;
using RangeResult =
    std::unique_ptr<sar_range_result, Deleter<sar_range_result, sar_range_result_destroy>>;
using OracleResult = std::unique_ptr<sar_oracle_result,
                                     Deleter<sar_oracle_result, sar_oracle_result_destroy>>;

template <typename H>
json parse_text(sar_status (*fn)(const H*, char*, size_t, size_t*), const H* h) {
  size_t len = 0;
  check(fn(h, nullptr, 0, &len));
  std::string text(len, '\0');
  check(fn(h, text.data(), len + 1, &len));
  return json::parse(text);
}

// ---- files --------------------------------------------------------------------

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw RuntimeFailure("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.close();
  if (!out) throw RuntimeFailure("cannot write " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

std::string number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// ---- parsing helpers ----------------------------------------------------------

std::vector<double> parse_numbers(const std::string& text, std::string_view what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string_view item = std::string_view(text).substr(pos, comma - pos);
    double v = 0.0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || res.ec != std::errc{} || res.ptr != item.data() + item.size()) {
      throw UsageError(std::string(what) + ": '" + std::string(item) + "' is not a number");
    }
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

Domain make_domain(const std::string& text, std::string_view what) {
  const auto v = parse_numbers(text, what);
  if (v.size() < 2 || v.size() % 2 != 0) {
    throw UsageError(std::string(what) + " needs l1,u1,...,ld,ud (an even number of values)");
  }
  sar_domain* d = nullptr;
  check(sar_domain_create(v.data(), v.size() / 2, &d));
  return Domain(d);
}

Domain builtin_domain(const std::string& name) {
  sar_domain* d = nullptr;
  check(sar_builtin_domain(name.c_str(), &d));
  return Domain(d);
}

json domain_json(const sar_domain* d) {
  std::vector<double> b(2 * sar_domain_dim(d));
  check(sar_domain_bounds(d, b.data()));
  json arr = json::array();
  for (std::size_t j = 0; j < b.size(); j += 2) arr.push_back({b[j], b[j + 1]});
  return arr;
}

bool is_builtin(const std::string& name) {
  std::istringstream names(sar_builtin_names());
  std::string n;
  while (names >> n) {
    if (n == name) return true;
  }
  return false;
}

// ---- option bundles -----------------------------------------------------------

struct ObjectiveOpts {
  std::string fn;
  std::string weights;
  std::string domain;
  std::string preset;
};

struct Resolved {
  Objective objective;
  Domain domain;
  json description;
};

Objective load_objective(const ObjectiveOpts& o) {
  sar_objective* f = nullptr;
  if (!o.fn.empty()) {
    check(sar_objective_builtin(o.fn.c_str(), &f));
    return Objective(f);
  }
  sar_resnet* raw = nullptr;
  check(sar_resnet_load(o.weights.c_str(), &raw));
  Net net(raw);
  check(sar_objective_from_resnet(net.get(), &f));
  return Objective(f);
}

Resolved resolve(const ObjectiveOpts& o) {
  if (o.fn.empty() == o.weights.empty()) {
    throw UsageError("exactly one of --fn or --weights is required");
  }
  Resolved r;
  r.objective = load_objective(o);
  if (!o.domain.empty()) {
    r.domain = make_domain(o.domain, "--domain");
  } else if (!o.fn.empty()) {
    r.domain = builtin_domain(o.fn);
  } else if (!o.preset.empty()) {
    r.domain = builtin_domain(o.preset);
  } else {
    throw UsageError("--domain (or --preset) is required with --weights");
  }
  if (sar_domain_dim(r.domain.get()) != sar_objective_dim(r.objective.get())) {
    throw UsageError("domain has " + std::to_string(sar_domain_dim(r.domain.get())) +
                     " dimensions but the objective takes " +
                     std::to_string(sar_objective_dim(r.objective.get())));
  }
  r.description = o.fn.empty() ? json{{"weights", o.weights}} : json{{"fn", o.fn}};
  r.description["domain"] = domain_json(r.domain.get());
  return r;
}

void add_objective_options(CLI::App* sub, ObjectiveOpts& o, bool preset) {
  sub->add_option("--fn", o.fn, "Builtin objective (ackley, dropwave, multimin)");
  sub->add_option("--weights", o.weights, "ResNet weight file to use as the objective");
  sub->add_option("--domain", o.domain, "Box l1,u1,...,ld,ud (default: builtin domain)");
  if (preset) {
    sub->add_option("--preset", o.preset, "Take the default domain from this experiment");
  }
}

struct AnnealOpts {
  double t_max;
  double t_min;
  double delta;
  std::uint32_t inner_iters;
  double variance;
  std::uint64_t seed = 0;
  std::string mode = "reflected";
  std::string cooling = "theorem";

  AnnealOpts() {
    sar_anneal_config d;
    sar_anneal_config_default(&d);
    t_max = d.t_max;
    t_min = d.t_min;
    delta = d.delta;
    inner_iters = d.inner_iters;
    variance = d.proposal_variance;
  }

  sar_anneal_config config() const {
    sar_anneal_config c;
    sar_anneal_config_default(&c);
    c.t_max = t_max;
    c.t_min = t_min;
    c.delta = delta;
    c.inner_iters = inner_iters;
    c.proposal_variance = variance;
    c.seed = seed;
    c.mode = mode == "classical" ? SAR_MODE_CLASSICAL : SAR_MODE_REFLECTED;
    c.cooling = cooling == "algorithm1" ? SAR_COOLING_ALGORITHM1 : SAR_COOLING_THEOREM;
    return c;
  }

  json to_json() const {
    return {{"t_max", t_max},       {"t_min", t_min}, {"delta", delta},
            {"inner_iters", inner_iters}, {"proposal_variance", variance},
            {"seed", seed},         {"mode", mode},   {"cooling", cooling}};
  }
};

void add_anneal_options(CLI::App* sub, AnnealOpts& a, bool with_mode) {
  sub->add_option("--t-max", a.t_max, "Initial temperature")->capture_default_str();
  sub->add_option("--t-min", a.t_min, "Stop once the temperature reaches this")
      ->capture_default_str();
  sub->add_option("--delta", a.delta, "Cooling factor in (0, 1)")->capture_default_str();
  sub->add_option("--inner-iters", a.inner_iters, "Steps per temperature level")
      ->capture_default_str();
  sub->add_option("--variance", a.variance,
                  "Per-coordinate proposal variance (<= 0: (0.1 * smallest width)^2)")
      ->capture_default_str();
  sub->add_option("--seed", a.seed, "Seed of the first chain; chain k uses seed + k")
      ->capture_default_str();
  if (with_mode) {
    sub->add_option("--mode", a.mode, "reflected or classical")
        ->check(CLI::IsMember({"reflected", "classical"}))
        ->capture_default_str();
  }
  sub->add_option("--cooling", a.cooling, "theorem or algorithm1")
      ->check(CLI::IsMember({"theorem", "algorithm1"}))
      ->capture_default_str();
}

std::size_t default_grid_points(std::size_t dim) {
  if (dim <= 2) return 801;
  if (dim == 3) return 61;
  throw UsageError("no default grid for " + std::to_string(dim) +
                   " dimensions; pass --points");
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---- generate-data ------------------------------------------------------------

struct GenerateOpts {
  std::string fn;
  std::string domain;
  std::size_t m = 2000;
  double noise_sd = 0.1;
  std::uint64_t seed = 0;
  std::string out;
};

fs::path cmd_generate_data(const GenerateOpts& o) {
  if (o.fn.empty()) throw UsageError("--fn is required");
  sar_objective* raw = nullptr;
  check(sar_objective_builtin(o.fn.c_str(), &raw));
  Objective f(raw);
  Domain domain = o.domain.empty() ? builtin_domain(o.fn) : make_domain(o.domain, "--domain");
  if (o.m == 0) throw UsageError("--m must be positive");
  if (!(o.noise_sd >= 0.0)) throw UsageError("--noise-sd must be non-negative");
  sar_dataset* data = nullptr;
  check(sar_dataset_sample(f.get(), domain.get(), o.m, o.noise_sd, o.seed, &data));
  Dataset ds(data);

  const fs::path dir(o.out);
  ensure_dir(dir);
  const fs::path csv = dir / "dataset.csv";
  check(sar_dataset_write_csv(ds.get(), csv.string().c_str()));
  json meta = parse_text(sar_dataset_metadata_json, ds.get());
  meta["config"] = {{"command", "generate-data"}, {"fn", o.fn},
                    {"domain", domain_json(domain.get())}, {"m", o.m},
                    {"noise_sd", o.noise_sd}, {"seed", o.seed}};
  write_json(dir / "dataset.json", meta);
  std::cerr << "wrote " << o.m << " rows to " << csv.string() << "\n";
  return csv;
}

// ---- train --------------------------------------------------------------------

struct FitProtocol {
  Domain domain;
  std::size_t n;
};

FitProtocol fit_protocol(const std::string& preset) {
  if (preset == "ackley") return {make_domain("-5,5,-5,5", "protocol"), 1000};
  return {builtin_domain(preset), 1500};
}

struct TrainOpts {
  std::string data;
  std::string preset;
  std::size_t width_divisor = 1;
  std::uint32_t epochs = 1000;
  double lr = 1e-3;
  std::uint32_t batch_size = 0;
  std::uint64_t seed = 0;
  std::string fn;
  std::string eval_domain;
  std::size_t eval_n = 0;
  std::uint64_t eval_seed = 1;
  std::string out;
  bool quiet = false;
  bool record_timing = false;
};

json fit_report_json(const sar_fit_report& rep, const sar_domain* domain) {
  size_t len = 0;
  check(sar_fit_report_json(&rep, domain, nullptr, 0, &len));
  std::string text(len, '\0');
  check(sar_fit_report_json(&rep, domain, text.data(), len + 1, &len));
  return json::parse(text);
}

fs::path cmd_train(const TrainOpts& o) {
  const auto t0 = Clock::now();
  if (o.data.empty()) throw UsageError("--data is required");
  if (o.epochs == 0) throw UsageError("--epochs must be at least 1");
  if (o.width_divisor == 0) throw UsageError("--width-divisor must be at least 1");
  const fs::path csv(o.data);
  fs::path sidecar = csv;
  sidecar.replace_extension(".json");
  const bool has_meta = fs::exists(sidecar);
  sar_dataset* raw = nullptr;
  check(sar_dataset_load(csv.string().c_str(), has_meta ? sidecar.string().c_str() : nullptr,
                         &raw));
  Dataset data(raw);
  json meta = parse_text(sar_dataset_metadata_json, data.get());
  const std::string source = meta.value("source", std::string{});

  const std::string preset = !o.preset.empty() ? o.preset : source;
  if (preset.empty()) throw UsageError("--preset is required when the dataset has no source");
  const std::string truth = !o.fn.empty() ? o.fn : (is_builtin(source) ? source : preset);

  sar_resnet* net_raw = nullptr;
  check(sar_resnet_architecture(preset.c_str(), o.width_divisor, o.seed, &net_raw));
  Net net(net_raw);
  if (sar_resnet_input_dim(net.get()) != sar_dataset_dim(data.get())) {
    throw UsageError("dataset has " + std::to_string(sar_dataset_dim(data.get())) +
                     " inputs but the '" + preset + "' architecture takes " +
                     std::to_string(sar_resnet_input_dim(net.get())));
  }

  sar_train_config tc;
  sar_train_config_default(&tc);
  tc.learning_rate = o.lr;
  tc.epochs = o.epochs;
  tc.batch_size = o.batch_size;
  tc.seed = o.seed;
  std::vector<double> history(o.epochs);
  double final_mse = 0.0;
  struct Progress {
    std::uint32_t epochs;
    bool quiet;
  } progress{o.epochs, o.quiet};
  check(sar_train(
      net.get(), data.get(), &tc, history.data(), &final_mse,
      [](std::uint32_t epoch, double loss, void* user) {
        const auto* p = static_cast<const Progress*>(user);
        if (!p->quiet && (epoch % 100 == 0 || epoch == p->epochs)) {
          std::cerr << "epoch " << epoch << "/" << p->epochs << " loss " << loss << "\n";
        }
      },
      &progress));

  sar_objective* f_raw = nullptr;
  check(sar_objective_builtin(truth.c_str(), &f_raw));
  Objective f(f_raw);
  FitProtocol protocol = is_builtin(preset) ? fit_protocol(preset)
                                            : FitProtocol{builtin_domain(truth), 1000};
  if (!o.eval_domain.empty()) protocol.domain = make_domain(o.eval_domain, "--eval-domain");
  if (o.eval_n > 0) protocol.n = o.eval_n;
  sar_fit_report rep{};
  check(sar_evaluate_fit(net.get(), f.get(), protocol.domain.get(), protocol.n, o.eval_seed,
                         &rep));

  const fs::path dir(o.out);
  ensure_dir(dir);
  const fs::path weights = dir / "weights.json";
  check(sar_resnet_save(net.get(), weights.string().c_str()));
  std::string loss = "epoch,loss\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    loss += std::to_string(i + 1) + "," + number(history[i]) + "\n";
  }
  write_file(dir / "loss.csv", loss);

  json report = fit_report_json(rep, protocol.domain.get());
  report["final_train_mse"] = final_mse;
  report["parameter_count"] = sar_resnet_parameter_count(net.get());
  report["config"] = {{"command", "train"},
                      {"data", o.data},
                      {"dataset", meta},
                      {"preset", preset},
                      {"width_divisor", o.width_divisor},
                      {"fn", truth},
                      {"train", {{"learning_rate", o.lr},
                                 {"epochs", o.epochs},
                                 {"batch_size", o.batch_size},
                                 {"seed", o.seed}}}};
  if (o.record_timing) report["wall_time_seconds"] = seconds_since(t0);
  write_json(dir / "fit_report.json", report);
  std::cerr << "MAE " << rep.mae << " MSE " << rep.mse << " on " << rep.n_eval_points
            << " points; weights in " << weights.string() << "\n";
  return weights;
}

// ---- evaluate -----------------------------------------------------------------

struct EvaluateOpts {
  std::string weights;
  std::string fn;
  std::string domain;
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  std::string out;
};

void cmd_evaluate(const EvaluateOpts& o) {
  if (o.weights.empty() || o.fn.empty()) throw UsageError("--weights and --fn are required");
  sar_resnet* raw = nullptr;
  check(sar_resnet_load(o.weights.c_str(), &raw));
  Net net(raw);
  sar_objective* f_raw = nullptr;
  check(sar_objective_builtin(o.fn.c_str(), &f_raw));
  Objective f(f_raw);
  Domain domain = o.domain.empty() ? builtin_domain(o.fn) : make_domain(o.domain, "--domain");
  if (o.n == 0) throw UsageError("--n must be positive");
  sar_fit_report rep{};
  check(sar_evaluate_fit(net.get(), f.get(), domain.get(), o.n, o.seed, &rep));
  json report = fit_report_json(rep, domain.get());
  report["config"] = {{"command", "evaluate"}, {"weights", o.weights}, {"fn", o.fn},
                      {"domain", domain_json(domain.get())}, {"n", o.n}, {"seed", o.seed}};
  const fs::path dir(o.out);
  ensure_dir(dir);
  write_json(dir / "fit_report.json", report);
  std::cerr << "MAE " << rep.mae << " MSE " << rep.mse << "\n";
}

// ---- estimate-range -----------------------------------------------------------

struct RangeOpts {
  ObjectiveOpts objective;
  AnnealOpts anneal;
  std::size_t n_seeds = 10;
  std::size_t threads = 0;
  std::string out;
  bool record_timing = false;
};

json cmd_estimate_range(const RangeOpts& o) {
  const auto t0 = Clock::now();
  Resolved r = resolve(o.objective);
  if (o.n_seeds == 0) throw UsageError("--n-seeds must be at least 1");
  const sar_anneal_config cfg = o.anneal.config();
  sar_range_result* raw = nullptr;
  check(sar_estimate_range(r.objective.get(), r.domain.get(), &cfg, o.n_seeds, o.threads,
                           &raw));
  RangeResult result(raw);

  const fs::path dir(o.out);
  ensure_dir(dir / "traces");
  for (std::size_t k = 0; k < o.n_seeds; ++k) {
    const std::string seed = std::to_string(o.anneal.seed + k);
    check(sar_range_result_write_trace(result.get(), 0, k,
                                       (dir / "traces" / ("min_seed" + seed + ".csv")).string().c_str()));
    check(sar_range_result_write_trace(result.get(), 1, k,
                                       (dir / "traces" / ("max_seed" + seed + ".csv")).string().c_str()));
  }
  json out = parse_text(sar_range_result_json, result.get());
  out["config"]["command"] = "estimate-range";
  out["config"]["objective"] = r.description;
  out["config"]["anneal"] = o.anneal.to_json();
  if (o.record_timing) out["wall_time_seconds"] = seconds_since(t0);
  write_json(dir / "range.json", out);
  std::cerr << "range [" << sar_range_result_min(result.get()) << ", "
            << sar_range_result_max(result.get()) << "] from "
            << sar_range_result_eval_count(result.get()) << " evaluations\n";
  return out;
}

// ---- oracle -------------------------------------------------------------------

struct OracleOpts {
  ObjectiveOpts objective;
  std::size_t points = 0;
  std::string out;
  bool record_timing = false;
};

json cmd_oracle(const OracleOpts& o) {
  const auto t0 = Clock::now();
  Resolved r = resolve(o.objective);
  const std::size_t points =
      o.points > 0 ? o.points : default_grid_points(sar_domain_dim(r.domain.get()));
  sar_oracle_result* raw = nullptr;
  check(sar_grid_oracle(r.objective.get(), r.domain.get(), points, &raw));
  OracleResult result(raw);
  json out = parse_text(sar_oracle_result_json, result.get());
  out["config"] = {{"command", "oracle"}, {"objective", r.description}, {"points_per_dim", points}};
  if (o.record_timing) out["wall_time_seconds"] = seconds_since(t0);
  const fs::path dir(o.out);
  ensure_dir(dir);
  write_json(dir / "oracle.json", out);
  std::cerr << "grid min " << sar_oracle_result_min(result.get()) << ", max "
            << sar_oracle_result_max(result.get()) << "\n";
  return out;
}

// ---- compare ------------------------------------------------------------------

struct CompareOpts {
  ObjectiveOpts objective;
  AnnealOpts anneal;
  std::size_t n_seeds = 20;
  std::optional<double> target;
  double tol = 0.1;
  std::size_t oracle_points = 0;
  std::size_t threads = 0;
  std::string out;
  bool record_timing = false;
};

json cmd_compare(const CompareOpts& o) {
  const auto t0 = Clock::now();
  Resolved r = resolve(o.objective);
  if (o.n_seeds == 0) throw UsageError("--n-seeds must be at least 1");
  if (!(o.tol >= 0.0)) throw UsageError("--tol must be non-negative");

  json target_info;
  std::optional<double> target = o.target;
  if (target) {
    target_info = {{"source", "flag"}, {"value", *target}};
  } else {
    const std::size_t dim = sar_domain_dim(r.domain.get());
    if (o.oracle_points > 0 || dim <= 3) {
      const std::size_t points = o.oracle_points > 0 ? o.oracle_points : default_grid_points(dim);
      sar_oracle_result* raw = nullptr;
      check(sar_grid_oracle(r.objective.get(), r.domain.get(), points, &raw));
      OracleResult oracle(raw);
      target = sar_oracle_result_min(oracle.get());
      target_info = {{"source", "grid_oracle"}, {"points_per_dim", points}, {"value", *target}};
    }
  }

  // Job 2k is the reflected chain for seed + k, job 2k + 1 the classical one.
  const std::size_t jobs = 2 * o.n_seeds;
  std::vector<AnnealResult> results(jobs);
  std::vector<sar_status> status(jobs, SAR_OK);
  std::vector<std::string> errors(jobs);
  {
    std::size_t threads = o.threads > 0 ? o.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, jobs);
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs; i = next++) {
          sar_anneal_config cfg = o.anneal.config();
          cfg.seed = o.anneal.seed + i / 2;
          cfg.mode = i % 2 == 0 ? SAR_MODE_REFLECTED : SAR_MODE_CLASSICAL;
          sar_anneal_result* raw = nullptr;
          status[i] = sar_anneal_run(r.objective.get(), r.domain.get(), &cfg, &raw);
          if (status[i] == SAR_OK) {
            results[i].reset(raw);
          } else {
            errors[i] = sar_last_error();
          }
        }
      });
    }
  }
  for (std::size_t i = 0; i < jobs; ++i) {
    if (status[i] == SAR_OK) continue;
    if (status[i] == SAR_ERR_INVALID_ARGUMENT || status[i] == SAR_ERR_DIMENSION) {
      throw UsageError(errors[i]);
    }
    throw RuntimeFailure(errors[i]);
  }

  const fs::path dir(o.out);
  ensure_dir(dir / "traces");
  std::string csv =
      "seed,mode,best_value,iterations_to_best,max_excursion,outside_count,"
      "iterations_to_target\n";
  json rows = json::array();
  std::size_t reflected_not_slower = 0;
  std::int64_t pending_reflected = -1;
  for (std::size_t i = 0; i < jobs; ++i) {
    const std::uint64_t seed = o.anneal.seed + i / 2;
    const std::string mode = i % 2 == 0 ? "reflected" : "classical";
    sar_chain_summary s{};
    check(sar_anneal_result_summary(results[i].get(), r.domain.get(), target.value_or(0.0),
                                    o.tol, &s));
    if (!target) s.iterations_to_target = -1;
    check(sar_anneal_result_write_trace(
        results[i].get(),
        (dir / "traces" / (mode + "_seed" + std::to_string(seed) + ".csv")).string().c_str()));
    const std::string hit = s.iterations_to_target >= 0 ? std::to_string(s.iterations_to_target) : "";
    csv += std::to_string(seed) + "," + mode + "," + number(s.best_value) + "," +
           std::to_string(s.iterations_to_best) + "," + number(s.max_excursion) + "," +
           std::to_string(s.outside_count) + "," + hit + "\n";
    rows.push_back({{"seed", seed},
                    {"mode", mode},
                    {"best_value", s.best_value},
                    {"iterations_to_best", s.iterations_to_best},
                    {"max_excursion", s.max_excursion},
                    {"outside_count", s.outside_count},
                    {"iterations_to_target",
                     s.iterations_to_target >= 0 ? json(s.iterations_to_target) : json(nullptr)}});
    // A chain that never gets within tol counts as infinitely slow.
    if (i % 2 == 0) {
      pending_reflected = s.iterations_to_target;
    } else if (target) {
      const bool refl_hit = pending_reflected >= 0;
      const bool class_hit = s.iterations_to_target >= 0;
      if ((refl_hit && (!class_hit || pending_reflected <= s.iterations_to_target)) ||
          (!refl_hit && !class_hit)) {
        ++reflected_not_slower;
      }
    }
  }
  write_file(dir / "compare.csv", csv);

  json out;
  out["rows"] = rows;
  out["target"] = target ? target_info : json(nullptr);
  out["tolerance"] = o.tol;
  if (target) {
    out["reflected_not_slower_fraction"] =
        static_cast<double>(reflected_not_slower) / static_cast<double>(o.n_seeds);
  }
  json anneal = o.anneal.to_json();
  anneal.erase("mode");
  out["config"] = {{"command", "compare"}, {"objective", r.description}, {"anneal", anneal},
                   {"n_seeds", o.n_seeds}};
  if (o.record_timing) out["wall_time_seconds"] = seconds_since(t0);
  write_json(dir / "compare.json", out);
  std::cerr << "wrote " << jobs << " summary rows to " << (dir / "compare.csv").string() << "\n";
  return out;
}

// ---- run-experiment -----------------------------------------------------------

struct ExperimentOpts {
  std::string preset;
  std::string out;
  std::size_t m = 2000;
  double noise_sd = 0.1;
  std::size_t width_divisor = 1;
  std::uint32_t epochs = 1000;
  double lr = 1e-3;
  std::uint32_t batch_size = 0;
  std::size_t n_seeds = 10;
  std::size_t oracle_points = 0;
  AnnealOpts anneal;
  std::size_t threads = 0;
  bool quiet = false;
  bool record_timing = false;
};

void cmd_run_experiment(const ExperimentOpts& o) {
  if (!is_builtin(o.preset)) {
    throw UsageError("unknown preset '" + o.preset + "'; presets: " + sar_builtin_names());
  }
  const fs::path dir(o.out);

  GenerateOpts g;
  g.fn = o.preset;
  g.m = o.m;
  g.noise_sd = o.noise_sd;
  g.seed = o.anneal.seed;
  g.out = (dir / "data").string();
  const fs::path csv = cmd_generate_data(g);

  TrainOpts t;
  t.data = csv.string();
  t.preset = o.preset;
  t.width_divisor = o.width_divisor;
  t.epochs = o.epochs;
  t.lr = o.lr;
  t.batch_size = o.batch_size;
  t.seed = o.anneal.seed;
  t.out = (dir / "train").string();
  t.quiet = o.quiet;
  t.record_timing = o.record_timing;
  const fs::path weights = cmd_train(t);

  ObjectiveOpts net;
  net.weights = weights.string();
  net.preset = o.preset;

  OracleOpts oo;
  oo.objective = net;
  oo.points = o.oracle_points;
  oo.out = (dir / "oracle").string();
  oo.record_timing = o.record_timing;
  const json oracle = cmd_oracle(oo);

  RangeOpts ro;
  ro.objective = net;
  ro.anneal = o.anneal;
  ro.n_seeds = o.n_seeds;
  ro.threads = o.threads;
  ro.out = (dir / "range").string();
  ro.record_timing = o.record_timing;
  const json range = cmd_estimate_range(ro);

  CompareOpts co;
  co.objective = net;
  co.anneal = o.anneal;
  co.n_seeds = o.n_seeds;
  co.target = oracle["min_value"].get<double>();
  co.threads = o.threads;
  co.out = (dir / "compare").string();
  co.record_timing = o.record_timing;
  cmd_compare(co);

  const double sa_min = range["f_min"].get<double>();
  const double grid_min = oracle["min_value"].get<double>();
  const double sa_max = range["f_max"].get<double>();
  const double grid_max = oracle["max_value"].get<double>();
  json summary = {{"preset", o.preset},
                  {"sa_min", sa_min},
                  {"grid_min", grid_min},
                  {"min_gap", std::abs(sa_min - grid_min)},
                  {"sa_max", sa_max},
                  {"grid_max", grid_max},
                  {"max_gap", std::abs(sa_max - grid_max)}};
  write_json(dir / "summary.json", summary);
  std::cerr << "SA min " << sa_min << " vs grid min " << grid_min << "\n";
}

// ---- config files -------------------------------------------------------------

std::string option_name(const std::string& key) {
  std::string name = "--" + key;
  std::replace(name.begin(), name.end(), '_', '-');
  return name;
}

std::string config_scalar(const std::string& key, const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) return number(v.get<double>());
  if (v.is_array()) {
    // Boxes are written as [[l1, u1], ...].
    std::string flat;
    for (const auto& pair : v) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
        throw UsageError("config key '" + key + "' must be an array of [low, high] pairs");
      }
      for (const auto& x : pair) {
        if (!flat.empty()) flat += ',';
        flat += number(x.get<double>());
      }
    }
    return flat;
  }
  throw UsageError("config key '" + key + "' has an unsupported type");
}

void flatten_config(const json& j, std::map<std::string, json>& out) {
  for (const auto& [key, value] : j.items()) {
    if (value.is_object()) {
      flatten_config(value, out);
    } else {
      out[key] = value;
    }
  }
}

// Turns the config file into command-line arguments placed before the user's
// own, so flags given explicitly win.
std::vector<std::string> config_arguments(const std::string& path, CLI::App* sub,
                                          const std::set<std::string>& known,
                                          const std::vector<std::string>& user_args) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(path + ": malformed JSON at byte " + std::to_string(e.byte));
  }
  if (!j.is_object()) throw UsageError(path + ": config must be a JSON object");
  std::map<std::string, json> flat;
  flatten_config(j, flat);

  auto user_has = [&](const std::string& name) {
    return std::any_of(user_args.begin(), user_args.end(), [&](const std::string& a) {
      return a == name || a.rfind(name + "=", 0) == 0;
    });
  };

  std::vector<std::string> args;
  for (const auto& [key, value] : flat) {
    const std::string name = option_name(key);
    if (!known.count(name)) throw UsageError(path + ": unknown config key '" + key + "'");
    if (name == "--config" || value.is_null()) continue;
    const CLI::Option* opt = sub->get_option_no_throw(name);
    if (opt == nullptr) continue;  // belongs to another command
    if ((name == "--fn" && user_has("--weights")) || (name == "--weights" && user_has("--fn"))) {
      continue;
    }
    if (value.is_boolean()) {
      if (opt->get_type_size() != 0) {
        throw UsageError(path + ": config key '" + key + "' is not a switch");
      }
      if (value.get<bool>()) args.push_back(name);
      continue;
    }
    args.push_back(name);
    args.push_back(config_scalar(key, value));
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Output range estimation by simulated annealing with reflection", "sarange"};
  app.set_version_flag("--version", sar_version());
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  std::string config_path;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration; flags override it");
  };

  GenerateOpts gen;
  auto* gen_cmd = app.add_subcommand("generate-data", "Sample a noisy dataset from a builtin");
  add_config(gen_cmd);
  gen_cmd->add_option("--fn", gen.fn, "Builtin objective");
  gen_cmd->add_option("--domain", gen.domain, "Box l1,u1,...,ld,ud (default: builtin domain)");
  gen_cmd->add_option("--m", gen.m, "Number of rows")->capture_default_str();
  gen_cmd->add_option("--noise-sd", gen.noise_sd, "Gaussian noise on the targets")
      ->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Sampling seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();

  TrainOpts tr;
  auto* train_cmd = app.add_subcommand("train", "Train a ResNet on a dataset and report its fit");
  add_config(train_cmd);
  train_cmd->add_option("--data", tr.data, "Dataset CSV (sidecar JSON is read if present)");
  train_cmd->add_option("--preset", tr.preset, "Architecture (default: dataset source)");
  train_cmd->add_option("--width-divisor", tr.width_divisor, "Shrink hidden widths by this factor")
      ->capture_default_str();
  train_cmd->add_option("--epochs", tr.epochs)->capture_default_str();
  train_cmd->add_option("--lr", tr.lr, "Adam learning rate")->capture_default_str();
  train_cmd->add_option("--batch-size", tr.batch_size,
                        "0: full batch up to 4096 rows, else 256")
      ->capture_default_str();
  train_cmd->add_option("--seed", tr.seed, "Initialization and shuffling seed")
      ->capture_default_str();
  train_cmd->add_option("--fn", tr.fn, "Ground truth for the fit report (default: source)");
  train_cmd->add_option("--eval-domain", tr.eval_domain, "Fit evaluation box");
  train_cmd->add_option("--eval-n", tr.eval_n, "Fit evaluation points (0: preset protocol)");
  train_cmd->add_option("--eval-seed", tr.eval_seed)->capture_default_str();
  train_cmd->add_option("--out", tr.out, "Output directory")->required();
  train_cmd->add_flag("--quiet", tr.quiet, "No progress output");
  train_cmd->add_flag("--record-timing", tr.record_timing, "Add wall time to the report");

  EvaluateOpts ev;
  auto* eval_cmd = app.add_subcommand("evaluate", "Fit metrics of a weight file against a builtin");
  add_config(eval_cmd);
  eval_cmd->add_option("--weights", ev.weights, "ResNet weight file");
  eval_cmd->add_option("--fn", ev.fn, "Ground-truth builtin");
  eval_cmd->add_option("--domain", ev.domain, "Evaluation box (default: builtin domain)");
  eval_cmd->add_option("--n", ev.n, "Evaluation points")->capture_default_str();
  eval_cmd->add_option("--seed", ev.seed)->capture_default_str();
  eval_cmd->add_option("--out", ev.out, "Output directory")->required();

  RangeOpts ro;
  auto* range_cmd = app.add_subcommand("estimate-range", "Estimate [f_min, f_max] by annealing");
  add_config(range_cmd);
  add_objective_options(range_cmd, ro.objective, true);
  add_anneal_options(range_cmd, ro.anneal, true);
  range_cmd->add_option("--n-seeds", ro.n_seeds, "Chains per direction")->capture_default_str();
  range_cmd->add_option("--threads", ro.threads, "Worker threads (0: all cores)");
  range_cmd->add_option("--out", ro.out, "Output directory")->required();
  range_cmd->add_flag("--record-timing", ro.record_timing, "Add wall time to the result");

  OracleOpts oo;
  auto* oracle_cmd = app.add_subcommand("oracle", "Exhaustive grid minimum and maximum");
  add_config(oracle_cmd);
  add_objective_options(oracle_cmd, oo.objective, true);
  oracle_cmd->add_option("--points", oo.points,
                         "Grid points per dimension (default: 801 in 2-d, 61 in 3-d)");
  oracle_cmd->add_option("--out", oo.out, "Output directory")->required();
  oracle_cmd->add_flag("--record-timing", oo.record_timing, "Add wall time to the result");

  CompareOpts co;
  double target = 0.0;
  auto* cmp_cmd = app.add_subcommand("compare", "Reflected and classical chains on shared seeds");
  add_config(cmp_cmd);
  add_objective_options(cmp_cmd, co.objective, true);
  add_anneal_options(cmp_cmd, co.anneal, false);
  cmp_cmd->add_option("--n-seeds", co.n_seeds, "Seeds per mode")->capture_default_str();
  auto* target_opt =
      cmp_cmd->add_option("--target", target, "Reference minimum (default: grid oracle)");
  cmp_cmd->add_option("--tol", co.tol, "Distance to the target that counts as reached")
      ->capture_default_str();
  cmp_cmd->add_option("--oracle-points", co.oracle_points, "Grid points for the default target");
  cmp_cmd->add_option("--threads", co.threads, "Worker threads (0: all cores)");
  cmp_cmd->add_option("--out", co.out, "Output directory")->required();
  cmp_cmd->add_flag("--record-timing", co.record_timing, "Add wall time to the result");

  ExperimentOpts ex;
  auto* exp_cmd = app.add_subcommand(
      "run-experiment", "Data, training, oracle, range and comparison for one preset");
  add_config(exp_cmd);
  exp_cmd->add_option("--preset", ex.preset, "ackley, dropwave or multimin");
  exp_cmd->add_option("--out", ex.out, "Output directory")->required();
  exp_cmd->add_option("--m", ex.m, "Dataset rows")->capture_default_str();
  exp_cmd->add_option("--noise-sd", ex.noise_sd)->capture_default_str();
  exp_cmd->add_option("--width-divisor", ex.width_divisor)->capture_default_str();
  exp_cmd->add_option("--epochs", ex.epochs)->capture_default_str();
  exp_cmd->add_option("--lr", ex.lr)->capture_default_str();
  exp_cmd->add_option("--batch-size", ex.batch_size)->capture_default_str();
  exp_cmd->add_option("--n-seeds", ex.n_seeds)->capture_default_str();
  exp_cmd->add_option("--oracle-points", ex.oracle_points);
  add_anneal_options(exp_cmd, ex.anneal, false);
  exp_cmd->add_option("--threads", ex.threads);
  exp_cmd->add_flag("--quiet", ex.quiet);
  exp_cmd->add_flag("--record-timing", ex.record_timing);

  std::set<std::string> known;
  for (const auto* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
    for (const auto* opt : sub->get_options()) {
      for (const auto& name : opt->get_lnames()) known.insert("--" + name);
    }
  }

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    // --config is read before parsing so its values can sit underneath the flags.
    if (!args.empty()) {
      CLI::App* sub = nullptr;
      for (auto* s : app.get_subcommands([](const CLI::App*) { return true; })) {
        if (s->get_name() == args.front()) sub = s;
      }
      const std::vector<std::string> user(args.begin() + 1, args.end());
      std::string path;
      for (std::size_t i = 0; i < user.size(); ++i) {
        if (user[i] == "--config" && i + 1 < user.size()) path = user[i + 1];
        if (user[i].rfind("--config=", 0) == 0) path = user[i].substr(9);
      }
      if (sub != nullptr && !path.empty()) {
        const auto extra = config_arguments(path, sub, known, user);
        args.insert(args.begin() + 1, extra.begin(), extra.end());
      }
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (gen_cmd->parsed()) {
      cmd_generate_data(gen);
    } else if (train_cmd->parsed()) {
      cmd_train(tr);
    } else if (eval_cmd->parsed()) {
      cmd_evaluate(ev);
    } else if (range_cmd->parsed()) {
      cmd_estimate_range(ro);
    } else if (oracle_cmd->parsed()) {
      cmd_oracle(oo);
    } else if (cmp_cmd->parsed()) {
      if (target_opt->count() > 0) co.target = target;
      cmd_compare(co);
    } else if (exp_cmd->parsed()) {
      cmd_run_experiment(ex);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const RuntimeFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
