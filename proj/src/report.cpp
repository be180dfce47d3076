#include "sarange/report.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include "sarange/error.hpp"

namespace sarange {

using nlohmann::json;

std::string format_number(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw Error(ErrorCode::numerical, "cannot format number");
  return std::string(buf.data(), ptr);
}

void append_number(std::string& out, double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw Error(ErrorCode::numerical, "cannot format number");
  out.append(buf.data(), ptr);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json to_json(const BoxDomain& domain) {
  json arr = json::array();
  for (const auto& iv : domain.bounds()) arr.push_back({iv.low, iv.high});
  return arr;
}

BoxDomain domain_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::parse, "domain must be an array of [low, high] pairs");
  std::vector<Interval> bounds;
  for (const auto& pair : j) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() ||
        !pair[1].is_number()) {
      throw Error(ErrorCode::parse, "domain entries must be [low, high] number pairs");
    }
    bounds.push_back({pair[0].get<double>(), pair[1].get<double>()});
  }
  return BoxDomain(std::move(bounds));
}

json to_json(const DatasetMeta& meta, std::size_t rows, std::size_t dim) {
  json j;
  j["source"] = meta.source;
  j["noise_sd"] = meta.noise_sd;
  j["seed"] = meta.seed;
  j["rows"] = rows;
  j["dim"] = dim;
  j["domain"] = meta.domain ? to_json(*meta.domain) : json(nullptr);
  return j;
}

DatasetMeta dataset_meta_from_json(const json& j) {
  DatasetMeta meta;
  try {
    meta.source = j.value("source", std::string{});
    meta.noise_sd = j.value("noise_sd", 0.0);
    meta.seed = j.value("seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, std::string("dataset metadata: ") + e.what());
  }
  if (j.contains("domain") && !j["domain"].is_null()) {
    meta.domain = domain_from_json(j["domain"]);
  }
  return meta;
}

json to_json(const TrainConfig& cfg) {
  return {{"learning_rate", cfg.learning_rate},
          {"epochs", cfg.epochs},
          {"batch_size", cfg.batch_size},
          {"adam_beta1", cfg.adam_beta1},
          {"adam_beta2", cfg.adam_beta2},
          {"adam_epsilon", cfg.adam_epsilon},
          {"seed", cfg.seed}};
}

json to_json(const FitReport& report) {
  return {{"mae", report.mae},
          {"mse", report.mse},
          {"n_eval_points", report.n_eval_points},
          {"eval_domain", to_json(report.eval_domain)},
          {"eval_seed", report.eval_seed}};
}

json to_json(const AnnealConfig& cfg, const BoxDomain& domain) {
  return {{"t_max", cfg.t_max},
          {"t_min", cfg.t_min},
          {"delta", cfg.delta},
          {"inner_iters", cfg.inner_iters},
          {"proposal_variance", effective_variance(cfg, domain)},
          {"seed", cfg.seed},
          {"mode", std::string(to_string(cfg.mode))},
          {"cooling", std::string(to_string(cfg.cooling))}};
}

json to_json(const ChainSummary& s) {
  return {{"best_value", s.best_value},
          {"iterations_to_best", s.iterations_to_best},
          {"max_excursion", s.max_excursion},
          {"outside_count", s.outside_count}};
}

json chain_json(const AnnealResult& r) {
  return {{"seed", r.seed},
          {"best_value", r.best_value},
          {"best_point", r.best},
          {"best_feasible_value", r.best_feasible_value},
          {"best_feasible_point", r.best_feasible},
          {"evaluations", r.evaluations},
          {"levels", r.levels}};
}

json to_json(const RangeResult& result, const AnnealConfig& cfg,
             const BoxDomain& domain) {
  json chains = json::array();
  for (const auto& c : result.min_chains) {
    json j = chain_json(c);
    j["objective"] = "min";
    chains.push_back(std::move(j));
  }
  for (const auto& c : result.max_chains) {
    json j = chain_json(c);
    j["objective"] = "max";
    // Chains minimize -f; report values on the scale of f.
    j["best_value"] = -c.best_value;
    j["best_feasible_value"] = -c.best_feasible_value;
    chains.push_back(std::move(j));
  }
  json config = to_json(cfg, domain);
  config["n_seeds"] = result.seeds_used.size();
  config["domain"] = to_json(domain);
  return {{"f_min", result.f_min},
          {"f_max", result.f_max},
          {"x_min", result.x_min},
          {"x_max", result.x_max},
          {"interval_type", "inner"},
          {"eval_count", result.eval_count},
          {"seeds_used", result.seeds_used},
          {"config", std::move(config)},
          {"chains", std::move(chains)}};
}

json to_json(const OracleResult& r, const BoxDomain& domain) {
  return {{"min_value", r.min_value},
          {"min_point", r.min_point},
          {"max_value", r.max_value},
          {"max_point", r.max_point},
          {"min_points", r.min_points},
          {"max_points", r.max_points},
          {"points_per_dim", r.points_per_dim},
          {"evaluations", r.evaluations},
          {"domain", to_json(domain)}};
}

std::string loss_csv(std::span<const double> history) {
  std::string out = "epoch,loss\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    out += std::to_string(i + 1);
    out += ',';
    append_number(out, history[i]);
    out += '\n';
  }
  return out;
}

}  // namespace sarange
