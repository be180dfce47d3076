#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "sarange/anneal.hpp"
#include "sarange/dataset.hpp"
#include "sarange/domain.hpp"
#include "sarange/range.hpp"
#include "sarange/trainer.hpp"

namespace sarange {

/// Shortest decimal form that parses back to the same double.
std::string format_number(double v);
void append_number(std::string& out, double v);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

nlohmann::json to_json(const BoxDomain& domain);
BoxDomain domain_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DatasetMeta& meta, std::size_t rows, std::size_t dim);
DatasetMeta dataset_meta_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TrainConfig& cfg);
nlohmann::json to_json(const FitReport& report);
nlohmann::json to_json(const AnnealConfig& cfg, const BoxDomain& domain);
nlohmann::json to_json(const ChainSummary& summary);

/// Summary of one chain: seed, best point and value, evaluation count.
nlohmann::json chain_json(const AnnealResult& result);

/// {f_min, f_max, x_min, x_max, interval_type, eval_count, seeds_used,
///  config, chains}
nlohmann::json to_json(const RangeResult& result, const AnnealConfig& cfg,
                       const BoxDomain& domain);
nlohmann::json to_json(const OracleResult& result, const BoxDomain& domain);

/// CSV with header epoch,loss.
std::string loss_csv(std::span<const double> history);

}  // namespace sarange
