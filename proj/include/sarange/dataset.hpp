#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sarange/domain.hpp"
#include "sarange/objectives.hpp"

namespace sarange {

struct DatasetMeta {
  std::string source;
  double noise_sd = 0.0;
  std::uint64_t seed = 0;
  std::optional<BoxDomain> domain;
};

/// Noisy samples (x_i, f_i). Inputs are stored row-major, one row per sample.
struct Dataset {
  std::size_t dim = 0;
  std::vector<double> inputs;
  std::vector<double> targets;
  DatasetMeta meta;

  std::size_t size() const { return targets.size(); }
  std::span<const double> input(std::size_t i) const {
    return {inputs.data() + i * dim, dim};
  }
};

/// Draws m inputs uniformly on the domain and records f(x) + N(0, noise_sd^2).
/// The same seed always yields the same dataset.
Dataset sample_dataset(const Objective& f, const BoxDomain& domain,
                       std::size_t m, double noise_sd, std::uint64_t seed);

/// CSV with header x1,...,xd,target; numbers in shortest round-trip form.
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);
std::string dataset_csv(const Dataset& data);
Dataset read_dataset_csv(const std::filesystem::path& path);

}  // namespace sarange
