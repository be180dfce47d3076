#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sarange/dataset.hpp"
#include "sarange/domain.hpp"
#include "sarange/objectives.hpp"
#include "sarange/resnet.hpp"

namespace sarange {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t epochs = 1000;
  /// 0 selects full batch up to 4096 rows and 256 beyond.
  std::size_t batch_size = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;

  void validate(std::size_t dataset_size) const;
  std::size_t effective_batch_size(std::size_t dataset_size) const;
};

struct TrainResult {
  /// Mean squared error over the epoch, one entry per epoch.
  std::vector<double> loss_history;
  /// Training MSE of the returned network.
  double final_mse = 0.0;
};

using TrainProgress = std::function<void(std::size_t epoch, double loss)>;

/// Minimizes mean squared error with Adam. Deterministic for a given seed;
/// throws ErrorCode::numerical naming the epoch if the loss stops being finite.
TrainResult train(ResNet& net, const Dataset& data, const TrainConfig& cfg,
                  const TrainProgress& progress = {});

/// Gradient of (net(x) - target)^2 in flat_parameters() order.
std::vector<double> gradient(const ResNet& net, std::span<const double> x,
                             double target);

double training_mse(const ResNet& net, const Dataset& data);

/// Element-wise Adam over a flat parameter vector.
class Adam {
 public:
  Adam(std::size_t parameter_count, double learning_rate, double beta1,
       double beta2, double epsilon);

  /// Starts a new optimizer step (advances the bias-correction counter).
  void begin_step();
  /// Updates params[i] for the slice [offset, offset + params.size()).
  void update(std::size_t offset, std::span<double> params,
              std::span<const double> grads);
  std::size_t steps() const { return t_; }

 private:
  std::vector<double> m_;
  std::vector<double> v_;
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
  double correction1_ = 1.0;
  double correction2_ = 1.0;
};

struct FitReport {
  double mae = 0.0;
  double mse = 0.0;
  std::size_t n_eval_points = 0;
  BoxDomain eval_domain;
  std::uint64_t eval_seed = 0;
};

/// MAE and MSE of net against f on n seeded uniform points of eval_domain.
FitReport evaluate_fit(const ResNet& net, const Objective& f,
                       const BoxDomain& eval_domain, std::size_t n,
                       std::uint64_t seed);

}  // namespace sarange
