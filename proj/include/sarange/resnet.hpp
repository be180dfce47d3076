#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "sarange/objectives.hpp"

namespace sarange {

enum class Activation { relu, sigmoid, tanh };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

/// One affine map x -> Wx + b, optionally followed by the activation and an
/// identity skip (sigma(Wx + b) + x). W is stored out_width x in_width.
struct Layer {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
  bool has_activation = true;
  bool has_skip = false;

  std::size_t in_width() const { return static_cast<std::size_t>(weights.cols()); }
  std::size_t out_width() const { return static_cast<std::size_t>(weights.rows()); }
  std::size_t parameter_count() const { return (in_width() + 1) * out_width(); }
};

/// Residual network R^d -> R. Immutable after construction except through
/// parameters(), which the trainer uses to update weights in place.
class ResNet {
 public:
  ResNet(std::vector<Layer> layers, Activation activation);

  /// Widths w_0 -> w_1 -> ... -> 1. Hidden layers get the activation and an
  /// identity skip whenever in and out widths match; the last layer is
  /// affine. Weights are drawn uniformly in +-sqrt(6 / in_width), biases 0.
  static ResNet from_widths(std::span<const std::size_t> widths,
                            Activation activation, std::uint64_t init_seed);

  std::size_t input_dim() const { return layers_.front().in_width(); }
  std::size_t parameter_count() const;
  Activation activation() const { return activation_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<std::size_t> widths() const;

  /// Mutable view of the layers for in-place parameter updates. Shapes and
  /// flags must not be changed through it.
  std::span<Layer> parameters() { return layers_; }

  double forward(std::span<const double> x) const;
  /// Column i of `inputs` (input_dim x batch) is one sample.
  Eigen::RowVectorXd forward_batch(const Eigen::MatrixXd& inputs) const;

  /// Flattened parameters: for each layer, W row-major then b.
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(std::span<const double> flat);

 private:
  std::vector<Layer> layers_;
  Activation activation_;
};

double activate(Activation a, double z);
/// Derivative of the activation, expressed through the pre-activation z.
/// ReLU'(0) is taken as 0.
double activate_derivative(Activation a, double z);

// Architectures from the three experiments. width_divisor > 1 shrinks every
// hidden width for quick runs.
std::vector<std::size_t> architecture_widths(std::string_view preset,
                                             std::size_t width_divisor = 1);
ResNet architecture(std::string_view preset, std::uint64_t init_seed,
                    std::size_t width_divisor = 1);
ResNet architecture_ackley(std::uint64_t init_seed);
ResNet architecture_dropwave(std::uint64_t init_seed);
ResNet architecture_multimin(std::uint64_t init_seed);

/// Sum over layers of (in + 1) * out.
std::size_t parameter_count_for_widths(std::span<const std::size_t> widths);

/// Wraps a network as a black-box objective; batch evaluation goes through
/// forward_batch.
Objective make_objective(std::shared_ptr<const ResNet> net,
                         std::string name = "resnet");

// Weight file (JSON). Round trips are bit-exact.
std::string weights_to_json(const ResNet& net);
ResNet weights_from_json(std::string_view text);
void save_weights(const ResNet& net, const std::filesystem::path& path);
ResNet load_weights(const std::filesystem::path& path);

}  // namespace sarange
