#include "sarange/resnet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sarange/error.hpp"
#include "sarange/report.hpp"
#include "sarange/rng.hpp"

namespace sarange {

using nlohmann::json;

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
  }
  return "relu";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "tanh") return Activation::tanh;
  throw Error(ErrorCode::invalid_argument,
              "unknown activation '" + std::string(name) + "'");
}

double activate(Activation a, double z) {
  switch (a) {
    case Activation::relu: return z > 0.0 ? z : 0.0;
    case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::tanh: return std::tanh(z);
  }
  return z;
}

double activate_derivative(Activation a, double z) {
  switch (a) {
    case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 - s);
    }
    case Activation::tanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
  }
  return 1.0;
}

ResNet::ResNet(std::vector<Layer> layers, Activation activation)
    : layers_(std::move(layers)), activation_(activation) {
  require(!layers_.empty(), "network needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    const std::string where = "layer " + std::to_string(l);
    require(layer.in_width() >= 1 && layer.out_width() >= 1,
            where + ": widths must be positive");
    require(static_cast<std::size_t>(layer.bias.size()) == layer.out_width(),
            where + ": bias length does not match out_width");
    if (l > 0) {
      require(layer.in_width() == layers_[l - 1].out_width(),
              where + ": width chain broken (in_width " +
                  std::to_string(layer.in_width()) + " != previous out_width " +
                  std::to_string(layers_[l - 1].out_width()) + ")");
    }
    require(!layer.has_skip || layer.in_width() == layer.out_width(),
            where + ": identity skip requires in_width == out_width");
  }
  const auto& out = layers_.back();
  require(out.out_width() == 1, "output layer must have width 1");
  require(!out.has_activation && !out.has_skip,
          "output layer must be affine (no activation, no skip)");
}

ResNet ResNet::from_widths(std::span<const std::size_t> widths,
                           Activation activation, std::uint64_t init_seed) {
  require(widths.size() >= 2, "need at least input and output widths");
  require(widths.back() == 1, "output width must be 1");
  Rng rng(init_seed);
  std::vector<Layer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const auto in = widths[l];
    const auto out = widths[l + 1];
    require(in >= 1 && out >= 1, "widths must be positive");
    const bool is_output = l + 2 == widths.size();
    Layer layer;
    layer.weights.resize(static_cast<Eigen::Index>(out),
                         static_cast<Eigen::Index>(in));
    layer.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out));
    layer.has_activation = !is_output;
    layer.has_skip = !is_output && in == out;
    const double limit = std::sqrt(6.0 / static_cast<double>(in));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) {
        layer.weights(i, j) = dist(rng);
      }
    }
    layers.push_back(std::move(layer));
  }
  return ResNet(std::move(layers), activation);
}

std::size_t ResNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.parameter_count();
  return n;
}

std::vector<std::size_t> ResNet::widths() const {
  std::vector<std::size_t> w{input_dim()};
  for (const auto& layer : layers_) w.push_back(layer.out_width());
  return w;
}

namespace {

[[noreturn]] void non_finite(std::size_t layer) {
  throw Error(ErrorCode::numerical,
              "non-finite activation in layer " + std::to_string(layer));
}

}  // namespace

double ResNet::forward(std::span<const double> x) const {
  require_dimension(input_dim(), x.size(), "forward");
  Eigen::VectorXd a =
      Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  Eigen::VectorXd z;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    z.noalias() = layer.weights * a;
    z += layer.bias;
    if (layer.has_activation) {
      z = z.unaryExpr([this](double v) { return activate(activation_, v); });
    }
    if (layer.has_skip) z += a;
    if (!z.allFinite()) non_finite(l);
    a.swap(z);
  }
  return a(0);
}

Eigen::RowVectorXd ResNet::forward_batch(const Eigen::MatrixXd& inputs) const {
  require_dimension(input_dim(), static_cast<std::size_t>(inputs.rows()),
                    "forward_batch");
  Eigen::MatrixXd a = inputs;
  Eigen::MatrixXd z;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    z.noalias() = layer.weights * a;
    z.colwise() += layer.bias;
    if (layer.has_activation) {
      if (activation_ == Activation::relu) {
        z = z.cwiseMax(0.0);
      } else {
        z = z.unaryExpr([this](double v) { return activate(activation_, v); });
      }
    }
    if (layer.has_skip) z += a;
    if (!z.allFinite()) non_finite(l);
    a.swap(z);
  }
  return a.row(0);
}

std::vector<double> ResNet::flat_parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& layer : layers_) {
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) {
        flat.push_back(layer.weights(i, j));
      }
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) flat.push_back(layer.bias(i));
  }
  return flat;
}

void ResNet::set_flat_parameters(std::span<const double> flat) {
  require(flat.size() == parameter_count(),
          "parameter vector length does not match network");
  std::size_t k = 0;
  for (auto& layer : layers_) {
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) {
        layer.weights(i, j) = flat[k++];
      }
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = flat[k++];
  }
}

std::vector<std::size_t> architecture_widths(std::string_view preset,
                                             std::size_t width_divisor) {
  require(width_divisor >= 1, "width divisor must be at least 1");
  std::vector<std::size_t> hidden;
  std::size_t input = 2;
  if (preset == "ackley") {
    hidden = {128, 256, 256, 256, 256, 128};
  } else if (preset == "dropwave") {
    hidden = {128, 256, 256, 512, 512, 512, 256, 128};
  } else if (preset == "multimin") {
    hidden = {128, 256, 256, 512, 512, 512, 256, 128};
    input = 3;
  } else {
    throw Error(ErrorCode::invalid_argument,
                "unknown architecture '" + std::string(preset) +
                    "'; known: ackley dropwave multimin");
  }
  std::vector<std::size_t> widths{input};
  for (auto h : hidden) widths.push_back(std::max<std::size_t>(1, h / width_divisor));
  widths.push_back(1);
  return widths;
}

ResNet architecture(std::string_view preset, std::uint64_t init_seed,
                    std::size_t width_divisor) {
  const auto widths = architecture_widths(preset, width_divisor);
  return ResNet::from_widths(widths, Activation::relu, init_seed);
}

ResNet architecture_ackley(std::uint64_t init_seed) {
  return architecture("ackley", init_seed);
}
ResNet architecture_dropwave(std::uint64_t init_seed) {
  return architecture("dropwave", init_seed);
}
ResNet architecture_multimin(std::uint64_t init_seed) {
  return architecture("multimin", init_seed);
}

std::size_t parameter_count_for_widths(std::span<const std::size_t> widths) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    n += (widths[l] + 1) * widths[l + 1];
  }
  return n;
}

Objective make_objective(std::shared_ptr<const ResNet> net, std::string name) {
  require(net != nullptr, "make_objective: null network");
  const auto dim = net->input_dim();
  auto single = [net](std::span<const double> x) { return net->forward(x); };
  auto batch = [net, dim](std::span<const double> pts, std::span<double> out) {
    constexpr std::size_t kChunk = 4096;
    for (std::size_t start = 0; start < out.size(); start += kChunk) {
      const auto n = std::min(kChunk, out.size() - start);
      // Row-major (n x dim) is column-major (dim x n).
      Eigen::Map<const Eigen::MatrixXd> cols(pts.data() + start * dim,
                                             static_cast<Eigen::Index>(dim),
                                             static_cast<Eigen::Index>(n));
      const Eigen::RowVectorXd values = net->forward_batch(cols);
      std::copy(values.data(), values.data() + n, out.begin() + static_cast<std::ptrdiff_t>(start));
    }
  };
  return Objective(dim, std::move(single), std::move(name), std::move(batch));
}

// ---- weight file -----------------------------------------------------------

namespace {

constexpr int kFormatVersion = 1;

const json& field(const json& obj, const std::string& where, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(ErrorCode::parse,
                "weights: missing field '" + where + key + "'");
  }
  return obj.at(key);
}

template <typename T>
T typed(const json& obj, const std::string& where, const char* key) {
  const json& v = field(obj, where, key);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::parse,
                "weights: field '" + where + key + "' has the wrong type");
  }
}

std::vector<double> number_array(const json& obj, const std::string& where,
                                 const char* key, std::size_t expected) {
  const json& arr = field(obj, where, key);
  if (!arr.is_array()) {
    throw Error(ErrorCode::parse,
                "weights: field '" + where + key + "' must be an array");
  }
  if (arr.size() != expected) {
    throw Error(ErrorCode::parse, "weights: field '" + where + key +
                                      "' has " + std::to_string(arr.size()) +
                                      " numbers, expected " +
                                      std::to_string(expected));
  }
  std::vector<double> out;
  out.reserve(expected);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) {
      throw Error(ErrorCode::parse, "weights: field '" + where + key + "[" +
                                        std::to_string(i) +
                                        "]' is not a number");
    }
    out.push_back(arr[i].get<double>());
  }
  return out;
}

}  // namespace

std::string weights_to_json(const ResNet& net) {
  json j;
  j["format_version"] = kFormatVersion;
  j["activation"] = std::string(to_string(net.activation()));
  j["input_dim"] = net.input_dim();
  json layers = json::array();
  for (const auto& layer : net.layers()) {
    json l;
    l["in_width"] = layer.in_width();
    l["out_width"] = layer.out_width();
    l["has_skip"] = layer.has_skip;
    l["has_activation"] = layer.has_activation;
    std::vector<double> w;
    w.reserve(layer.weights.size());
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        w.push_back(layer.weights(r, c));
      }
    }
    l["weights"] = std::move(w);
    l["bias"] = std::vector<double>(layer.bias.data(),
                                    layer.bias.data() + layer.bias.size());
    layers.push_back(std::move(l));
  }
  j["layers"] = std::move(layers);
  return j.dump() + "\n";
}

ResNet weights_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse, "weights: malformed JSON at byte " +
                                      std::to_string(e.byte) + ": " + e.what());
  }
  const int version = typed<int>(j, "", "format_version");
  if (version != kFormatVersion) {
    throw Error(ErrorCode::parse, "weights: unsupported format_version " +
                                      std::to_string(version));
  }
  const auto activation =
      parse_activation(typed<std::string>(j, "", "activation"));
  const auto input_dim = typed<std::size_t>(j, "", "input_dim");
  const json& arr = field(j, "", "layers");
  if (!arr.is_array() || arr.empty()) {
    throw Error(ErrorCode::parse, "weights: 'layers' must be a non-empty array");
  }
  std::vector<Layer> layers;
  for (std::size_t l = 0; l < arr.size(); ++l) {
    const std::string where = "layers[" + std::to_string(l) + "].";
    const auto in = typed<std::size_t>(arr[l], where, "in_width");
    const auto out = typed<std::size_t>(arr[l], where, "out_width");
    Layer layer;
    layer.has_skip = typed<bool>(arr[l], where, "has_skip");
    layer.has_activation = typed<bool>(arr[l], where, "has_activation");
    const auto w = number_array(arr[l], where, "weights", in * out);
    const auto b = number_array(arr[l], where, "bias", out);
    layer.weights.resize(static_cast<Eigen::Index>(out),
                         static_cast<Eigen::Index>(in));
    for (std::size_t r = 0; r < out; ++r) {
      for (std::size_t c = 0; c < in; ++c) {
        layer.weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            w[r * in + c];
      }
    }
    layer.bias = Eigen::Map<const Eigen::VectorXd>(b.data(),
                                                   static_cast<Eigen::Index>(out));
    layers.push_back(std::move(layer));
  }
  if (layers.front().in_width() != input_dim) {
    throw Error(ErrorCode::invalid_argument,
                "weights: width chain broken (input_dim " +
                    std::to_string(input_dim) + " != layers[0].in_width " +
                    std::to_string(layers.front().in_width()) + ")");
  }
  return ResNet(std::move(layers), activation);
}

void save_weights(const ResNet& net, const std::filesystem::path& path) {
  write_text_file(path, weights_to_json(net));
}

ResNet load_weights(const std::filesystem::path& path) {
  return weights_from_json(read_text_file(path));
}

}  // namespace sarange
