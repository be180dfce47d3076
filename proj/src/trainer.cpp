#include "sarange/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sarange/error.hpp"
#include "sarange/rng.hpp"

namespace sarange {

void TrainConfig::validate(std::size_t dataset_size) const {
  require(learning_rate > 0.0 && std::isfinite(learning_rate),
          "learning_rate must be positive");
  require(epochs >= 1, "epochs must be at least 1");
  require(batch_size <= dataset_size,
          "batch_size must not exceed the dataset size");
  require(adam_beta1 >= 0.0 && adam_beta1 < 1.0, "adam_beta1 must be in [0,1)");
  require(adam_beta2 >= 0.0 && adam_beta2 < 1.0, "adam_beta2 must be in [0,1)");
  require(adam_epsilon > 0.0, "adam_epsilon must be positive");
}

std::size_t TrainConfig::effective_batch_size(std::size_t dataset_size) const {
  if (batch_size != 0) return batch_size;
  return dataset_size <= 4096 ? dataset_size : 256;
}

// ---- Adam ------------------------------------------------------------------

Adam::Adam(std::size_t parameter_count, double learning_rate, double beta1,
           double beta2, double epsilon)
    : m_(parameter_count, 0.0), v_(parameter_count, 0.0), lr_(learning_rate),
      beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

void Adam::begin_step() {
  ++t_;
  correction1_ = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  correction2_ = 1.0 - std::pow(beta2_, static_cast<double>(t_));
}

void Adam::update(std::size_t offset, std::span<double> params,
                  std::span<const double> grads) {
  require(params.size() == grads.size() && offset + params.size() <= m_.size(),
          "Adam::update: slice out of range");
  for (std::size_t i = 0; i < params.size(); ++i) {
    double& m = m_[offset + i];
    double& v = v_[offset + i];
    const double g = grads[i];
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = beta2_ * v + (1.0 - beta2_) * g * g;
    const double m_hat = m / correction1_;
    const double v_hat = v / correction2_;
    params[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
  }
}

// ---- backpropagation -------------------------------------------------------

namespace {

struct LayerGrad {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
};

struct Workspace {
  std::vector<Eigen::MatrixXd> inputs;  // input to each layer
  std::vector<Eigen::MatrixXd> pre;     // pre-activation of each layer
  Eigen::MatrixXd output;
};

Eigen::MatrixXd activate_matrix(Activation a, const Eigen::MatrixXd& z) {
  if (a == Activation::relu) return z.cwiseMax(0.0);
  return z.unaryExpr([a](double v) { return activate(a, v); });
}

/// Mean squared error over the batch; fills grads with its gradient.
double forward_backward(const ResNet& net, const Eigen::MatrixXd& x,
                        const Eigen::RowVectorXd& targets,
                        std::vector<LayerGrad>& grads, Workspace& ws) {
  const auto& layers = net.layers();
  const auto act = net.activation();
  const auto batch = static_cast<double>(x.cols());
  ws.inputs.resize(layers.size());
  ws.pre.resize(layers.size());
  grads.resize(layers.size());

  ws.inputs[0] = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    const Eigen::MatrixXd& in = ws.inputs[l];
    ws.pre[l].noalias() = layer.weights * in;
    ws.pre[l].colwise() += layer.bias;
    Eigen::MatrixXd out =
        layer.has_activation ? activate_matrix(act, ws.pre[l]) : ws.pre[l];
    if (layer.has_skip) out += in;
    if (l + 1 < layers.size()) {
      ws.inputs[l + 1] = std::move(out);
    } else {
      ws.output = std::move(out);
    }
  }

  const Eigen::RowVectorXd residual = ws.output.row(0) - targets;
  const double loss = residual.squaredNorm() / batch;

  Eigen::MatrixXd upstream = (2.0 / batch) * residual;
  Eigen::MatrixXd dz;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto& layer = layers[l];
    if (layer.has_activation) {
      if (act == Activation::relu) {
        dz = (ws.pre[l].array() > 0.0).select(upstream, 0.0);
      } else {
        dz = upstream.cwiseProduct(ws.pre[l].unaryExpr(
            [act](double v) { return activate_derivative(act, v); }));
      }
    } else {
      dz = upstream;
    }
    grads[l].weights.noalias() = dz * ws.inputs[l].transpose();
    grads[l].bias = dz.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd down = layer.weights.transpose() * dz;
      if (layer.has_skip) down += upstream;
      upstream = std::move(down);
    }
  }
  return loss;
}

Eigen::MatrixXd gather_inputs(const Dataset& data,
                              std::span<const std::size_t> rows) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(data.dim),
                    static_cast<Eigen::Index>(rows.size()));
  for (std::size_t c = 0; c < rows.size(); ++c) {
    const auto in = data.input(rows[c]);
    for (std::size_t j = 0; j < data.dim; ++j) {
      x(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) = in[j];
    }
  }
  return x;
}

Eigen::RowVectorXd gather_targets(const Dataset& data,
                                  std::span<const std::size_t> rows) {
  Eigen::RowVectorXd t(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t c = 0; c < rows.size(); ++c) {
    t(static_cast<Eigen::Index>(c)) = data.targets[rows[c]];
  }
  return t;
}

Eigen::MatrixXd all_inputs(const Dataset& data) {
  // Row-major (n x dim) storage is column-major (dim x n).
  return Eigen::Map<const Eigen::MatrixXd>(data.inputs.data(),
                                           static_cast<Eigen::Index>(data.dim),
                                           static_cast<Eigen::Index>(data.size()));
}

}  // namespace

TrainResult train(ResNet& net, const Dataset& data, const TrainConfig& cfg,
                  const TrainProgress& progress) {
  require_dimension(net.input_dim(), data.dim, "train: dataset vs network");
  require(data.size() >= 1, "train: empty dataset");
  cfg.validate(data.size());

  const std::size_t n = data.size();
  const std::size_t batch = cfg.effective_batch_size(n);
  Rng rng(cfg.seed);
  Adam adam(net.parameter_count(), cfg.learning_rate, cfg.adam_beta1,
            cfg.adam_beta2, cfg.adam_epsilon);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const bool full_batch = batch == n;
  Eigen::MatrixXd full_x;
  Eigen::RowVectorXd full_t;
  if (full_batch) {
    full_x = all_inputs(data);
    full_t = Eigen::Map<const Eigen::RowVectorXd>(data.targets.data(),
                                                  static_cast<Eigen::Index>(n));
  }

  std::vector<LayerGrad> grads;
  Workspace ws;
  TrainResult result;
  result.loss_history.reserve(cfg.epochs);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (!full_batch) std::shuffle(order.begin(), order.end(), rng);
    double weighted_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const auto count = std::min(batch, n - start);
      double loss = 0.0;
      if (full_batch) {
        loss = forward_backward(net, full_x, full_t, grads, ws);
      } else {
        const std::span<const std::size_t> rows(order.data() + start, count);
        loss = forward_backward(net, gather_inputs(data, rows),
                                gather_targets(data, rows), grads, ws);
      }
      if (!std::isfinite(loss)) {
        throw Error(ErrorCode::numerical,
                    "training diverged: non-finite loss at epoch " +
                        std::to_string(epoch + 1));
      }
      weighted_loss += loss * static_cast<double>(count);

      adam.begin_step();
      std::size_t offset = 0;
      auto layers = net.parameters();
      for (std::size_t l = 0; l < layers.size(); ++l) {
        auto& w = layers[l].weights;
        auto& b = layers[l].bias;
        // Same column-major layout on both sides; Adam is element-wise, so the
        // slice order does not matter.
        adam.update(offset, {w.data(), static_cast<std::size_t>(w.size())},
                    {grads[l].weights.data(),
                     static_cast<std::size_t>(grads[l].weights.size())});
        offset += static_cast<std::size_t>(w.size());
        adam.update(offset, {b.data(), static_cast<std::size_t>(b.size())},
                    {grads[l].bias.data(),
                     static_cast<std::size_t>(grads[l].bias.size())});
        offset += static_cast<std::size_t>(b.size());
      }
    }
    const double epoch_loss = weighted_loss / static_cast<double>(n);
    result.loss_history.push_back(epoch_loss);
    if (progress) progress(epoch + 1, epoch_loss);
  }
  result.final_mse = training_mse(net, data);
  if (!std::isfinite(result.final_mse)) {
    throw Error(ErrorCode::numerical,
                "training diverged: non-finite loss after epoch " +
                    std::to_string(cfg.epochs));
  }
  return result;
}

std::vector<double> gradient(const ResNet& net, std::span<const double> x,
                             double target) {
  require_dimension(net.input_dim(), x.size(), "gradient");
  Eigen::MatrixXd input = Eigen::Map<const Eigen::MatrixXd>(
      x.data(), static_cast<Eigen::Index>(x.size()), 1);
  Eigen::RowVectorXd t(1);
  t(0) = target;
  std::vector<LayerGrad> grads;
  Workspace ws;
  forward_backward(net, input, t, grads, ws);
  if (!ws.output.allFinite()) {
    throw Error(ErrorCode::numerical, "gradient: non-finite network output");
  }

  std::vector<double> flat;
  flat.reserve(net.parameter_count());
  for (const auto& g : grads) {
    for (Eigen::Index i = 0; i < g.weights.rows(); ++i) {
      for (Eigen::Index j = 0; j < g.weights.cols(); ++j) {
        flat.push_back(g.weights(i, j));
      }
    }
    for (Eigen::Index i = 0; i < g.bias.size(); ++i) flat.push_back(g.bias(i));
  }
  return flat;
}

double training_mse(const ResNet& net, const Dataset& data) {
  require_dimension(net.input_dim(), data.dim, "training_mse");
  const Eigen::RowVectorXd y = net.forward_batch(all_inputs(data));
  const Eigen::Map<const Eigen::RowVectorXd> t(
      data.targets.data(), static_cast<Eigen::Index>(data.size()));
  return (y - t).squaredNorm() / static_cast<double>(data.size());
}

FitReport evaluate_fit(const ResNet& net, const Objective& f,
                       const BoxDomain& eval_domain, std::size_t n,
                       std::uint64_t seed) {
  require(n >= 1, "evaluate_fit: n must be at least 1");
  require_dimension(net.input_dim(), eval_domain.dim(), "evaluate_fit: domain");
  require_dimension(f.dim(), eval_domain.dim(), "evaluate_fit: objective");

  Rng rng(seed);
  const auto dim = eval_domain.dim();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n));
  std::vector<double> truth(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point p = sample_uniform(eval_domain, rng);
    for (std::size_t j = 0; j < dim; ++j) {
      x(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = p[j];
    }
    truth[i] = f(p);
  }
  const Eigen::RowVectorXd y = net.forward_batch(x);
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y(static_cast<Eigen::Index>(i)) - truth[i];
    abs_sum += std::abs(e);
    sq_sum += e * e;
  }
  return FitReport{abs_sum / static_cast<double>(n),
                   sq_sum / static_cast<double>(n), n, eval_domain, seed};
}

}  // namespace sarange
