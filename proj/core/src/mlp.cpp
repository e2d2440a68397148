#include "arnn/mlp.hpp"

#include <cmath>
#include <random>
#include <string>

#include "arnn/errors.hpp"

namespace arnn {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vector sigmoid(const Vector& x) { return x.unaryExpr([](double v) { return sigmoid(v); }); }

std::vector<Vector> activations(const MlpModel& model, const Vector& input) {
  std::vector<Vector> acts;
  acts.reserve(model.weights.size() + 1);
  acts.push_back(input);
  for (std::size_t k = 0; k < model.weights.size(); ++k) {
    acts.push_back(sigmoid(model.weights[k] * acts.back() + model.biases[k]));
  }
  return acts;
}

void check_sizes(const std::vector<std::size_t>& sizes) {
  if (sizes.size() < 2) {
    throw InvalidSizeError("an MLP needs at least an input and an output layer");
  }
  for (auto s : sizes) {
    if (s == 0) {
      throw InvalidSizeError("layer sizes must be positive");
    }
  }
}

}  // namespace

MlpModel MlpModel::init(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed) {
  check_sizes(layer_sizes);
  std::mt19937_64 rng(seed);
  MlpModel m;
  for (std::size_t k = 0; k + 1 < layer_sizes.size(); ++k) {
    const auto rows = static_cast<Eigen::Index>(layer_sizes[k + 1]);
    const auto cols = static_cast<Eigen::Index>(layer_sizes[k]);
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer_sizes[k]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix w(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        w(i, j) = dist(rng);
      }
    }
    Vector b(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
      b(i) = dist(rng);
    }
    m.weights.push_back(std::move(w));
    m.biases.push_back(std::move(b));
  }
  return m;
}

MlpModel MlpModel::zeros(const std::vector<std::size_t>& layer_sizes) {
  check_sizes(layer_sizes);
  MlpModel m;
  for (std::size_t k = 0; k + 1 < layer_sizes.size(); ++k) {
    const auto rows = static_cast<Eigen::Index>(layer_sizes[k + 1]);
    m.weights.push_back(Matrix::Zero(rows, static_cast<Eigen::Index>(layer_sizes[k])));
    m.biases.push_back(Vector::Zero(rows));
  }
  return m;
}

MlpModel MlpModel::for_network(std::size_t n, std::uint64_t seed) { return init({n, n, n, n, n}, seed); }

std::vector<std::size_t> MlpModel::layer_sizes() const {
  std::vector<std::size_t> sizes;
  if (weights.empty()) {
    return sizes;
  }
  sizes.push_back(static_cast<std::size_t>(weights.front().cols()));
  for (const auto& w : weights) {
    sizes.push_back(static_cast<std::size_t>(w.rows()));
  }
  return sizes;
}

std::size_t MlpModel::input_size() const {
  return weights.empty() ? 0 : static_cast<std::size_t>(weights.front().cols());
}

std::size_t MlpModel::output_size() const {
  return weights.empty() ? 0 : static_cast<std::size_t>(weights.back().rows());
}

void MlpModel::validate() const {
  if (weights.empty() || weights.size() != biases.size()) {
    throw InvalidSizeError("MLP must have matching, non-empty weight and bias lists");
  }
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (biases[k].size() != weights[k].rows()) {
      throw InvalidSizeError("bias " + std::to_string(k) + " does not match its layer");
    }
    if (k > 0 && weights[k].cols() != weights[k - 1].rows()) {
      throw InvalidSizeError("layer " + std::to_string(k) + " input does not match previous output");
    }
    if (!weights[k].allFinite() || !biases[k].allFinite()) {
      throw InvalidParameterError("MLP parameters must be finite");
    }
  }
}

bool operator==(const MlpModel& a, const MlpModel& b) {
  if (a.weights.size() != b.weights.size()) {
    return false;
  }
  for (std::size_t k = 0; k < a.weights.size(); ++k) {
    if (a.weights[k].rows() != b.weights[k].rows() || a.weights[k].cols() != b.weights[k].cols() ||
        a.weights[k] != b.weights[k] || a.biases[k] != b.biases[k]) {
      return false;
    }
  }
  return true;
}

Vector mlp_forward(const MlpModel& model, const Vector& attack_ratio) {
  if (static_cast<std::size_t>(attack_ratio.size()) != model.input_size()) {
    throw InvalidSizeError("MLP input has wrong length");
  }
  return activations(model, attack_ratio).back();
}

MlpGradient mlp_gradient(const MlpModel& model, const Vector& attack_ratio, const Vector& compromised_ratio) {
  if (static_cast<std::size_t>(compromised_ratio.size()) != model.output_size()) {
    throw InvalidSizeError("MLP target has wrong length");
  }
  const auto acts = activations(model, attack_ratio);
  const std::size_t layers = model.weights.size();
  MlpGradient g;
  g.weights.resize(layers);
  g.biases.resize(layers);
  // delta = dE/dz for the pre-activation of the current layer
  Vector delta = (acts.back() - compromised_ratio).cwiseProduct(
      acts.back().cwiseProduct((1.0 - acts.back().array()).matrix()));
  for (std::size_t k = layers; k-- > 0;) {
    g.weights[k] = delta * acts[k].transpose();
    g.biases[k] = delta;
    if (k > 0) {
      const Vector back = model.weights[k].transpose() * delta;
      delta = back.cwiseProduct(acts[k].cwiseProduct((1.0 - acts[k].array()).matrix()));
    }
  }
  return g;
}

double mlp_cost(const MlpModel& model, const std::vector<TrainingSample>& samples) {
  double total = 0.0;
  for (const auto& s : samples) {
    total += 0.5 * (mlp_forward(model, s.attack_ratio) - s.compromised_ratio).squaredNorm();
  }
  return total;
}

MlpModel mlp_sgd_step(const MlpModel& model, const TrainingSample& sample, double eta) {
  if (!(eta >= 0.0)) {
    throw InvalidParameterError("learning rate must be non-negative");
  }
  if (eta == 0.0) {
    return model;
  }
  const auto g = mlp_gradient(model, sample.attack_ratio, sample.compromised_ratio);
  MlpModel next = model;
  for (std::size_t k = 0; k < next.weights.size(); ++k) {
    next.weights[k] -= eta * g.weights[k];
    next.biases[k] -= eta * g.biases[k];
  }
  return next;
}

MlpTrainResult mlp_train(const MlpModel& model, const std::vector<TrainingSample>& samples, double eta,
                         int epochs) {
  if (epochs < 0) {
    throw InvalidParameterError("epochs must be non-negative");
  }
  model.validate();
  MlpTrainResult result{model, {}};
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    for (const auto& s : samples) {
      result.model = mlp_sgd_step(result.model, s, eta);
    }
    const double c = mlp_cost(result.model, samples);
    if (!std::isfinite(c)) {
      throw Error(ErrorKind::Numeric, "MLP cost became non-finite at epoch " + std::to_string(epoch));
    }
    result.trace.push_back({epoch, c, 0});
  }
  return result;
}

std::vector<std::uint8_t> mlp_decide(const Vector& predicted, double theta) {
  std::vector<std::uint8_t> z(static_cast<std::size_t>(predicted.size()));
  for (Eigen::Index i = 0; i < predicted.size(); ++i) {
    z[static_cast<std::size_t>(i)] = predicted(i) > theta ? 1 : 0;
  }
  return z;
}

MlpOnlineResult mlp_train_online(const MlpModel& model, const std::vector<TrainingSample>& stream,
                                 std::size_t window, int epochs, double eta, double theta) {
  if (window < 1) {
    throw InvalidParameterError("training window must be at least one slot");
  }
  MlpOnlineResult result{{}, {}, model};
  for (std::size_t idx = 0; idx < stream.size(); ++idx) {
    const auto& sample = stream[idx];
    Vector predicted = mlp_forward(result.model, sample.attack_ratio);
    auto z = mlp_decide(predicted, theta);
    result.predictions.push_back({sample.slot, std::move(predicted), std::move(z)});
    if (epochs == 0 || sample.slot % static_cast<long>(window) != 0) {
      continue;
    }
    const std::size_t first = idx + 1 >= window ? idx + 1 - window : 0;
    for (int e = 0; e < epochs; ++e) {
      for (std::size_t k = first; k <= idx; ++k) {
        result.model = mlp_sgd_step(result.model, stream[k], eta);
      }
    }
    result.training_slots.push_back(sample.slot);
  }
  return result;
}

}  // namespace arnn
