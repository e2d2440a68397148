#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "arnn/learning.hpp"
#include "arnn/model.hpp"

namespace arnn {

/// Fully connected feed-forward baseline with a sigmoid at every neuron.
/// weights[k] maps layer k (size sizes[k]) to layer k+1.
struct MlpModel {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  /// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] from a seeded mt19937_64.
  static MlpModel init(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed);
  static MlpModel zeros(const std::vector<std::size_t>& layer_sizes);
  /// Input, three hidden layers and output, n neurons each.
  static MlpModel for_network(std::size_t n, std::uint64_t seed);

  std::vector<std::size_t> layer_sizes() const;
  std::size_t input_size() const;
  std::size_t output_size() const;
  void validate() const;

  friend bool operator==(const MlpModel& a, const MlpModel& b);
};

/// Predicted compromised ratios, each in (0, 1).
Vector mlp_forward(const MlpModel& model, const Vector& attack_ratio);

struct MlpGradient {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
};

/// Backpropagated gradient of 1/2 ||forward(A) - K||^2.
MlpGradient mlp_gradient(const MlpModel& model, const Vector& attack_ratio, const Vector& compromised_ratio);

double mlp_cost(const MlpModel& model, const std::vector<TrainingSample>& samples);

MlpModel mlp_sgd_step(const MlpModel& model, const TrainingSample& sample, double eta);

struct MlpTrainResult {
  MlpModel model;
  std::vector<EpochRecord> trace;
};

/// Plain per-sample SGD in the given order; cost recorded after each epoch.
MlpTrainResult mlp_train(const MlpModel& model, const std::vector<TrainingSample>& samples, double eta,
                         int epochs);

/// Z_i = 1 iff predicted K_i > theta (strict).
std::vector<std::uint8_t> mlp_decide(const Vector& predicted, double theta);

struct MlpSlotPrediction {
  long slot = 0;
  Vector predicted;
  std::vector<std::uint8_t> compromised;
};

struct MlpOnlineResult {
  std::vector<MlpSlotPrediction> predictions;
  std::vector<long> training_slots;
  MlpModel model;
};

/// Same prequential schedule as the ARNN online loop: predict slot l, then
/// train on the last `window` samples when l mod window == 0.
MlpOnlineResult mlp_train_online(const MlpModel& model, const std::vector<TrainingSample>& stream,
                                 std::size_t window, int epochs, double eta, double theta);

}  // namespace arnn
