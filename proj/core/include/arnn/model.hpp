#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace arnn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// The 2n-neuron associated network. X_i advocates "node i is compromised",
/// Y_i advocates "node i is safe". Only the excitatory weights are stored; for
/// every ordered pair i != j the inhibitory weight is total_rate minus the
/// excitatory one, so both always sum to the same constant firing rate.
class ArnnModel {
 public:
  /// Validates shapes, zero diagonals and 0 <= w <= total_rate off-diagonal.
  ArnnModel(double total_rate, Matrix wx_plus, Matrix wy_plus);

  /// Every off-diagonal weight at half the total rate: the state of total
  /// ignorance. With external inputs 0.75 * W * (n - 1) on both layers the
  /// fixed point is exactly Q = q = 0.5.
  static ArnnModel neutral(std::size_t n, double total_rate = 1.0);

  std::size_t size() const noexcept { return static_cast<std::size_t>(wx_plus_.rows()); }
  double total_rate() const noexcept { return total_rate_; }

  /// W+_{ij}: excitation of X_j by X_i.
  const Matrix& wx_plus() const noexcept { return wx_plus_; }
  /// w+_{ij}: excitation of Y_j by Y_i.
  const Matrix& wy_plus() const noexcept { return wy_plus_; }

  /// W-_{ij}: inhibition of Y_j by X_i.
  double wx_minus(std::size_t i, std::size_t j) const;
  /// w-_{ij}: inhibition of X_j by Y_i.
  double wy_minus(std::size_t i, std::size_t j) const;

  /// Returns a copy with new excitatory weights; validated like the constructor.
  ArnnModel with_weights(Matrix wx_plus, Matrix wy_plus) const;

  friend bool operator==(const ArnnModel& a, const ArnnModel& b);

 private:
  double total_rate_;
  Matrix wx_plus_;
  Matrix wy_plus_;
};

/// Per-node excitatory input to X_i (Lambda) and to Y_i (lambda). Each also
/// acts as the inhibitory input of the opposite neuron.
struct ExternalInputs {
  Vector compromised;  // Lambda
  Vector safe;         // lambda

  /// Lambda = A and lambda = 1 - A, the input mapping used for training and
  /// inference on attack ratios.
  static ExternalInputs from_attack_ratio(const Vector& attack_ratio);

  /// Lambda = lambda = 0.75 * W * (n - 1).
  static ExternalInputs neutral(std::size_t n, double total_rate);

  std::size_t size() const noexcept { return static_cast<std::size_t>(compromised.size()); }
  void validate(std::size_t n) const;
};

/// Stationary excitation probabilities: Q for the X layer, q for the Y layer.
struct StateProbabilities {
  Vector Q;
  Vector q;

  std::size_t size() const noexcept { return static_cast<std::size_t>(Q.size()); }
};

}  // namespace arnn
