#pragma once

#include <cstdint>
#include <vector>

#include "arnn/model.hpp"

namespace arnn {

/// Damped Picard iteration x <- (1 - damping) x + damping F(x), started from
/// Q = q = 0.5, iterates clamped to [clamp_eps, 1 - clamp_eps] every step.
struct FixedPointOptions {
  double damping = 0.5;
  double tolerance = 1e-10;  // on the max absolute update
  int max_iterations = 10000;
  double clamp_eps = 1e-6;
};

struct FixedPointResult {
  StateProbabilities states;
  int iterations = 0;
  double residual = 0.0;  // max_i |x_i - clamp(F(x))_i| at the returned point
};

/// Solves the coupled stationary equations
///   Q_i = (Lambda_i + sum_j W+_{ji} Q_j) / (lambda_i + (n-1)W + sum_{j!=i} (W - w+_{ji}) q_j)
///   q_i = (lambda_i + sum_j w+_{ji} q_j) / (Lambda_i + (n-1)W + sum_{j!=i} (W - W+_{ji}) Q_j)
/// Throws ConvergenceError with the last update size after max_iterations.
FixedPointResult solve_fixed_point_traced(const ArnnModel& model, const ExternalInputs& inputs,
                                          const FixedPointOptions& options = {});

StateProbabilities solve_fixed_point(const ArnnModel& model, const ExternalInputs& inputs,
                                     const FixedPointOptions& options = {});

/// One unclamped, undamped application of the right-hand sides.
StateProbabilities apply_stationary_map(const ArnnModel& model, const ExternalInputs& inputs,
                                        const StateProbabilities& states);

/// Max over the 2n equations of |x - F(x)|, with F unclamped.
double fixed_point_residual(const ArnnModel& model, const ExternalInputs& inputs,
                            const StateProbabilities& states);

/// L_i = Q_i (1 - q_i) / (q_i (1 - Q_i)); equals Prob[K_i > k_i] in the
/// stationary regime when Q_i > q_i.
Vector decision_ratio(const StateProbabilities& states);

struct DecisionVector {
  std::vector<std::uint8_t> compromised;  // Z_i
  Vector ratio;                           // L_i
  double gamma = 0.0;
};

/// Z_i = 1 iff L_i > gamma (strict).
DecisionVector classify(const StateProbabilities& states, double gamma);

/// prod_i Q_i^{H_i} (1 - Q_i) q_i^{h_i} (1 - q_i): the product-form joint
/// stationary probability of the neuron potentials (H, h).
double stationary_probability(const StateProbabilities& states, const std::vector<unsigned>& potentials_x,
                              const std::vector<unsigned>& potentials_y);

}  // namespace arnn
