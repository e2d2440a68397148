#include "arnn/inference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "arnn/errors.hpp"

namespace arnn {

namespace {

// Right-hand sides of both stationary equations written into `image`;
// `wx_in` and `wy_in` are scratch. (W+^T Q)_i = sum_j W+_{ji} Q_j and the
// zero diagonal drops j = i. sum_{j != i} (W - w+_{ji}) q_j is
// W (sum q - q_i) - (w+^T q)_i.
void stationary_image(const ArnnModel& model, const ExternalInputs& inputs, const StateProbabilities& s,
                      Vector& wx_in, Vector& wy_in, StateProbabilities& image) {
  const double w = model.total_rate();
  const double base = static_cast<double>(model.size() - 1) * w;
  wx_in.noalias() = model.wx_plus().transpose() * s.Q;
  wy_in.noalias() = model.wy_plus().transpose() * s.q;
  const double sum_q = s.q.sum();
  const double sum_Q = s.Q.sum();
  image.Q.array() = (inputs.compromised.array() + wx_in.array()) /
                    (inputs.safe.array() + base + w * (sum_q - s.q.array()) - wy_in.array());
  image.q.array() = (inputs.safe.array() + wy_in.array()) /
                    (inputs.compromised.array() + base + w * (sum_Q - s.Q.array()) - wx_in.array());
}

}  // namespace

StateProbabilities apply_stationary_map(const ArnnModel& model, const ExternalInputs& inputs,
                                        const StateProbabilities& states) {
  const auto n = static_cast<Eigen::Index>(model.size());
  Vector wx_in(n), wy_in(n);
  StateProbabilities image{Vector(n), Vector(n)};
  stationary_image(model, inputs, states, wx_in, wy_in, image);
  return image;
}

double fixed_point_residual(const ArnnModel& model, const ExternalInputs& inputs,
                            const StateProbabilities& states) {
  const auto image = apply_stationary_map(model, inputs, states);
  return std::max((image.Q - states.Q).cwiseAbs().maxCoeff(), (image.q - states.q).cwiseAbs().maxCoeff());
}

FixedPointResult solve_fixed_point_traced(const ArnnModel& model, const ExternalInputs& inputs,
                                          const FixedPointOptions& options) {
  const std::size_t n = model.size();
  inputs.validate(n);
  if (!(options.damping > 0.0 && options.damping <= 1.0)) {
    throw InvalidParameterError("damping must lie in (0, 1]");
  }
  const double lo = options.clamp_eps;
  const double hi = 1.0 - options.clamp_eps;
  const double alpha = options.damping;
  const auto sn = static_cast<Eigen::Index>(n);

  StateProbabilities s{Vector::Constant(sn, 0.5), Vector::Constant(sn, 0.5)};
  StateProbabilities image{Vector(sn), Vector(sn)};
  Vector wx_in(sn), wy_in(sn), prev(sn);
  double update = 0.0;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    stationary_image(model, inputs, s, wx_in, wy_in, image);
    prev = s.Q;
    s.Q = ((1.0 - alpha) * s.Q + alpha * image.Q).cwiseMax(lo).cwiseMin(hi);
    update = (s.Q - prev).cwiseAbs().maxCoeff();
    prev = s.q;
    s.q = ((1.0 - alpha) * s.q + alpha * image.q).cwiseMax(lo).cwiseMin(hi);
    update = std::max(update, (s.q - prev).cwiseAbs().maxCoeff());
    if (!std::isfinite(update)) {
      break;
    }
    if (update < options.tolerance) {
      stationary_image(model, inputs, s, wx_in, wy_in, image);
      const double residual =
          std::max((image.Q.cwiseMax(lo).cwiseMin(hi) - s.Q).cwiseAbs().maxCoeff(),
                   (image.q.cwiseMax(lo).cwiseMin(hi) - s.q).cwiseAbs().maxCoeff());
      return {std::move(s), iter, residual};
    }
  }
  throw ConvergenceError("fixed point did not converge after " + std::to_string(options.max_iterations) +
                             " iterations (last update " + std::to_string(update) + ")",
                         update, options.max_iterations);
}

StateProbabilities solve_fixed_point(const ArnnModel& model, const ExternalInputs& inputs,
                                     const FixedPointOptions& options) {
  return solve_fixed_point_traced(model, inputs, options).states;
}

Vector decision_ratio(const StateProbabilities& states) {
  const auto Q = states.Q.array();
  const auto q = states.q.array();
  return (Q * (1.0 - q) / (q * (1.0 - Q))).matrix();
}

DecisionVector classify(const StateProbabilities& states, double gamma) {
  if (!(gamma > 0.0)) {
    throw InvalidParameterError("decision threshold gamma must be positive");
  }
  DecisionVector out;
  out.gamma = gamma;
  out.ratio = decision_ratio(states);
  out.compromised.resize(static_cast<std::size_t>(out.ratio.size()));
  for (Eigen::Index i = 0; i < out.ratio.size(); ++i) {
    out.compromised[static_cast<std::size_t>(i)] = out.ratio(i) > gamma ? 1 : 0;
  }
  return out;
}

double stationary_probability(const StateProbabilities& states, const std::vector<unsigned>& potentials_x,
                              const std::vector<unsigned>& potentials_y) {
  const std::size_t n = states.size();
  if (potentials_x.size() != n || potentials_y.size() != n) {
    throw InvalidSizeError("potential vectors must have length n");
  }
  double p = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto si = static_cast<Eigen::Index>(i);
    p *= std::pow(states.Q(si), potentials_x[i]) * (1.0 - states.Q(si));
    p *= std::pow(states.q(si), potentials_y[i]) * (1.0 - states.q(si));
  }
  return p;
}

}  // namespace arnn
