#include "arnn/learning.hpp"

#include <algorithm>
#include <string>

#include "arnn/errors.hpp"

namespace arnn {

namespace {

using RowVector = Eigen::RowVectorXd;

Matrix checked_inverse(const Matrix& m, const char* name) {
  Eigen::PartialPivLU<Matrix> lu(m);
  const double rcond = lu.rcond();
  if (!(rcond >= kSingularRcond)) {
    throw SingularityError(std::string(name) + " is singular (rcond " + std::to_string(rcond) + ")", rcond);
  }
  return lu.inverse();
}

void check_sample(const TrainingSample& sample, std::size_t n) {
  if (static_cast<std::size_t>(sample.attack_ratio.size()) != n ||
      static_cast<std::size_t>(sample.compromised_ratio.size()) != n) {
    throw InvalidSizeError("training sample for slot " + std::to_string(sample.slot) + " has wrong length");
  }
}

// Returns false when the sample was skipped for numerical reasons.
bool try_step(ArnnModel& model, const TrainingSample& sample, double eta, const FixedPointOptions& fp) {
  try {
    model = sgd_step(model, sample, eta, fp);
    return true;
  } catch (const ConvergenceError&) {
    return false;
  } catch (const SingularityError&) {
    return false;
  }
}

// Cost over the samples whose fixed point converges.
double epoch_cost(const ArnnModel& model, const std::vector<TrainingSample>& samples,
                  const FixedPointOptions& fp) {
  double total = 0.0;
  for (const auto& s : samples) {
    try {
      const auto states = solve_fixed_point(model, ExternalInputs::from_attack_ratio(s.attack_ratio), fp);
      total += sample_cost(states, s.compromised_ratio);
    } catch (const ConvergenceError&) {
    }
  }
  return total;
}

}  // namespace

GradientWorkspace build_workspace(const ArnnModel& model, const ExternalInputs& inputs,
                                  const StateProbabilities& states) {
  const auto n = static_cast<Eigen::Index>(model.size());
  inputs.validate(model.size());
  const double w = model.total_rate();
  const double base = static_cast<double>(n - 1) * w;
  const Matrix& wx = model.wx_plus();
  const Matrix& wy = model.wy_plus();
  const Vector& Q = states.Q;
  const Vector& q = states.q;

  GradientWorkspace ws;
  ws.D = (inputs.safe.array() + base + w * (q.sum() - q.array()) - (wy.transpose() * q).array()).matrix();
  ws.d = (inputs.compromised.array() + base + w * (Q.sum() - Q.array()) - (wx.transpose() * Q).array())
             .matrix();

  Matrix off_diag = Matrix::Constant(n, n, w);
  off_diag.diagonal().setZero();

  ws.Bp = wx * ws.D.cwiseInverse().asDiagonal();
  ws.C = (off_diag - wy) * Q.cwiseQuotient(ws.D).asDiagonal();
  ws.Fp = wy * ws.d.cwiseInverse().asDiagonal();
  ws.G = (off_diag - wx) * q.cwiseQuotient(ws.d).asDiagonal();

  ws.Bsp = ws.Fp;
  ws.Cs = ws.G;
  ws.Fsp = ws.Bp;
  ws.Gs = ws.C;

  const Matrix I = Matrix::Identity(n, n);
  ws.minv_f = checked_inverse(I - ws.Fp, "I - F+");
  ws.minv_main = checked_inverse(I - ws.Bp - ws.G * ws.minv_f * ws.C, "I - B+ - G (I - F+)^-1 C");
  ws.minv_fs = checked_inverse(I - ws.Fsp, "I - F*+");
  ws.minv_main_star =
      checked_inverse(I - ws.Bsp - ws.Gs * ws.minv_fs * ws.Cs, "I - B*+ - G* (I - F*+)^-1 C*");
  return ws;
}

StateDerivatives state_derivatives(const GradientWorkspace& ws, const StateProbabilities& states,
                                   std::size_t from, std::size_t to) {
  const auto n = ws.D.size();
  const auto u = static_cast<Eigen::Index>(from);
  const auto v = static_cast<Eigen::Index>(to);
  if (from == to) {
    throw InvalidParameterError("diagonal weights are fixed at zero and have no derivative");
  }
  if (u >= n || v >= n) {
    throw InvalidSizeError("weight index out of range");
  }
  const Vector& Q = states.Q;
  const Vector& q = states.q;
  StateDerivatives out;

  {
    // W+_{uv} enters the numerator of Q_v and the denominator of q_v.
    const double direct = Q(u) / ws.D(v);
    const double cross = Q(u) * q(v) / ws.d(v);
    RowVector rhs = -cross * (ws.minv_f.row(v) * ws.C);
    rhs(v) += direct;
    const RowVector dQ = rhs * ws.minv_main;
    RowVector y = -dQ * ws.G;
    y(v) += cross;
    const RowVector dq = y * ws.minv_f;
    out.dQ_dWx = dQ.transpose();
    out.dq_dWx = dq.transpose();
  }
  {
    // w+_{uv} enters the numerator of q_v and the denominator of Q_v.
    const double direct = q(u) / ws.d(v);
    const double cross = q(u) * Q(v) / ws.D(v);
    RowVector rhs = -cross * (ws.minv_fs.row(v) * ws.Cs);
    rhs(v) += direct;
    const RowVector dq = rhs * ws.minv_main_star;
    RowVector y = -dq * ws.Gs;
    y(v) += cross;
    const RowVector dQ = y * ws.minv_fs;
    out.dQ_dWy = dQ.transpose();
    out.dq_dWy = dq.transpose();
  }
  return out;
}

double sample_cost(const StateProbabilities& states, const Vector& compromised_ratio) {
  const auto rQ = (states.Q - compromised_ratio).array();
  const auto rq = (states.q.array() - (1.0 - compromised_ratio.array()));
  return 0.5 * ((rQ * rQ).sum() + (rq * rq).sum());
}

double cost(const ArnnModel& model, const std::vector<TrainingSample>& batch, const FixedPointOptions& fp) {
  if (batch.empty()) {
    throw InvalidSizeError("cost needs a non-empty batch");
  }
  double total = 0.0;
  for (const auto& s : batch) {
    check_sample(s, model.size());
    const auto states = solve_fixed_point(model, ExternalInputs::from_attack_ratio(s.attack_ratio), fp);
    total += sample_cost(states, s.compromised_ratio);
  }
  return total;
}

GradientPair cost_gradient_at(const StateProbabilities& states, const GradientWorkspace& ws,
                              const Vector& compromised_ratio) {
  const Vector& Q = states.Q;
  const Vector& q = states.q;
  const Vector rQ = Q - compromised_ratio;
  const Vector rq = (q.array() - 1.0 + compromised_ratio.array()).matrix();

  // dQ/dW+_{UV} = Q_U P_V and dq/dW+_{UV} = Q_U R_V where, as row-stacked matrices,
  //   P = diag(1/D) M - diag(q/d) (I-F+)^-1 C M,   R = (-P G + diag(q/d)) (I-F+)^-1.
  // Only P x and R y are needed, so everything below is matrix-vector work.
  const Vector q_over_d = q.cwiseQuotient(ws.d);
  auto apply_P = [&](const Vector& x) -> Vector {
    const Vector mx = ws.minv_main * x;
    return mx.cwiseQuotient(ws.D) - q_over_d.cwiseProduct(ws.minv_f * (ws.C * mx));
  };
  const Vector t = ws.minv_f * rq;
  const Vector g_x = apply_P(rQ - ws.G * t) + q_over_d.cwiseProduct(t);

  // Mirror image for w+: dq/dw+_{uv} = q_u P*_v, dQ/dw+_{uv} = q_u R*_v.
  const Vector Q_over_D = Q.cwiseQuotient(ws.D);
  auto apply_Ps = [&](const Vector& x) -> Vector {
    const Vector mx = ws.minv_main_star * x;
    return mx.cwiseQuotient(ws.d) - Q_over_D.cwiseProduct(ws.minv_fs * (ws.Cs * mx));
  };
  const Vector ts = ws.minv_fs * rQ;
  const Vector g_y = apply_Ps(rq - ws.Gs * ts) + Q_over_D.cwiseProduct(ts);

  GradientPair out{Q * g_x.transpose(), q * g_y.transpose()};
  out.dE_dWx.diagonal().setZero();
  out.dE_dWy.diagonal().setZero();
  return out;
}

GradientPair cost_gradient(const ArnnModel& model, const TrainingSample& sample, const FixedPointOptions& fp) {
  check_sample(sample, model.size());
  const auto inputs = ExternalInputs::from_attack_ratio(sample.attack_ratio);
  const auto states = solve_fixed_point(model, inputs, fp);
  const auto ws = build_workspace(model, inputs, states);
  return cost_gradient_at(states, ws, sample.compromised_ratio);
}

ArnnModel sgd_step(const ArnnModel& model, const TrainingSample& sample, double eta,
                   const FixedPointOptions& fp) {
  if (!(eta >= 0.0)) {
    throw InvalidParameterError("learning rate must be non-negative");
  }
  if (eta == 0.0) {
    return model;
  }
  const auto grad = cost_gradient(model, sample, fp);
  const double w = model.total_rate();
  Matrix wx = (model.wx_plus() - eta * grad.dE_dWx).cwiseMax(0.0).cwiseMin(w);
  Matrix wy = (model.wy_plus() - eta * grad.dE_dWy).cwiseMax(0.0).cwiseMin(w);
  wx.diagonal().setZero();
  wy.diagonal().setZero();
  return model.with_weights(std::move(wx), std::move(wy));
}

TrainResult train_offline(const ArnnModel& model, const std::vector<TrainingSample>& train,
                          const TrainConfig& cfg) {
  if (train.empty()) {
    throw InvalidSizeError("training set is empty");
  }
  if (!(cfg.eta > 0.0)) {
    throw InvalidParameterError("learning rate must be positive");
  }
  if (cfg.epochs < 1) {
    throw InvalidParameterError("need at least one epoch");
  }
  for (const auto& s : train) {
    check_sample(s, model.size());
  }
  TrainResult result{model, {}};
  result.trace.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::size_t skipped = 0;
    for (const auto& s : train) {
      if (!try_step(result.model, s, cfg.eta, cfg.fixed_point)) {
        ++skipped;
      }
    }
    result.trace.push_back({epoch, epoch_cost(result.model, train, cfg.fixed_point), skipped});
  }
  return result;
}

OnlineResult train_online(const ArnnModel& model, const std::vector<TrainingSample>& stream,
                          const OnlineConfig& cfg, const OnlineObserver& observer) {
  if (cfg.window < 1) {
    throw InvalidParameterError("training window must be at least one slot");
  }
  if (cfg.epochs < 0) {
    throw InvalidParameterError("epochs must be non-negative");
  }
  OnlineResult result{{}, {}, 0, model};
  result.decisions.reserve(stream.size());
  for (std::size_t idx = 0; idx < stream.size(); ++idx) {
    const auto& sample = stream[idx];
    check_sample(sample, model.size());
    const auto states =
        solve_fixed_point(result.model, ExternalInputs::from_attack_ratio(sample.attack_ratio), cfg.fixed_point);
    result.decisions.push_back({sample.slot, classify(states, cfg.gamma)});
    if (observer) {
      observer(sample.slot, false, result.model);
    }

    if (cfg.epochs == 0 || sample.slot % static_cast<long>(cfg.window) != 0) {
      continue;
    }
    const std::size_t first = idx + 1 >= cfg.window ? idx + 1 - cfg.window : 0;
    for (int e = 0; e < cfg.epochs; ++e) {
      for (std::size_t k = first; k <= idx; ++k) {
        if (!try_step(result.model, stream[k], cfg.eta, cfg.fixed_point)) {
          ++result.skipped;
        }
      }
    }
    result.training_slots.push_back(sample.slot);
    if (observer) {
      observer(sample.slot, true, result.model);
    }
  }
  return result;
}

}  // namespace arnn
