#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "arnn/inference.hpp"
#include "arnn/model.hpp"

namespace arnn {

/// One training slot: attack ratios drive the inputs (Lambda = A,
/// lambda = 1 - A), compromised ratios are the targets (Q -> K, q -> 1 - K).
struct TrainingSample {
  Vector attack_ratio;       // A
  Vector compromised_ratio;  // K
  long slot = 0;
};

/// Everything the exact state derivatives need at one fixed point.
///
/// Conventions: D_i and d_i are the denominators of Q_i and q_i. Matrices are
/// applied to row vectors, (x M)_j = sum_i x_i M_{ij}. The coupling matrices C
/// and G carry zero diagonals since the denominators exclude j = i.
///
///   Bp_{ij} = W+_{ij} / D_j         C_{ij} = Q_j (W - w+_{ij}) / D_j
///   Fp_{ij} = w+_{ij} / d_j         G_{ij} = q_j (W - W+_{ij}) / d_j
///
/// The starred set swaps the two layers: Bsp = Fp, Cs = G, Fsp = Bp, Gs = C.
///
///   minv_f         = (I - Fp)^-1
///   minv_main      = (I - Bp - G minv_f C)^-1
///   minv_fs        = (I - Fsp)^-1
///   minv_main_star = (I - Bsp - Gs minv_fs Cs)^-1
struct GradientWorkspace {
  Vector D;
  Vector d;
  Matrix Bp, C, Fp, G;
  Matrix Bsp, Cs, Fsp, Gs;
  Matrix minv_f;
  Matrix minv_main;
  Matrix minv_fs;
  Matrix minv_main_star;
};

/// Reciprocal condition estimate below which a system is treated as singular.
inline constexpr double kSingularRcond = 1e-12;

GradientWorkspace build_workspace(const ArnnModel& model, const ExternalInputs& inputs,
                                  const StateProbabilities& states);

/// dQ/dW+_{UV}, dq/dW+_{UV}, dQ/dw+_{UV}, dq/dw+_{UV}.
struct StateDerivatives {
  Vector dQ_dWx;
  Vector dq_dWx;
  Vector dQ_dWy;
  Vector dq_dWy;
};

StateDerivatives state_derivatives(const GradientWorkspace& ws, const StateProbabilities& states,
                                   std::size_t from, std::size_t to);

/// dE/dW+ and dE/dw+; diagonals are zero.
struct GradientPair {
  Matrix dE_dWx;
  Matrix dE_dWy;
};

/// E = 1/2 sum_l sum_i (Q_i - K_i)^2 + (q_i - (1 - K_i))^2.
double cost(const ArnnModel& model, const std::vector<TrainingSample>& batch,
            const FixedPointOptions& fp = {});

/// Contribution of one sample at already-solved states.
double sample_cost(const StateProbabilities& states, const Vector& compromised_ratio);

/// Gradient of the single-sample cost. All (U, V) pairs share the four
/// inverses of one workspace and the per-pair derivative vectors factor as
/// Q_U (resp. q_u) times a row that depends only on V, so the whole gradient
/// costs O(n^3).
GradientPair cost_gradient(const ArnnModel& model, const TrainingSample& sample,
                           const FixedPointOptions& fp = {});

GradientPair cost_gradient_at(const StateProbabilities& states, const GradientWorkspace& ws,
                              const Vector& compromised_ratio);

/// W+ <- clamp(W+ - eta dE/dW+, 0, W), likewise w+.
ArnnModel sgd_step(const ArnnModel& model, const TrainingSample& sample, double eta,
                   const FixedPointOptions& fp = {});

struct TrainConfig {
  double eta = 0.1;
  int epochs = 20;
  double gamma = 0.98;
  FixedPointOptions fixed_point{};
};

struct EpochRecord {
  int epoch = 0;
  double cost = 0.0;
  std::size_t skipped = 0;  // samples whose fixed point failed during the epoch
};

struct TrainResult {
  ArnnModel model;
  std::vector<EpochRecord> trace;
};

/// Per-sample gradient steps in the given order for cfg.epochs epochs; the
/// cost over the whole set is recorded after each epoch.
TrainResult train_offline(const ArnnModel& model, const std::vector<TrainingSample>& train,
                          const TrainConfig& cfg);

struct OnlineConfig {
  std::size_t window = 6;
  int epochs = 3;  // 0 means inference only
  double eta = 0.1;
  double gamma = 0.98;
  FixedPointOptions fixed_point{};
};

struct SlotDecision {
  long slot = 0;
  DecisionVector decision;
};

struct OnlineResult {
  std::vector<SlotDecision> decisions;
  std::vector<long> training_slots;
  std::size_t skipped = 0;
  ArnnModel model;
};

/// Observer invoked after the prediction for a slot and, when the slot
/// triggers training, again after the update (trained == true).
using OnlineObserver = std::function<void(long slot, bool trained, const ArnnModel&)>;

/// Prequential loop: slot l is classified with the current weights first;
/// then, if l mod window == 0, the last `window` samples train the model for
/// `epochs` epochs without reinitialising it.
OnlineResult train_online(const ArnnModel& model, const std::vector<TrainingSample>& stream,
                          const OnlineConfig& cfg, const OnlineObserver& observer = {});

}  // namespace arnn
