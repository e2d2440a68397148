#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "arnn/model.hpp"

namespace arnn {

/// Binary slot x node matrix (rows are slots, columns nodes).
using BinaryMatrix = Eigen::MatrixXi;

struct NodeMetrics {
  std::size_t node = 0;
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  double accuracy = 0.0;
  std::optional<double> tnr;  // undefined when the node never has G = 0
  std::optional<double> tpr;  // undefined when the node never has G = 1

  std::size_t total() const noexcept { return tp + tn + fp + fn; }
};

/// Compares ground truth G with decisions Z column by column.
std::vector<NodeMetrics> per_node_metrics(const BinaryMatrix& truth, const BinaryMatrix& decisions);

/// TP / (TP + (FP + FN) / 2); undefined when all three counts are zero.
std::optional<double> f1_score(std::size_t tp, std::size_t fp, std::size_t fn);

struct BoxStats {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

/// Five-number summary; quartiles interpolate linearly between closest
/// ranks (position (N - 1) p in the sorted list). Throws on empty input.
BoxStats box_stats(std::vector<double> values);

/// Linear-interpolation quantile of an already sorted, non-empty list.
double quantile_sorted(const std::vector<double>& sorted, double p);

/// Macro averages over nodes (undefined rates skipped) and pooled rates over
/// every (slot, node) pair.
struct AggregateMetrics {
  std::size_t nodes = 0;
  std::size_t nodes_with_tnr = 0;
  std::size_t nodes_with_tpr = 0;
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;

  double macro_accuracy = 0.0;
  std::optional<double> macro_tnr;
  std::optional<double> macro_tpr;
  std::optional<double> macro_f1;  // mean of the defined per-node F1 scores

  double pooled_accuracy = 0.0;
  std::optional<double> pooled_tnr;
  std::optional<double> pooled_tpr;
  std::optional<double> pooled_f1;

  BoxStats accuracy_box;
  std::optional<BoxStats> tnr_box;
  std::optional<BoxStats> tpr_box;
};

AggregateMetrics aggregate(const std::vector<NodeMetrics>& nodes);

/// Z = 1[L > gamma] elementwise.
BinaryMatrix threshold_ratios(const Matrix& ratios, double gamma);

struct GammaSweepRow {
  double gamma = 0.0;
  std::vector<NodeMetrics> nodes;
  AggregateMetrics aggregate;
};

std::vector<GammaSweepRow> gamma_sweep(const Matrix& ratios, const BinaryMatrix& truth,
                                       const std::vector<double>& gammas);

}  // namespace arnn
