#include "arnn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "arnn/errors.hpp"

namespace arnn {

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) {
    return std::nullopt;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) {
    return std::nullopt;
  }
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::vector<NodeMetrics> per_node_metrics(const BinaryMatrix& truth, const BinaryMatrix& decisions) {
  if (truth.rows() != decisions.rows() || truth.cols() != decisions.cols()) {
    throw ShapeError("ground truth is " + std::to_string(truth.rows()) + "x" + std::to_string(truth.cols()) +
                     " but decisions are " + std::to_string(decisions.rows()) + "x" +
                     std::to_string(decisions.cols()));
  }
  std::vector<NodeMetrics> out(static_cast<std::size_t>(truth.cols()));
  for (Eigen::Index i = 0; i < truth.cols(); ++i) {
    auto& m = out[static_cast<std::size_t>(i)];
    m.node = static_cast<std::size_t>(i);
    for (Eigen::Index l = 0; l < truth.rows(); ++l) {
      const int g = truth(l, i);
      const int z = decisions(l, i);
      if ((g != 0 && g != 1) || (z != 0 && z != 1)) {
        throw ShapeError("metric inputs must be binary");
      }
      if (g == 1) {
        (z == 1 ? m.tp : m.fn)++;
      } else {
        (z == 1 ? m.fp : m.tn)++;
      }
    }
    m.accuracy = m.total() == 0 ? 0.0 : static_cast<double>(m.tp + m.tn) / static_cast<double>(m.total());
    m.tnr = ratio(m.tn, m.tn + m.fp);
    m.tpr = ratio(m.tp, m.tp + m.fn);
  }
  return out;
}

std::optional<double> f1_score(std::size_t tp, std::size_t fp, std::size_t fn) {
  if (tp == 0 && fp == 0 && fn == 0) {
    return std::nullopt;
  }
  return static_cast<double>(tp) / (static_cast<double>(tp) + 0.5 * static_cast<double>(fp + fn));
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BoxStats box_stats(std::vector<double> values) {
  if (values.empty()) {
    throw ShapeError("box statistics need at least one defined value");
  }
  std::sort(values.begin(), values.end());
  return {values.front(), quantile_sorted(values, 0.25), quantile_sorted(values, 0.5),
          quantile_sorted(values, 0.75), values.back()};
}

AggregateMetrics aggregate(const std::vector<NodeMetrics>& nodes) {
  if (nodes.empty()) {
    throw ShapeError("no nodes to aggregate");
  }
  AggregateMetrics a;
  a.nodes = nodes.size();
  std::vector<double> acc, tnr, tpr, f1;
  for (const auto& m : nodes) {
    a.tp += m.tp;
    a.tn += m.tn;
    a.fp += m.fp;
    a.fn += m.fn;
    acc.push_back(m.accuracy);
    if (m.tnr) {
      tnr.push_back(*m.tnr);
    }
    if (m.tpr) {
      tpr.push_back(*m.tpr);
    }
    if (const auto f = f1_score(m.tp, m.fp, m.fn)) {
      f1.push_back(*f);
    }
  }
  a.nodes_with_tnr = tnr.size();
  a.nodes_with_tpr = tpr.size();
  a.macro_accuracy = *mean_of(acc);
  a.macro_tnr = mean_of(tnr);
  a.macro_tpr = mean_of(tpr);
  a.macro_f1 = mean_of(f1);
  const std::size_t total = a.tp + a.tn + a.fp + a.fn;
  a.pooled_accuracy = total == 0 ? 0.0 : static_cast<double>(a.tp + a.tn) / static_cast<double>(total);
  a.pooled_tnr = ratio(a.tn, a.tn + a.fp);
  a.pooled_tpr = ratio(a.tp, a.tp + a.fn);
  a.pooled_f1 = f1_score(a.tp, a.fp, a.fn);
  a.accuracy_box = box_stats(acc);
  if (!tnr.empty()) {
    a.tnr_box = box_stats(tnr);
  }
  if (!tpr.empty()) {
    a.tpr_box = box_stats(tpr);
  }
  return a;
}

BinaryMatrix threshold_ratios(const Matrix& ratios, double gamma) {
  return (ratios.array() > gamma).cast<int>().matrix();
}

std::vector<GammaSweepRow> gamma_sweep(const Matrix& ratios, const BinaryMatrix& truth,
                                       const std::vector<double>& gammas) {
  if (gammas.empty()) {
    throw InvalidParameterError("gamma sweep needs at least one threshold");
  }
  std::vector<GammaSweepRow> rows;
  rows.reserve(gammas.size());
  for (double gamma : gammas) {
    auto nodes = per_node_metrics(truth, threshold_ratios(ratios, gamma));
    auto agg = aggregate(nodes);
    rows.push_back({gamma, std::move(nodes), std::move(agg)});
  }
  return rows;
}

}  // namespace arnn
