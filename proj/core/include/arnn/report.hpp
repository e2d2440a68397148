#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "arnn/learning.hpp"
#include "arnn/metrics.hpp"
#include "arnn/traffic.hpp"

namespace arnn {

/// Per-slot decisions of one model on the evaluated slots. `score` is the
/// decision ratio L for the ARNN and the predicted compromised ratio for the
/// MLP.
struct DecisionTable {
  std::string score_name = "L";
  std::vector<long> slots;
  NodeRegistry registry;
  Matrix score;
  BinaryMatrix decision;
  BinaryMatrix truth;
};

/// CSV `slot,node,<score_name>,Z,G`.
void write_decisions(const std::filesystem::path& path, const DecisionTable& table);
DecisionTable read_decisions(const std::filesystem::path& path);

struct EvaluationSet {
  std::string model;
  std::vector<NodeMetrics> nodes;
  AggregateMetrics aggregate;
};

EvaluationSet evaluate(const std::string& model, const DecisionTable& table);

/// Writes per_node.csv, aggregate.csv, boxplot.svg and accuracy/tnr/tpr bar
/// charts into `dir`. Output is a pure function of the inputs.
std::vector<std::filesystem::path> emit_report(const std::filesystem::path& dir, const NodeRegistry& registry,
                                               const std::vector<EvaluationSet>& sets);

void write_gamma_sweep(const std::filesystem::path& path, const std::vector<GammaSweepRow>& rows);

/// CSV `epoch,cost,skipped`.
void write_cost_trace(const std::filesystem::path& path, const std::vector<EpochRecord>& trace);

enum class NodeMetric { Accuracy, Tnr, Tpr };

std::string render_box_svg(const std::vector<EvaluationSet>& sets);
std::string render_bar_svg(const NodeRegistry& registry, const std::vector<EvaluationSet>& sets,
                           NodeMetric metric);

}  // namespace arnn
