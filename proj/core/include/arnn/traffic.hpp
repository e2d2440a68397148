#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "arnn/learning.hpp"
#include "arnn/model.hpp"

namespace arnn {

/// One labelled packet pk(t, s, d, a). Self-addressed packets are allowed.
struct PacketRecord {
  double time = 0.0;  // seconds
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  bool attack = false;

  friend bool operator==(const PacketRecord&, const PacketRecord&) = default;
};

/// Bijection between external node identifiers and dense indices 0..n-1.
class NodeRegistry {
 public:
  NodeRegistry() = default;
  /// Ids in index order; duplicates are rejected.
  explicit NodeRegistry(std::vector<std::string> ids);
  /// Indices assigned in lexicographic order of the ids.
  static NodeRegistry sorted(std::vector<std::string> ids);

  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  std::uint32_t index_of(const std::string& id) const;
  bool contains(const std::string& id) const { return index_.count(id) != 0; }
  const std::string& id_of(std::size_t index) const { return ids_.at(index); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

  friend bool operator==(const NodeRegistry& a, const NodeRegistry& b) { return a.ids_ == b.ids_; }

 private:
  std::vector<std::string> ids_;
  std::map<std::string, std::uint32_t> index_;
};

struct PacketTrace {
  std::vector<PacketRecord> records;  // sorted by time (stable)
  NodeRegistry registry;
};

/// Packet CSV: header `t,src,dst,label`, t decimal seconds >= 0, src/dst
/// opaque strings, label 0 or 1. Malformed rows raise ParseError with the
/// 1-based line number.
PacketTrace parse_packets(const std::filesystem::path& path);
PacketTrace parse_packets(std::istream& in);

void write_packets(const std::filesystem::path& path, const PacketTrace& trace);
void write_packets(std::ostream& out, const PacketTrace& trace);

using Bucket = std::vector<PacketRecord>;

/// Bucket l (1-based, stored at index l-1) holds the packets with
/// (l-1) tau <= t < l tau. Empty buckets in the middle are kept; the count is
/// the slot of the latest packet.
std::vector<Bucket> bucketize(const std::vector<PacketRecord>& records, double tau);

/// Per-slot, per-node features. Ratios are cumulative from time zero.
struct SlotFeatures {
  long slot = 0;
  Vector attack_ratio;                    // A: attack share of packets received
  Vector compromised_ratio;               // K: attack share of packets sent
  std::vector<std::uint8_t> ground_truth;  // G = 1[K > theta]

  std::size_t size() const noexcept { return static_cast<std::size_t>(attack_ratio.size()); }
};

/// A and K for every bucket; a node with nothing received (sent) so far has
/// A = 0 (K = 0). Ground truth is left empty.
std::vector<SlotFeatures> compute_ratios(const std::vector<Bucket>& buckets, std::size_t n);

/// Fills G_i = 1 iff K_i > theta (strict).
std::vector<SlotFeatures> ground_truth(std::vector<SlotFeatures> features, double theta);

struct FeatureTable {
  std::vector<SlotFeatures> slots;
  NodeRegistry registry;
};

/// Features CSV, one row per (slot, node): `slot,node,A,K,G`.
void write_features(const std::filesystem::path& path, const FeatureTable& table);
void write_features(std::ostream& out, const FeatureTable& table);
FeatureTable read_features(const std::filesystem::path& path);
FeatureTable read_features(std::istream& in);

/// Registry file: `index,node`.
void write_registry(const std::filesystem::path& path, const NodeRegistry& registry);

struct TrainWindow {
  long first_compromised_slot = 0;  // l*
  std::vector<SlotFeatures> train;
  std::vector<SlotFeatures> test;
};

/// l* is the first slot where some node has G = 1. Training slots are
/// l* - half_width .. l* + half_width (cut to the slots that exist), testing
/// slots are all the others. Throws WindowError if nothing is ever compromised.
TrainWindow select_train_window(const std::vector<SlotFeatures>& features, int half_width = 12);

std::vector<TrainingSample> to_training_samples(const std::vector<SlotFeatures>& features);

}  // namespace arnn
