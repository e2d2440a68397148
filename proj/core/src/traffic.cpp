#include "arnn/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "arnn/csv.hpp"
#include "arnn/errors.hpp"

namespace arnn {

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  return out;
}

bool is_header(const std::vector<std::string_view>& fields, std::initializer_list<std::string_view> names) {
  if (fields.size() != names.size()) {
    return false;
  }
  return std::equal(fields.begin(), fields.end(), names.begin());
}

// Slot index k (0-based) with k tau <= t < (k+1) tau evaluated in floating
// point exactly as the interval definition reads.
long slot_of(double t, double tau) {
  auto k = static_cast<long>(std::floor(t / tau));
  while (k > 0 && static_cast<double>(k) * tau > t) {
    --k;
  }
  while (static_cast<double>(k + 1) * tau <= t) {
    ++k;
  }
  return k;
}

}  // namespace

NodeRegistry::NodeRegistry(std::vector<std::string> ids) : ids_(std::move(ids)) {
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], static_cast<std::uint32_t>(i)).second) {
      throw ConfigError("duplicate node id '" + ids_[i] + "'");
    }
  }
}

NodeRegistry NodeRegistry::sorted(std::vector<std::string> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return NodeRegistry(std::move(ids));
}

std::uint32_t NodeRegistry::index_of(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) {
    throw ConfigError("unknown node id '" + id + "'");
  }
  return it->second;
}

PacketTrace parse_packets(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_packets(in);
}

PacketTrace parse_packets(std::istream& in) {
  struct Row {
    double t;
    std::string src, dst;
    bool attack;
  };
  std::vector<Row> rows;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = csv::trim(line);
    if (trimmed.empty()) {
      continue;
    }
    const auto f = csv::split(trimmed);
    if (line_no == 1 && is_header(f, {"t", "src", "dst", "label"})) {
      continue;
    }
    if (f.size() != 4) {
      throw ParseError("expected 4 fields t,src,dst,label, got " + std::to_string(f.size()), line_no);
    }
    const auto t = csv::to_double(f[0]);
    if (!t || *t < 0.0) {
      throw ParseError("timestamp must be a non-negative number", line_no);
    }
    if (f[1].empty() || f[2].empty()) {
      throw ParseError("empty node id", line_no);
    }
    if (f[3] != "0" && f[3] != "1") {
      throw ParseError("label must be 0 or 1, got '" + std::string(f[3]) + "'", line_no);
    }
    rows.push_back({*t, std::string(f[1]), std::string(f[2]), f[3] == "1"});
    ids.emplace(f[1]);
    ids.emplace(f[2]);
  }

  PacketTrace trace;
  trace.registry = NodeRegistry(std::vector<std::string>(ids.begin(), ids.end()));
  trace.records.reserve(rows.size());
  for (const auto& r : rows) {
    trace.records.push_back({r.t, trace.registry.index_of(r.src), trace.registry.index_of(r.dst), r.attack});
  }
  std::stable_sort(trace.records.begin(), trace.records.end(),
                   [](const PacketRecord& a, const PacketRecord& b) { return a.time < b.time; });
  return trace;
}

void write_packets(const std::filesystem::path& path, const PacketTrace& trace) {
  auto out = open_out(path);
  write_packets(out, trace);
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

void write_packets(std::ostream& out, const PacketTrace& trace) {
  out << "t,src,dst,label\n";
  for (const auto& r : trace.records) {
    out << csv::format(r.time) << ',' << trace.registry.id_of(r.src) << ',' << trace.registry.id_of(r.dst)
        << ',' << (r.attack ? '1' : '0') << '\n';
  }
}

std::vector<Bucket> bucketize(const std::vector<PacketRecord>& records, double tau) {
  if (!(tau > 0.0)) {
    throw InvalidParameterError("slot length tau must be positive");
  }
  std::vector<Bucket> buckets;
  for (const auto& r : records) {
    const auto k = static_cast<std::size_t>(slot_of(r.time, tau));
    if (k >= buckets.size()) {
      buckets.resize(k + 1);
    }
    buckets[k].push_back(r);
  }
  return buckets;
}

std::vector<SlotFeatures> compute_ratios(const std::vector<Bucket>& buckets, std::size_t n) {
  std::vector<std::uint64_t> sent(n, 0), sent_attack(n, 0), received(n, 0), received_attack(n, 0);
  std::vector<SlotFeatures> out;
  out.reserve(buckets.size());
  const auto sn = static_cast<Eigen::Index>(n);
  for (std::size_t l = 0; l < buckets.size(); ++l) {
    for (const auto& r : buckets[l]) {
      if (r.src >= n || r.dst >= n) {
        throw InvalidSizeError("packet refers to a node outside the registry");
      }
      ++sent[r.src];
      ++received[r.dst];
      if (r.attack) {
        ++sent_attack[r.src];
        ++received_attack[r.dst];
      }
    }
    SlotFeatures f;
    f.slot = static_cast<long>(l + 1);
    f.attack_ratio = Vector::Zero(sn);
    f.compromised_ratio = Vector::Zero(sn);
    for (std::size_t i = 0; i < n; ++i) {
      const auto si = static_cast<Eigen::Index>(i);
      if (received[i] > 0) {
        f.attack_ratio(si) = static_cast<double>(received_attack[i]) / static_cast<double>(received[i]);
      }
      if (sent[i] > 0) {
        f.compromised_ratio(si) = static_cast<double>(sent_attack[i]) / static_cast<double>(sent[i]);
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<SlotFeatures> ground_truth(std::vector<SlotFeatures> features, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw InvalidParameterError("theta must lie in [0, 1]");
  }
  for (auto& f : features) {
    f.ground_truth.assign(f.size(), 0);
    for (std::size_t i = 0; i < f.size(); ++i) {
      f.ground_truth[i] = f.compromised_ratio(static_cast<Eigen::Index>(i)) > theta ? 1 : 0;
    }
  }
  return features;
}

void write_features(const std::filesystem::path& path, const FeatureTable& table) {
  auto out = open_out(path);
  write_features(out, table);
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

void write_features(std::ostream& out, const FeatureTable& table) {
  out << "slot,node,A,K,G\n";
  for (const auto& f : table.slots) {
    if (f.size() != table.registry.size() || f.ground_truth.size() != f.size()) {
      throw ShapeError("slot " + std::to_string(f.slot) + " does not match the registry");
    }
    for (std::size_t i = 0; i < f.size(); ++i) {
      const auto si = static_cast<Eigen::Index>(i);
      out << f.slot << ',' << table.registry.id_of(i) << ',' << csv::format(f.attack_ratio(si)) << ','
          << csv::format(f.compromised_ratio(si)) << ',' << int{f.ground_truth[i]} << '\n';
    }
  }
}

FeatureTable read_features(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_features(in);
}

FeatureTable read_features(std::istream& in) {
  struct Row {
    long slot;
    std::uint32_t node;
    double a, k;
    std::uint8_t g;
  };
  std::vector<Row> rows;
  std::vector<std::string> ids;
  std::map<std::string, std::uint32_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = csv::trim(line);
    if (trimmed.empty()) {
      continue;
    }
    const auto f = csv::split(trimmed);
    if (line_no == 1 && is_header(f, {"slot", "node", "A", "K", "G"})) {
      continue;
    }
    if (f.size() != 5) {
      throw ParseError("expected 5 fields slot,node,A,K,G", line_no);
    }
    const auto slot = csv::to_long(f[0]);
    const auto a = csv::to_double(f[2]);
    const auto k = csv::to_double(f[3]);
    if (!slot || *slot < 1) {
      throw ParseError("slot must be a positive integer", line_no);
    }
    if (!a || *a < 0.0 || *a > 1.0 || !k || *k < 0.0 || *k > 1.0) {
      throw ParseError("A and K must be numbers in [0, 1]", line_no);
    }
    if (f[4] != "0" && f[4] != "1") {
      throw ParseError("G must be 0 or 1", line_no);
    }
    std::string id(f[1]);
    auto [it, inserted] = seen.emplace(id, static_cast<std::uint32_t>(ids.size()));
    if (inserted) {
      ids.push_back(id);
    }
    rows.push_back({*slot, it->second, *a, *k, static_cast<std::uint8_t>(f[4] == "1")});
  }

  FeatureTable table;
  table.registry = NodeRegistry(ids);
  const std::size_t n = ids.size();
  std::map<long, SlotFeatures> by_slot;
  std::map<long, std::vector<bool>> filled;
  for (const auto& r : rows) {
    auto& f = by_slot[r.slot];
    auto& mask = filled[r.slot];
    if (f.attack_ratio.size() == 0) {
      f.slot = r.slot;
      f.attack_ratio = Vector::Zero(static_cast<Eigen::Index>(n));
      f.compromised_ratio = Vector::Zero(static_cast<Eigen::Index>(n));
      f.ground_truth.assign(n, 0);
      mask.assign(n, false);
    }
    if (mask[r.node]) {
      throw ShapeError("duplicate row for slot " + std::to_string(r.slot) + " node " + ids[r.node]);
    }
    mask[r.node] = true;
    f.attack_ratio(r.node) = r.a;
    f.compromised_ratio(r.node) = r.k;
    f.ground_truth[r.node] = r.g;
  }
  for (auto& [slot, f] : by_slot) {
    const auto& mask = filled[slot];
    if (std::find(mask.begin(), mask.end(), false) != mask.end()) {
      throw ShapeError("slot " + std::to_string(slot) + " is missing rows for some nodes");
    }
    table.slots.push_back(std::move(f));
  }
  return table;
}

void write_registry(const std::filesystem::path& path, const NodeRegistry& registry) {
  auto out = open_out(path);
  out << "index,node\n";
  for (std::size_t i = 0; i < registry.size(); ++i) {
    out << i << ',' << registry.id_of(i) << '\n';
  }
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

TrainWindow select_train_window(const std::vector<SlotFeatures>& features, int half_width) {
  if (half_width < 0) {
    throw InvalidParameterError("half width must be non-negative");
  }
  const auto first = std::find_if(features.begin(), features.end(), [](const SlotFeatures& f) {
    return std::find(f.ground_truth.begin(), f.ground_truth.end(), 1) != f.ground_truth.end();
  });
  if (first == features.end()) {
    throw WindowError("no slot contains a compromised node; cannot build a training window");
  }
  TrainWindow w;
  w.first_compromised_slot = first->slot;
  const long lo = first->slot - half_width;
  const long hi = first->slot + half_width;
  for (const auto& f : features) {
    (f.slot >= lo && f.slot <= hi ? w.train : w.test).push_back(f);
  }
  return w;
}

std::vector<TrainingSample> to_training_samples(const std::vector<SlotFeatures>& features) {
  std::vector<TrainingSample> out;
  out.reserve(features.size());
  for (const auto& f : features) {
    out.push_back({f.attack_ratio, f.compromised_ratio, f.slot});
  }
  return out;
}

}  // namespace arnn
