#include "arnn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <string>

#include "arnn/errors.hpp"

namespace arnn {

namespace {

std::vector<std::string> node_ids(std::size_t n) {
  const auto width = std::to_string(n > 0 ? n - 1 : 0).size();
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto digits = std::to_string(i);
    ids.push_back("n" + std::string(width - digits.size(), '0') + digits);
  }
  return ids;
}

}  // namespace

void SynthConfig::validate() const {
  if (nodes < 2) {
    throw ConfigError("synthetic trace needs at least two nodes");
  }
  if (!(slot_seconds > 0.0) || !(packets_per_slot > 0.0) || !(bot_rate_multiplier > 0.0)) {
    throw ConfigError("slot length and packet rates must be positive");
  }
  if (slots == 0) {
    throw ConfigError("synthetic trace needs at least one slot");
  }
  if (!(infection_threshold >= 0.0 && infection_threshold <= 1.0) ||
      !(attack_fraction >= 0.0 && attack_fraction <= 1.0)) {
    throw ConfigError("infection threshold and attack fraction must lie in [0, 1]");
  }
  if (attack_start_slot < 0) {
    throw ConfigError("attack start slot must be non-negative");
  }
  for (auto i : initially_compromised) {
    if (i >= nodes) {
      throw ConfigError("initially compromised node " + std::to_string(i) + " out of range");
    }
  }
}

SynthTrace synthesize_botnet_trace(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.nodes;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> other(0, n - 2);
  std::poisson_distribution<int> benign_count(cfg.packets_per_slot);
  std::poisson_distribution<int> bot_count(cfg.packets_per_slot * cfg.bot_rate_multiplier);

  SynthTrace out;
  out.trace.registry = NodeRegistry(node_ids(n));
  out.compromised_at.assign(n, -1);
  for (auto i : cfg.initially_compromised) {
    out.compromised_at[i] = cfg.attack_start_slot;
  }
  std::vector<std::uint64_t> received(n, 0), received_attack(n, 0);
  std::vector<PacketRecord> slot_packets;

  for (std::size_t l = 1; l <= cfg.slots; ++l) {
    const auto slot = static_cast<long>(l);
    const double start = static_cast<double>(l - 1) * cfg.slot_seconds;
    const double end = static_cast<double>(l) * cfg.slot_seconds;
    slot_packets.clear();
    for (std::size_t s = 0; s < n; ++s) {
      const bool bot = out.compromised_at[s] >= 0 && out.compromised_at[s] < slot;
      const int count = bot ? bot_count(rng) : benign_count(rng);
      for (int k = 0; k < count; ++k) {
        double t = start + unit(rng) * cfg.slot_seconds;
        if (t >= end) {
          t = std::nextafter(end, start);
        }
        auto d = other(rng);
        if (d >= s) {
          ++d;
        }
        const bool attack = bot && unit(rng) < cfg.attack_fraction;
        slot_packets.push_back({t, static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(d), attack});
      }
    }
    std::stable_sort(slot_packets.begin(), slot_packets.end(),
                     [](const PacketRecord& a, const PacketRecord& b) { return a.time < b.time; });
    for (const auto& p : slot_packets) {
      ++received[p.dst];
      if (p.attack) {
        ++received_attack[p.dst];
      }
    }
    out.trace.records.insert(out.trace.records.end(), slot_packets.begin(), slot_packets.end());

    for (std::size_t i = 0; i < n; ++i) {
      if (out.compromised_at[i] >= 0 || received[i] == 0) {
        continue;
      }
      const double ratio = static_cast<double>(received_attack[i]) / static_cast<double>(received[i]);
      if (ratio > cfg.infection_threshold) {
        out.compromised_at[i] = slot;
      }
    }
  }
  return out;
}

void write_schedule(const std::filesystem::path& path, const SynthTrace& trace) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << "node,compromised_at_slot\n";
  for (std::size_t i = 0; i < trace.compromised_at.size(); ++i) {
    out << trace.trace.registry.id_of(i) << ',' << trace.compromised_at[i] << '\n';
  }
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

}  // namespace arnn
