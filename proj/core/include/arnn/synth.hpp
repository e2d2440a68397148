#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "arnn/traffic.hpp"

namespace arnn {

/// Desk-scale botnet propagation model.
///
/// Every node sends Poisson(packets_per_slot) packets per slot (compromised
/// nodes send bot_rate_multiplier times as many) at uniform times inside the
/// slot to uniformly chosen other nodes. A compromised sender labels each
/// packet as attack with probability attack_fraction. At the end of each slot
/// a healthy node whose cumulative received attack ratio exceeds
/// infection_threshold becomes compromised.
struct SynthConfig {
  std::size_t nodes = 20;
  double slot_seconds = 10.0;
  std::size_t slots = 200;
  std::uint64_t seed = 1;
  std::vector<std::size_t> initially_compromised{0};
  /// Seeds become compromised at the end of this slot; 0 means from the start.
  long attack_start_slot = 40;
  double packets_per_slot = 10.0;
  double bot_rate_multiplier = 30.0;
  double infection_threshold = 0.3;
  double attack_fraction = 1.0;

  void validate() const;
};

struct SynthTrace {
  PacketTrace trace;
  /// Slot at whose end each node became compromised; -1 means never and 0
  /// means compromised before the first slot.
  std::vector<long> compromised_at;
};

SynthTrace synthesize_botnet_trace(const SynthConfig& cfg);

/// `node,compromised_at_slot`, -1 for never.
void write_schedule(const std::filesystem::path& path, const SynthTrace& trace);

}  // namespace arnn
