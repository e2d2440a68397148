#include <doctest.h>

#include <sstream>

#include "arnn/errors.hpp"
#include "arnn/synth.hpp"
#include "arnn/traffic.hpp"

using namespace arnn;

namespace {

SynthConfig small(std::uint64_t seed = 1) {
  SynthConfig c;
  c.nodes = 8;
  c.slots = 30;
  c.seed = seed;
  c.attack_start_slot = 5;
  c.bot_rate_multiplier = 5.0;
  return c;
}

std::string packets_text(const SynthTrace& t) {
  std::ostringstream out;
  write_packets(out, t.trace);
  return out.str();
}

std::vector<SlotFeatures> features_of(const SynthTrace& t, const SynthConfig& c, double theta = 0.3) {
  return ground_truth(compute_ratios(bucketize(t.trace.records, c.slot_seconds), c.nodes), theta);
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("no initial infections means no attack traffic") {
    auto c = small();
    c.initially_compromised.clear();
    const auto t = synthesize_botnet_trace(c);
    CHECK_FALSE(t.trace.records.empty());
    for (const auto& r : t.trace.records) CHECK_FALSE(r.attack);
    for (long at : t.compromised_at) CHECK(at == -1);
  }

  TEST_CASE("everyone compromised from the start sends only attacks") {
    auto c = small();
    c.attack_start_slot = 0;
    c.attack_fraction = 1.0;
    c.initially_compromised.clear();
    for (std::size_t i = 0; i < c.nodes; ++i) c.initially_compromised.push_back(i);
    const auto t = synthesize_botnet_trace(c);
    for (const auto& r : t.trace.records) CHECK(r.attack);
    for (long at : t.compromised_at) CHECK(at == 0);
    const auto f = features_of(t, c);
    for (const auto& s : f) {
      for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(c.nodes); ++i) {
        CHECK(s.compromised_ratio(i) == 1.0);
        CHECK(s.ground_truth[static_cast<std::size_t>(i)] == 1);
      }
    }
  }

  TEST_CASE("same seed gives byte-identical traces") {
    const auto a = synthesize_botnet_trace(small(7));
    const auto b = synthesize_botnet_trace(small(7));
    CHECK(packets_text(a) == packets_text(b));
    CHECK(a.compromised_at == b.compromised_at);
    CHECK(packets_text(a) != packets_text(synthesize_botnet_trace(small(8))));
  }

  TEST_CASE("records are time ordered inside the configured horizon") {
    const auto c = small(3);
    const auto t = synthesize_botnet_trace(c);
    for (std::size_t i = 1; i < t.trace.records.size(); ++i)
      CHECK(t.trace.records[i - 1].time <= t.trace.records[i].time);
    CHECK(t.trace.records.back().time < static_cast<double>(c.slots) * c.slot_seconds);
    CHECK(t.trace.registry.size() == c.nodes);
    for (const auto& r : t.trace.records) CHECK(r.src != r.dst);
  }

  TEST_CASE("write then parse reproduces the records") {
    const auto t = synthesize_botnet_trace(small(11));
    std::stringstream ss;
    write_packets(ss, t.trace);
    const auto back = parse_packets(ss);
    CHECK(back.records == t.trace.records);
    CHECK(back.registry == t.trace.registry);
  }

  TEST_CASE("attack labels follow the sender's status at send time") {
    const auto c = small(5);
    const auto t = synthesize_botnet_trace(c);
    bool saw_attack = false;
    for (const auto& r : t.trace.records) {
      if (!r.attack) continue;
      saw_attack = true;
      const long slot = static_cast<long>(r.time / c.slot_seconds) + 1;
      const long at = t.compromised_at[r.src];
      CHECK(at >= 0);
      CHECK(at < slot);
    }
    CHECK(saw_attack);
  }

  TEST_CASE("infection spreads past the seeds under the default rates") {
    SynthConfig c;
    c.slots = 120;
    const auto t = synthesize_botnet_trace(c);
    std::size_t infected = 0;
    for (long at : t.compromised_at) infected += at >= 0 ? 1 : 0;
    CHECK(infected > 1);
    CHECK(t.compromised_at[0] == c.attack_start_slot);
  }

  TEST_CASE("ground truth agrees with the infection schedule") {
    auto c = small(2);
    c.attack_fraction = 1.0;
    c.slots = 60;
    const auto t = synthesize_botnet_trace(c);
    const auto f = features_of(t, c);
    for (std::size_t i = 0; i < c.nodes; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      bool was_set = false;
      for (const auto& s : f) {
        const bool g = s.ground_truth[i] == 1;
        if (g) {
          CHECK(t.compromised_at[i] >= 0);
          CHECK(t.compromised_at[i] < s.slot);
        }
        if (was_set) CHECK(g);
        was_set = was_set || g;
        CHECK(s.compromised_ratio(ii) <= 1.0);
      }
    }
  }

  TEST_CASE("ground truth matches the schedule exactly without benign history") {
    auto c = small(4);
    c.attack_start_slot = 0;
    c.attack_fraction = 1.0;
    c.initially_compromised = {0, 3, 6};
    c.slots = 40;
    const auto t = synthesize_botnet_trace(c);
    const auto b = bucketize(t.trace.records, c.slot_seconds);
    const auto f = features_of(t, c);
    for (std::size_t i : c.initially_compromised) {
      std::size_t sent = 0;
      for (std::size_t l = 0; l < f.size(); ++l) {
        for (const auto& r : b[l]) sent += r.src == i ? 1 : 0;
        CHECK((f[l].ground_truth[i] == 1) == (sent > 0));
      }
    }
  }

  TEST_CASE("invalid configurations are rejected") {
    auto c = small();
    c.nodes = 1;
    CHECK_THROWS_AS(synthesize_botnet_trace(c), ConfigError);
    c = small();
    c.slot_seconds = 0.0;
    CHECK_THROWS_AS(synthesize_botnet_trace(c), ConfigError);
    c = small();
    c.slots = 0;
    CHECK_THROWS_AS(synthesize_botnet_trace(c), ConfigError);
    c = small();
    c.attack_fraction = 1.5;
    CHECK_THROWS_AS(synthesize_botnet_trace(c), ConfigError);
    c = small();
    c.initially_compromised = {99};
    CHECK_THROWS_AS(synthesize_botnet_trace(c), ConfigError);
    c = small();
    c.attack_start_slot = -1;
    CHECK_THROWS_AS(synthesize_botnet_trace(c), ConfigError);
  }
}
