#include <doctest.h>

#include <algorithm>

#include "coapids/coap_wire.hpp"
#include "coapids/error.hpp"
#include "coapids/traffic_synth.hpp"

using namespace coapids;
using namespace coapids::synth;

namespace {

ScenarioConfig small_scenario(std::uint64_t seed) {
  ScenarioConfig c;
  c.seed = seed;
  c.duration_s = 60.0;
  c.normal_rate_hz = 5.0;
  c.attack_windows = {{Label::dos, 10.0, 20.0, 8.0}, {Label::mitm, 25.0, 35.0, 4.0}, {Label::crossproto, 40.0, 50.0, 6.0}};
  return c;
}

bool inside(const LabeledFrame& f, const ScenarioConfig& c) {
  return std::any_of(c.attack_windows.begin(), c.attack_windows.end(), [&](const AttackWindow& w) {
    return w.kind == f.label && w.start_s <= f.timestamp_s && f.timestamp_s < w.end_s;
  });
}

}  // namespace

TEST_SUITE("traffic_synth") {
  TEST_CASE("no windows means all normal") {
    ScenarioConfig c;
    c.seed = 3;
    c.duration_s = 30.0;
    c.normal_rate_hz = 4.0;
    const auto frames = synthesize(c);
    CHECK_FALSE(frames.empty());
    for (const auto& f : frames) CHECK(f.label == Label::normal);
  }

  TEST_CASE("zero duration is empty") {
    ScenarioConfig c;
    c.normal_rate_hz = 10.0;
    CHECK(synthesize(c).empty());
  }

  TEST_CASE("determinism and seed sensitivity") {
    CHECK(synthesize(small_scenario(5)) == synthesize(small_scenario(5)));
    CHECK(synthesize(small_scenario(5)) != synthesize(small_scenario(6)));
  }

  TEST_CASE("frames are sorted, labeled by window and decode as expected") {
    const auto c = small_scenario(9);
    const auto frames = synthesize(c);
    const Topology topo = Topology::standard();
    std::array<std::size_t, 4> count{};
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const auto& f = frames[i];
      if (i > 0) REQUIRE(frames[i - 1].timestamp_s <= f.timestamp_s);
      ++count[static_cast<std::size_t>(f.label)];
      if (f.label != Label::normal) REQUIRE(inside(f, c));
      if (f.src_mac == topo.attacker.mac) REQUIRE(f.label != Label::normal);
      const bool decodes = coap::try_decode(f.udp_payload).has_value();
      REQUIRE(decodes == (f.label != Label::crossproto));
    }
    for (std::size_t n : count) CHECK(n > 0);
  }

  TEST_CASE("mitm frames target the rewritten path") {
    const auto frames = synthesize(small_scenario(2));
    bool saw_path = false, saw_not_found = false;
    for (const auto& f : frames) {
      if (f.label != Label::mitm) continue;
      const auto m = coap::decode_message(f.udp_payload);
      if (const auto* o = m.find_option(coap::options::uri_path)) {
        saw_path |= std::string(o->value.begin(), o->value.end()) == "mitm";
      }
      saw_not_found |= m.code == coap::codes::not_found;
    }
    CHECK(saw_path);
    CHECK(saw_not_found);
  }

  TEST_CASE("dns payload never looks like coap version 1") {
    for (std::uint16_t id : {0, 1, 0x3FFF, 0xFFFF}) {
      const auto b = make_dns_response(id, "coap.home", {192, 168, 1, 10}, 60);
      CHECK((b[0] >> 6) != 1);
      CHECK_FALSE(coap::try_decode(b).has_value());
    }
  }

  TEST_CASE("invalid configs are rejected") {
    auto c = small_scenario(1);
    c.attack_windows.push_back({Label::dos, 50.0, 70.0, 1.0});
    CHECK_THROWS_AS(synthesize(c), Error);
    c = small_scenario(1);
    c.attack_windows.push_back({Label::dos, 30.0, 30.0, 1.0});
    CHECK_THROWS_AS(synthesize(c), Error);
    c = small_scenario(1);
    c.attack_windows[0].rate_hz = 0.0;
    CHECK_THROWS_AS(synthesize(c), Error);
    c = small_scenario(1);
    c.duration_s = -1.0;
    CHECK_THROWS_AS(synthesize(c), Error);
    CHECK_THROWS_AS(make_preset("nope", 1), Error);
  }

  TEST_CASE("dos preset attack share is near 0.30") {
    const auto frames = synthesize(make_preset("dos-scenario", 1));
    const auto attacks = std::count_if(frames.begin(), frames.end(), [](const auto& f) { return f.label == Label::dos; });
    const double share = static_cast<double>(attacks) / static_cast<double>(frames.size());
    CHECK(share > 0.28);
    CHECK(share < 0.32);
  }

  TEST_CASE("merged preset has four classes and ~30k frames") {
    const Preset p = make_preset("merged", 1);
    const auto frames = synthesize(p);
    CHECK(frames.size() > 25000);
    CHECK(frames.size() < 35000);
    std::array<std::size_t, 4> count{};
    for (const auto& f : frames) ++count[static_cast<std::size_t>(f.label)];
    for (std::size_t n : count) CHECK(n > 0);
    for (const auto& f : frames) {
      if (f.label == Label::normal) continue;
      const auto w = p.windows();
      REQUIRE(std::any_of(w.begin(), w.end(), [&](const AttackWindow& x) {
        return x.kind == f.label && x.start_s <= f.timestamp_s && f.timestamp_s < x.end_s;
      }));
    }
  }

  TEST_CASE("mac helpers") {
    const MacAddress mac{0, 0, 0, 0, 0, 0xff};
    CHECK(format_mac(mac) == "00:00:00:00:00:ff");
    CHECK(parse_mac_address("00:00:00:00:00:FF") == mac);
    CHECK_FALSE(parse_mac_address("00:00:00:00:00").has_value());
  }
}
