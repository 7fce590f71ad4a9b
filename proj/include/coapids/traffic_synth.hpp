#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace coapids::synth {

enum class Label : std::uint8_t { normal = 0, dos = 1, mitm = 2, crossproto = 3 };

std::string_view label_name(Label label) noexcept;
std::optional<Label> parse_label(std::string_view name) noexcept;

using MacAddress = std::array<std::uint8_t, 6>;

/// Lower-case colon-separated form, e.g. "08:00:27:12:34:56".
std::string format_mac(const MacAddress& mac);
std::optional<MacAddress> parse_mac_address(std::string_view text) noexcept;

struct Endpoint {
  MacAddress mac{};
  std::string ip;
  std::uint16_t port = 0;
};

/// The four hosts of the simulated home network.
struct Topology {
  Endpoint server;    // CoAP server storing readings and serving Observe
  Endpoint sensor;    // posts /temp and /humidity
  Endpoint observer;  // subscribed client, victim of DoS and cross-protocol
  Endpoint attacker;

  static Topology standard();
};

struct AttackWindow {
  Label kind = Label::dos;
  double start_s = 0.0;
  double end_s = 0.0;
  double rate_hz = 0.0;  // attack exchanges per second inside the window
};

struct ScenarioConfig {
  std::uint64_t seed = 0;
  double duration_s = 0.0;
  double normal_rate_hz = 0.0;  // normal exchanges per second (request plus reply)
  std::vector<AttackWindow> attack_windows;
  Topology topology = Topology::standard();

  /// Throws Error(invalid_config) on a malformed scenario.
  void validate() const;
};

struct LabeledFrame {
  double timestamp_s = 0.0;  // seconds since scenario start, microsecond resolution
  MacAddress src_mac{};
  MacAddress dst_mac{};
  std::string src_ip;
  std::string dst_ip;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::vector<std::uint8_t> udp_payload;
  Label label = Label::normal;

  bool operator==(const LabeledFrame&) const = default;
};

/// Generates the frames of one scenario, sorted by timestamp.
///
/// Exchanges arrive as Poisson processes. Normal traffic is sensor POSTs to
/// /temp and /humidity answered by 2.04, and CON Observe notifications
/// answered by empty ACKs. Attack frames are emitted only inside their
/// windows and are labeled with the window kind:
///   dos        spoofed GETs with a small Block2 size, plus the server's
///              block responses sent to the victim
///   mitm       the sensor's POST re-sent by the attacker with Uri-Path
///              rewritten to "mitm", plus the server's 4.04
///   crossproto DNS responses from the server's address and CoAP port to
///              the observer's port
/// The result depends only on the config (including its seed).
std::vector<LabeledFrame> synthesize(const ScenarioConfig& config);

/// A named scenario made of consecutive segments.
struct Preset {
  std::string name;
  std::vector<ScenarioConfig> segments;

  double duration_s() const;
  /// Attack windows of all segments on the concatenated time axis.
  std::vector<AttackWindow> windows() const;
};

/// "dos-scenario", "mitm-scenario", "crossproto-scenario" or "merged".
/// Throws Error(invalid_config) for an unknown name.
Preset make_preset(std::string_view name, std::uint64_t seed);
const std::vector<std::string>& preset_names();

/// Segments back to back, each shifted by the durations before it.
std::vector<LabeledFrame> synthesize(const Preset& preset);

/// Minimal DNS A-record response used as the cross-protocol payload.
/// The transaction id always has its top two bits set, so the first byte
/// never carries CoAP version 1.
std::vector<std::uint8_t> make_dns_response(std::uint16_t transaction_id, std::string_view qname,
                                            const std::array<std::uint8_t, 4>& address, std::uint32_t ttl);

}  // namespace coapids::synth
