#include "coapids/traffic_synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "coapids/coap_wire.hpp"
#include "coapids/error.hpp"
#include "coapids/random.hpp"

namespace coapids::synth {

namespace {

using Micros = std::int64_t;

Micros to_micros(double seconds) { return std::llround(seconds * 1e6); }

[[noreturn]] void bad_config(const std::string& what) { throw Error(Errc::invalid_config, what); }

struct PendingFrame {
  Micros time;
  std::uint64_t seq;
  LabeledFrame frame;
};

// Token pools: a handful of fixed tokens per client, so the token column
// stays low-cardinality as in the captured traffic.
const std::array<std::vector<std::uint8_t>, 4> kSensorTokens{{{0xA1}, {0xA2}, {0xA3}, {0xA4}}};
const std::vector<std::uint8_t> kObservationToken{0x6F, 0x62, 0x73, 0x01};
const std::array<std::vector<std::uint8_t>, 3> kAttackerTokens{{{0xC0, 0x01}, {0xC0, 0x02}, {0xC0, 0x03}}};

std::vector<std::uint8_t> ascii(const std::string& s) { return {s.begin(), s.end()}; }

std::array<std::uint8_t, 4> ipv4_bytes(const std::string& ip) {
  std::array<std::uint8_t, 4> out{};
  unsigned a = 0, b = 0, c = 0, d = 0;
  if (std::sscanf(ip.c_str(), "%u.%u.%u.%u", &a, &b, &c, &d) == 4) {
    out = {static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b), static_cast<std::uint8_t>(c),
           static_cast<std::uint8_t>(d)};
  }
  return out;
}

class Generator {
 public:
  explicit Generator(const ScenarioConfig& cfg) : cfg_(cfg), topo_(cfg.topology), rng_(cfg.seed) {
    sensor_mid_ = static_cast<std::uint16_t>(rng_.below(65536));
    server_mid_ = static_cast<std::uint16_t>(rng_.below(65536));
    attacker_mid_ = static_cast<std::uint16_t>(rng_.below(65536));
    observe_seq_ = static_cast<std::uint32_t>(rng_.below(4096));
    temperature_ = 21.0 + rng_.uniform(0.0, 2.0);
    humidity_ = 45.0 + rng_.uniform(0.0, 10.0);
  }

  std::vector<LabeledFrame> run() {
    const Micros duration = to_micros(cfg_.duration_s);
    if (cfg_.normal_rate_hz > 0.0) {
      for (double t = rng_.exponential(cfg_.normal_rate_hz);; t += rng_.exponential(cfg_.normal_rate_hz)) {
        const Micros at = to_micros(t);
        if (at >= duration) break;
        normal_exchange(at, duration);
      }
    }
    for (const AttackWindow& w : cfg_.attack_windows) {
      const Micros end = to_micros(w.end_s);
      for (double t = w.start_s + rng_.exponential(w.rate_hz);; t += rng_.exponential(w.rate_hz)) {
        const Micros at = to_micros(t);
        if (at >= end) break;
        if (at < to_micros(w.start_s)) continue;
        attack_exchange(w.kind, at, end);
      }
    }
    std::sort(pending_.begin(), pending_.end(), [](const PendingFrame& a, const PendingFrame& b) {
      return a.time != b.time ? a.time < b.time : a.seq < b.seq;
    });
    std::vector<LabeledFrame> out;
    out.reserve(pending_.size());
    for (auto& p : pending_) out.push_back(std::move(p.frame));
    return out;
  }

 private:
  Micros reply_delay() { return 1000 + static_cast<Micros>(rng_.below(7000)); }

  void emit(Micros at, Micros limit, const Endpoint& src_host, const Endpoint& src_addr, const Endpoint& dst_host,
            const Endpoint& dst_addr, std::vector<std::uint8_t> payload, Label label) {
    if (at >= limit) return;
    LabeledFrame f;
    f.timestamp_s = static_cast<double>(at) / 1e6;
    f.src_mac = src_host.mac;
    f.dst_mac = dst_host.mac;
    f.src_ip = src_addr.ip;
    f.dst_ip = dst_addr.ip;
    f.src_port = src_addr.port;
    f.dst_port = dst_addr.port;
    f.udp_payload = std::move(payload);
    f.label = label;
    pending_.push_back({at, seq_++, std::move(f)});
  }

  std::string next_temperature() {
    temperature_ = std::clamp(temperature_ + rng_.uniform(-0.3, 0.3), 15.0, 30.0);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.1f", temperature_);
    return buf;
  }

  std::string next_humidity() {
    humidity_ = std::clamp(humidity_ + rng_.uniform(-1.0, 1.0), 20.0, 80.0);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.0f", humidity_);
    return buf;
  }

  coap::Message sensor_post(const std::string& path, const std::string& value) {
    coap::Message req;
    req.type = coap::MessageType::con;
    req.code = coap::codes::post;
    req.message_id = sensor_mid_++;
    req.token = kSensorTokens[rng_.below(kSensorTokens.size())];
    req.options.push_back(coap::make_string_option(coap::options::uri_path, path));
    req.options.push_back(coap::make_uint_option(coap::options::content_format, 0));
    req.payload = ascii(value);
    return req;
  }

  static coap::Message ack_for(const coap::Message& req, coap::Code code) {
    coap::Message ack;
    ack.type = coap::MessageType::ack;
    ack.code = code;
    ack.message_id = req.message_id;
    ack.token = req.token;
    return ack;
  }

  void normal_exchange(Micros at, Micros limit) {
    const std::uint64_t kind = rng_.below(100);
    if (kind < 65) {
      const bool temp = kind < 35;
      const std::string value = temp ? next_temperature() : next_humidity();
      const coap::Message req = sensor_post(temp ? "temp" : "humidity", value);
      emit(at, limit, topo_.sensor, topo_.sensor, topo_.server, topo_.server, coap::encode_message(req),
           Label::normal);
      emit(at + reply_delay(), limit, topo_.server, topo_.server, topo_.sensor, topo_.sensor,
           coap::encode_message(ack_for(req, coap::codes::changed)), Label::normal);
      return;
    }
    coap::Message note;
    note.type = coap::MessageType::con;
    note.code = coap::codes::content;
    note.message_id = server_mid_++;
    note.token = kObservationToken;
    observe_seq_ = (observe_seq_ + 1) & 0xFFFFFF;
    note.options.push_back(coap::make_uint_option(coap::options::observe, observe_seq_));
    note.options.push_back(coap::make_uint_option(coap::options::content_format, 0));
    note.payload = ascii(next_temperature());
    emit(at, limit, topo_.server, topo_.server, topo_.observer, topo_.observer, coap::encode_message(note),
         Label::normal);
    coap::Message ack;
    ack.type = coap::MessageType::ack;
    ack.code = coap::codes::empty;
    ack.message_id = note.message_id;
    emit(at + reply_delay(), limit, topo_.observer, topo_.observer, topo_.server, topo_.server,
         coap::encode_message(ack), Label::normal);
  }

  void attack_exchange(Label kind, Micros at, Micros window_end) {
    switch (kind) {
      case Label::dos: return dos_exchange(at, window_end);
      case Label::mitm: return mitm_exchange(at, window_end);
      case Label::crossproto: return crossproto_frame(at, window_end);
      case Label::normal: break;
    }
  }

  // Amplification: the attacker spoofs the observer's address, the server
  // answers the victim with a block of the requested (small) size.
  void dos_exchange(Micros at, Micros window_end) {
    coap::Message req;
    req.type = coap::MessageType::con;
    req.code = coap::codes::get;
    req.message_id = attacker_mid_++;
    req.token = kAttackerTokens[rng_.below(kAttackerTokens.size())];
    req.options.push_back(coap::make_string_option(coap::options::uri_path, rng_.below(2) ? "temp" : "humidity"));
    const coap::BlockValue block{0, false, static_cast<std::uint8_t>(rng_.below(2))};
    req.options.push_back(coap::make_uint_option(coap::options::block2, block.encoded()));
    emit(at, window_end, topo_.attacker, topo_.observer, topo_.server, topo_.server, coap::encode_message(req),
         Label::dos);

    coap::Message resp = ack_for(req, coap::codes::content);
    resp.options.push_back(coap::make_uint_option(coap::options::content_format, 0));
    resp.options.push_back(
        coap::make_uint_option(coap::options::block2, coap::BlockValue{0, true, block.szx}.encoded()));
    std::string history;
    while (history.size() < block.size()) history += next_temperature() + ",";
    history.resize(block.size());
    resp.payload = ascii(history);
    emit(at + reply_delay(), window_end, topo_.server, topo_.server, topo_.observer, topo_.observer,
         coap::encode_message(resp), Label::dos);
  }

  // The attacker relays the sensor's POST with the path rewritten; the
  // server has no such resource.
  void mitm_exchange(Micros at, Micros window_end) {
    coap::Message req = sensor_post("mitm", next_temperature());
    emit(at, window_end, topo_.attacker, topo_.sensor, topo_.server, topo_.server, coap::encode_message(req),
         Label::mitm);
    emit(at + reply_delay(), window_end, topo_.server, topo_.server, topo_.attacker, topo_.sensor,
         coap::encode_message(ack_for(req, coap::codes::not_found)), Label::mitm);
  }

  void crossproto_frame(Micros at, Micros window_end) {
    const auto id = static_cast<std::uint16_t>(0xC000u | rng_.below(0x4000));
    const auto ttl = static_cast<std::uint32_t>(60 + rng_.below(3540));
    const char* names[] = {"sensor.local", "temp.local", "coap.local"};
    auto payload = make_dns_response(id, names[rng_.below(3)], ipv4_bytes(topo_.attacker.ip), ttl);
    emit(at, window_end, topo_.attacker, topo_.server, topo_.observer, topo_.observer, std::move(payload),
         Label::crossproto);
  }

  const ScenarioConfig& cfg_;
  const Topology& topo_;
  Rng rng_;
  std::vector<PendingFrame> pending_;
  std::uint64_t seq_ = 0;
  std::uint16_t sensor_mid_ = 0;
  std::uint16_t server_mid_ = 0;
  std::uint16_t attacker_mid_ = 0;
  std::uint32_t observe_seq_ = 0;
  double temperature_ = 0.0;
  double humidity_ = 0.0;
};

struct SegmentSpec {
  double duration_s;
  double normal_rate_hz;
  AttackWindow window;
};

// Rates are set so the expected attack share of frames matches the class
// ratios of the three captured files: DoS 9050/30319, MitM 3462/24684,
// cross-protocol 2490/62943. The full-size presets also match their
// frame counts; the merged preset uses ~10k-frame versions of each.
constexpr SegmentSpec kDosFull{600.0, 17.72, {Label::dos, 200.0, 400.0, 22.62}};
constexpr SegmentSpec kMitmFull{600.0, 17.69, {Label::mitm, 250.0, 400.0, 11.54}};
constexpr SegmentSpec kCrossFull{1800.0, 16.79, {Label::crossproto, 900.0, 1200.0, 8.30}};
constexpr SegmentSpec kDosSmall{200.0, 17.54, {Label::dos, 60.0, 130.0, 21.32}};
constexpr SegmentSpec kMitmSmall{240.0, 17.91, {Label::mitm, 100.0, 160.0, 11.69}};
constexpr SegmentSpec kCrossSmall{280.0, 17.15, {Label::crossproto, 150.0, 200.0, 7.92}};

ScenarioConfig from_spec(const SegmentSpec& spec, std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.seed = seed;
  cfg.duration_s = spec.duration_s;
  cfg.normal_rate_hz = spec.normal_rate_hz;
  cfg.attack_windows = {spec.window};
  return cfg;
}

}  // namespace

std::string_view label_name(Label label) noexcept {
  switch (label) {
    case Label::normal: return "normal";
    case Label::dos: return "dos";
    case Label::mitm: return "mitm";
    case Label::crossproto: return "crossproto";
  }
  return "normal";
}

std::optional<Label> parse_label(std::string_view name) noexcept {
  for (Label l : {Label::normal, Label::dos, Label::mitm, Label::crossproto}) {
    if (label_name(l) == name) return l;
  }
  return std::nullopt;
}

std::string format_mac(const MacAddress& mac) {
  char buf[18];
  std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x", mac[0], mac[1], mac[2], mac[3], mac[4], mac[5]);
  return buf;
}

std::optional<MacAddress> parse_mac_address(std::string_view text) noexcept {
  if (text.size() != 17) return std::nullopt;
  MacAddress mac{};
  auto hex = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  for (std::size_t i = 0; i < 6; ++i) {
    const int hi = hex(text[3 * i]);
    const int lo = hex(text[3 * i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    if (i < 5 && text[3 * i + 2] != ':') return std::nullopt;
    mac[i] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return mac;
}

Topology Topology::standard() {
  Topology t;
  t.server = {{0x08, 0x00, 0x27, 0x12, 0x34, 0x56}, "192.168.1.10", 5683};
  t.sensor = {{0x5c, 0xcf, 0x7f, 0xa0, 0xb1, 0xc2}, "192.168.1.20", 5683};
  t.observer = {{0xb8, 0x27, 0xeb, 0x4f, 0x11, 0x22}, "192.168.1.30", 41234};
  t.attacker = {{0x00, 0x0c, 0x29, 0xaa, 0xbb, 0xcc}, "192.168.1.66", 5683};
  return t;
}

void ScenarioConfig::validate() const {
  if (!(duration_s >= 0.0) || !std::isfinite(duration_s)) bad_config("duration must be finite and >= 0");
  if (!(normal_rate_hz >= 0.0) || !std::isfinite(normal_rate_hz)) bad_config("normal rate must be finite and >= 0");
  for (const AttackWindow& w : attack_windows) {
    if (w.kind == Label::normal) bad_config("attack window kind cannot be normal");
    if (!(w.start_s >= 0.0) || !(w.start_s < w.end_s) || !(w.end_s <= duration_s)) {
      bad_config("attack window must satisfy 0 <= start < end <= duration");
    }
    if (!(w.rate_hz > 0.0) || !std::isfinite(w.rate_hz)) bad_config("attack window rate must be positive");
  }
}

std::vector<LabeledFrame> synthesize(const ScenarioConfig& config) {
  config.validate();
  return Generator(config).run();
}

double Preset::duration_s() const {
  double total = 0.0;
  for (const auto& s : segments) total += s.duration_s;
  return total;
}

std::vector<AttackWindow> Preset::windows() const {
  std::vector<AttackWindow> out;
  double offset = 0.0;
  for (const auto& s : segments) {
    for (AttackWindow w : s.attack_windows) {
      w.start_s += offset;
      w.end_s += offset;
      out.push_back(w);
    }
    offset += s.duration_s;
  }
  return out;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"dos-scenario", "mitm-scenario", "crossproto-scenario", "merged"};
  return names;
}

Preset make_preset(std::string_view name, std::uint64_t seed) {
  Preset p;
  p.name = std::string(name);
  if (name == "dos-scenario") {
    p.segments = {from_spec(kDosFull, seed)};
  } else if (name == "mitm-scenario") {
    p.segments = {from_spec(kMitmFull, seed)};
  } else if (name == "crossproto-scenario") {
    p.segments = {from_spec(kCrossFull, seed)};
  } else if (name == "merged") {
    p.segments = {from_spec(kDosSmall, derive_seed(seed, 1)), from_spec(kMitmSmall, derive_seed(seed, 2)),
                  from_spec(kCrossSmall, derive_seed(seed, 3))};
  } else {
    bad_config("unknown preset '" + std::string(name) + "'");
  }
  return p;
}

std::vector<LabeledFrame> synthesize(const Preset& preset) {
  std::vector<LabeledFrame> out;
  Micros offset = 0;
  for (const ScenarioConfig& seg : preset.segments) {
    for (LabeledFrame& f : synthesize(seg)) {
      f.timestamp_s = static_cast<double>(to_micros(f.timestamp_s) + offset) / 1e6;
      out.push_back(std::move(f));
    }
    offset += to_micros(seg.duration_s);
  }
  return out;
}

std::vector<std::uint8_t> make_dns_response(std::uint16_t transaction_id, std::string_view qname,
                                            const std::array<std::uint8_t, 4>& address, std::uint32_t ttl) {
  std::vector<std::uint8_t> out;
  auto put16 = [&](std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  };
  put16(static_cast<std::uint16_t>(transaction_id | 0xC000u));
  put16(0x8180);  // standard response, recursion available, no error
  put16(1);       // questions
  put16(1);       // answers
  put16(0);
  put16(0);
  std::size_t start = 0;
  while (start <= qname.size()) {
    std::size_t dot = qname.find('.', start);
    if (dot == std::string_view::npos) dot = qname.size();
    const std::string_view label = qname.substr(start, dot - start);
    if (!label.empty()) {
      out.push_back(static_cast<std::uint8_t>(label.size()));
      out.insert(out.end(), label.begin(), label.end());
    }
    start = dot + 1;
  }
  out.push_back(0);
  put16(1);  // A
  put16(1);  // IN
  put16(0xC00C);  // pointer to the question name
  put16(1);
  put16(1);
  put16(static_cast<std::uint16_t>(ttl >> 16));
  put16(static_cast<std::uint16_t>(ttl & 0xFFFF));
  put16(4);
  out.insert(out.end(), address.begin(), address.end());
  return out;
}

}  // namespace coapids::synth
