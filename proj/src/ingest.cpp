#include "coapids/ingest.hpp"

#include <cstdio>

#include "coapids/coap_wire.hpp"
#include "coapids/error.hpp"

namespace coapids::ingest {

namespace {

constexpr std::size_t kEthIpUdpOverhead = 14 + 20 + 8;

enum Col : std::size_t {
  kTimeEpoch,
  kTimeRelative,
  kFrameLen,
  kEthSrc,
  kEthDst,
  kUdpSrcPort,
  kUdpDstPort,
  kUdpLength,
  kCoapVersion,
  kCoapType,
  kCoapCode,
  kCoapMid,
  kCoapToken,
  kCoapTokenLen,
  kOptCtype,
  kOptDesc,
  kOptName,
  kOptUriPath,
  kPayloadDesc,
  kOptObserve,
  kOptBlockSize,
  kOptBlockNumber,
  kOptBlockMflag,
  kPayloadLength,
  kColumnCount
};

std::string fixed6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string hex(std::span<const std::uint8_t> bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xF]);
  }
  return out;
}

std::optional<std::vector<std::uint8_t>> unhex(std::string_view text) {
  if (text.size() % 2) return std::nullopt;
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 2);
  auto nib = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  for (std::size_t i = 0; i < text.size(); i += 2) {
    const int hi = nib(text[i]);
    const int lo = nib(text[i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out.push_back(static_cast<std::uint8_t>(hi * 16 + lo));
  }
  return out;
}

std::string integer(std::uint64_t v) { return std::to_string(v); }

void fill_coap(const coap::Message& msg, std::vector<Cell>& v) {
  v[kCoapVersion] = integer(msg.version);
  v[kCoapType] = integer(static_cast<unsigned>(msg.type));
  v[kCoapCode] = msg.code.to_string();
  v[kCoapMid] = integer(msg.message_id);
  if (!msg.token.empty()) v[kCoapToken] = hex(msg.token);
  v[kCoapTokenLen] = integer(msg.token.size());
  v[kPayloadLength] = integer(msg.payload.size());

  std::string names, descs, path;
  std::optional<std::uint32_t> ctype;
  for (const coap::Option& opt : msg.options) {
    if (!names.empty()) names += ',';
    names += coap::option_name(opt.number);
    if (!descs.empty()) descs += "; ";
    descs += coap::option_description(opt.number);
    switch (opt.number) {
      case coap::options::uri_path:
        if (!path.empty()) path += '/';
        path.append(opt.value.begin(), opt.value.end());
        break;
      case coap::options::content_format:
        ctype = coap::decode_uint(opt.value);
        break;
      case coap::options::observe:
        v[kOptObserve] = integer(coap::decode_uint(opt.value));
        break;
      case coap::options::block1:
      case coap::options::block2: {
        const auto block = coap::BlockValue::from_encoded(coap::decode_uint(opt.value));
        v[kOptBlockSize] = integer(block.size());
        v[kOptBlockNumber] = integer(block.num);
        v[kOptBlockMflag] = integer(block.more ? 1 : 0);
        break;
      }
      default:
        break;
    }
  }
  if (!names.empty()) v[kOptName] = names;
  if (!descs.empty()) v[kOptDesc] = descs;
  if (!path.empty()) v[kOptUriPath] = path;
  if (ctype) v[kOptCtype] = coap::content_format_name(*ctype);
  if (!msg.payload.empty()) {
    v[kPayloadDesc] = ctype ? coap::content_format_name(*ctype) : std::string("application/octet-stream");
  }
}

std::uint16_t parse_port(const Cell& cell, std::size_t row) {
  const auto v = cell ? parse_number(*cell) : std::nullopt;
  if (!v || *v < 0 || *v > 65535 || *v != static_cast<double>(static_cast<std::uint16_t>(*v))) {
    throw Error(Errc::bad_model, "frame log row " + std::to_string(row) + ": bad port");
  }
  return static_cast<std::uint16_t>(*v);
}

const std::vector<std::string> kFrameLogColumns{"timestamp_s", "src_mac", "dst_mac",     "src_ip", "dst_ip",
                                                "src_port",    "dst_port", "udp_payload", "type"};

}  // namespace

const std::vector<std::string>& frame_columns() {
  static const std::vector<std::string> cols{
      "frame.time_epoch",     "frame.time_relative", "frame.len",       "eth.src",
      "eth.dst",              "udp.srcport",         "udp.dstport",     "udp.length",
      "coap.version",         "coap.type",           "coap.code",       "coap.mid",
      "coap.token",           "coap.token_len",      "coap.opt.ctype",  "coap.opt.desc",
      "coap.opt.name",        "coap.opt.uri_path",   "coap.payload_desc", "coap.opt.observe",
      "coap.opt.block_size",  "coap.opt.block_number", "coap.opt.block_mflag", "coap.payload_length"};
  static_assert(kColumnCount == 24);
  return cols;
}

std::vector<std::string> dataset_columns() {
  auto cols = frame_columns();
  cols.emplace_back(kTypeColumn);
  return cols;
}

FrameRecord dissect(const synth::LabeledFrame& frame, double epoch_base) {
  FrameRecord rec;
  rec.values.resize(kColumnCount);
  auto& v = rec.values;
  v[kTimeEpoch] = fixed6(epoch_base + frame.timestamp_s);
  v[kTimeRelative] = fixed6(frame.timestamp_s);
  v[kFrameLen] = integer(kEthIpUdpOverhead + frame.udp_payload.size());
  v[kEthSrc] = synth::format_mac(frame.src_mac);
  v[kEthDst] = synth::format_mac(frame.dst_mac);
  v[kUdpSrcPort] = integer(frame.src_port);
  v[kUdpDstPort] = integer(frame.dst_port);
  v[kUdpLength] = integer(8 + frame.udp_payload.size());
  if (auto msg = coap::try_decode(frame.udp_payload)) fill_coap(*msg, v);
  rec.label = std::string(synth::label_name(frame.label));
  return rec;
}

DatasetTable dissect_all(std::span<const synth::LabeledFrame> frames, double epoch_base) {
  DatasetTable table;
  table.columns = dataset_columns();
  table.rows.reserve(frames.size());
  for (const auto& f : frames) {
    FrameRecord rec = dissect(f, epoch_base);
    rec.values.emplace_back(std::move(rec.label));
    table.rows.push_back(std::move(rec.values));
  }
  return table;
}

void label_by_window(DatasetTable& table, std::span<const LabelWindow> windows) {
  for (std::size_t i = 0; i < windows.size(); ++i) {
    for (std::size_t j = i + 1; j < windows.size(); ++j) {
      const auto& a = windows[i];
      const auto& b = windows[j];
      if (a.kind != b.kind && a.start_s < b.end_s && b.start_s < a.end_s) {
        throw Error(Errc::overlapping_windows, "windows '" + a.kind + "' and '" + b.kind + "' overlap");
      }
    }
  }
  const std::size_t time_col = table.require_column("frame.time_relative");
  std::size_t type_col;
  if (auto idx = table.column_index(kTypeColumn)) {
    type_col = *idx;
  } else {
    table.columns.emplace_back(kTypeColumn);
    for (auto& row : table.rows) row.emplace_back();
    type_col = table.columns.size() - 1;
  }
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    auto& row = table.rows[r];
    const auto t = row[time_col] ? parse_number(*row[time_col]) : std::nullopt;
    if (!t) throw Error(Errc::non_numeric_residue, "frame.time_relative missing or invalid in row " + std::to_string(r));
    std::string label = "normal";
    for (const auto& w : windows) {
      if (w.start_s <= *t && *t < w.end_s) {
        label = w.kind;
        break;
      }
    }
    row[type_col] = std::move(label);
  }
}

DatasetTable frames_to_table(std::span<const synth::LabeledFrame> frames) {
  DatasetTable table;
  table.columns = kFrameLogColumns;
  table.rows.reserve(frames.size());
  for (const auto& f : frames) {
    table.rows.push_back({fixed6(f.timestamp_s), synth::format_mac(f.src_mac), synth::format_mac(f.dst_mac),
                          f.src_ip, f.dst_ip, integer(f.src_port), integer(f.dst_port),
                          f.udp_payload.empty() ? Cell{""} : Cell{hex(f.udp_payload)},
                          std::string(synth::label_name(f.label))});
  }
  return table;
}

std::vector<synth::LabeledFrame> frames_from_table(const DatasetTable& table) {
  std::vector<std::size_t> idx;
  for (const auto& name : kFrameLogColumns) idx.push_back(table.require_column(name));
  std::vector<synth::LabeledFrame> frames;
  frames.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    auto bad = [&](const char* what) {
      return Error(Errc::bad_model, "frame log row " + std::to_string(r) + ": " + what);
    };
    synth::LabeledFrame f;
    const auto t = row[idx[0]] ? parse_number(*row[idx[0]]) : std::nullopt;
    if (!t) throw bad("bad timestamp");
    f.timestamp_s = *t;
    const auto src = row[idx[1]] ? synth::parse_mac_address(*row[idx[1]]) : std::nullopt;
    const auto dst = row[idx[2]] ? synth::parse_mac_address(*row[idx[2]]) : std::nullopt;
    if (!src || !dst) throw bad("bad MAC address");
    f.src_mac = *src;
    f.dst_mac = *dst;
    f.src_ip = row[idx[3]].value_or("");
    f.dst_ip = row[idx[4]].value_or("");
    f.src_port = parse_port(row[idx[5]], r);
    f.dst_port = parse_port(row[idx[6]], r);
    auto payload = unhex(row[idx[7]].value_or(""));
    if (!payload) throw bad("bad payload hex");
    f.udp_payload = std::move(*payload);
    const auto label = row[idx[8]] ? synth::parse_label(*row[idx[8]]) : std::nullopt;
    if (!label) throw bad("unknown label");
    f.label = *label;
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace coapids::ingest
