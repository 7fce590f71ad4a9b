#include "coapids/coap_wire.hpp"

#include <algorithm>
#include <cstdio>

#include "coapids/error.hpp"

namespace coapids::coap {

namespace {

constexpr std::uint8_t kPayloadMarker = 0xFF;
constexpr std::size_t kHeaderSize = 4;
constexpr std::size_t kMaxTokenLength = 8;

[[noreturn]] void invariant(const std::string& what) { throw Error(Errc::invariant_violation, what); }

// Splits a delta or length into its 4-bit nibble plus extended bytes.
std::uint8_t nibble_for(std::uint32_t v) {
  if (v < 13) return static_cast<std::uint8_t>(v);
  if (v < 269) return 13;
  return 14;
}

void append_extended(std::vector<std::uint8_t>& out, std::uint32_t v) {
  if (v < 13) return;
  if (v < 269) {
    out.push_back(static_cast<std::uint8_t>(v - 13));
    return;
  }
  const std::uint32_t ext = v - 269;
  out.push_back(static_cast<std::uint8_t>(ext >> 8));
  out.push_back(static_cast<std::uint8_t>(ext & 0xFF));
}

// Reads the extended part of a delta/length field. Advances pos.
std::uint32_t read_extended(std::span<const std::uint8_t> in, std::size_t& pos, std::uint8_t nibble,
                            std::size_t option_start) {
  if (nibble < 13) return nibble;
  if (nibble == 15) throw DecodeError(Errc::reserved_option_nibble, option_start);
  if (nibble == 13) {
    if (pos + 1 > in.size()) throw DecodeError(Errc::truncated, pos);
    return 13u + in[pos++];
  }
  if (pos + 2 > in.size()) throw DecodeError(Errc::truncated, pos);
  const std::uint32_t v = (static_cast<std::uint32_t>(in[pos]) << 8) | in[pos + 1];
  pos += 2;
  return 269u + v;
}

}  // namespace

std::string_view message_type_name(MessageType type) noexcept {
  switch (type) {
    case MessageType::con: return "CON";
    case MessageType::non: return "NON";
    case MessageType::ack: return "ACK";
    case MessageType::rst: return "RST";
  }
  return "?";
}

std::string Code::to_string() const {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%u.%02u", static_cast<unsigned>(cls), static_cast<unsigned>(detail));
  return buf;
}

const Option* Message::find_option(std::uint32_t number) const {
  auto it = std::find_if(options.begin(), options.end(), [&](const Option& o) { return o.number == number; });
  return it == options.end() ? nullptr : &*it;
}

Message decode_message(std::span<const std::uint8_t> in) {
  if (in.size() < kHeaderSize) throw DecodeError(Errc::truncated, in.size());

  Message msg;
  msg.version = in[0] >> 6;
  if (msg.version != 1) throw DecodeError(Errc::unsupported_version, 0);
  msg.type = static_cast<MessageType>((in[0] >> 4) & 0x3);
  const std::size_t tkl = in[0] & 0x0F;
  if (tkl > kMaxTokenLength) throw DecodeError(Errc::invalid_token_length, 0);
  msg.code = Code{static_cast<std::uint8_t>(in[1] >> 5), static_cast<std::uint8_t>(in[1] & 0x1F)};
  msg.message_id = static_cast<std::uint16_t>((in[2] << 8) | in[3]);

  std::size_t pos = kHeaderSize;
  if (pos + tkl > in.size()) throw DecodeError(Errc::truncated, pos);
  msg.token.assign(in.begin() + pos, in.begin() + pos + tkl);
  pos += tkl;

  std::uint64_t number = 0;
  while (pos < in.size()) {
    const std::size_t option_start = pos;
    const std::uint8_t head = in[pos++];
    if (head == kPayloadMarker) {
      if (pos == in.size()) throw DecodeError(Errc::empty_payload, option_start);
      msg.payload.assign(in.begin() + pos, in.end());
      return msg;
    }
    const std::uint32_t delta = read_extended(in, pos, head >> 4, option_start);
    const std::uint32_t length = read_extended(in, pos, head & 0x0F, option_start);
    number += delta;
    if (number > UINT32_MAX) throw DecodeError(Errc::option_number_overflow, option_start);
    if (length > in.size() - pos) throw DecodeError(Errc::truncated, pos);
    Option opt;
    opt.number = static_cast<std::uint32_t>(number);
    opt.value.assign(in.begin() + pos, in.begin() + pos + length);
    msg.options.push_back(std::move(opt));
    pos += length;
  }
  return msg;
}

std::optional<Message> try_decode(std::span<const std::uint8_t> bytes) noexcept {
  try {
    return decode_message(bytes);
  } catch (const DecodeError&) {
    return std::nullopt;
  }
}

std::vector<std::uint8_t> encode_message(const Message& msg) {
  if (msg.version != 1) invariant("version must be 1");
  if (msg.token.size() > kMaxTokenLength) invariant("token longer than 8 bytes");
  if (static_cast<unsigned>(msg.type) > 3) invariant("message type out of range");
  if (msg.code.cls > 7 || msg.code.detail > 31) invariant("code out of range");

  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + msg.token.size() + msg.payload.size() + 8 * msg.options.size() + 1);
  out.push_back(static_cast<std::uint8_t>((msg.version << 6) | (static_cast<unsigned>(msg.type) << 4) |
                                          msg.token.size()));
  out.push_back(static_cast<std::uint8_t>((msg.code.cls << 5) | msg.code.detail));
  out.push_back(static_cast<std::uint8_t>(msg.message_id >> 8));
  out.push_back(static_cast<std::uint8_t>(msg.message_id & 0xFF));
  out.insert(out.end(), msg.token.begin(), msg.token.end());

  std::uint32_t previous = 0;
  for (const Option& opt : msg.options) {
    if (opt.number < previous) invariant("options not sorted by number");
    const std::uint32_t delta = opt.number - previous;
    if (delta > kMaxExtended) invariant("option delta exceeds extended range");
    if (opt.value.size() > kMaxExtended) invariant("option value too long");
    const auto length = static_cast<std::uint32_t>(opt.value.size());
    out.push_back(static_cast<std::uint8_t>((nibble_for(delta) << 4) | nibble_for(length)));
    append_extended(out, delta);
    append_extended(out, length);
    out.insert(out.end(), opt.value.begin(), opt.value.end());
    previous = opt.number;
  }

  if (!msg.payload.empty()) {
    out.push_back(kPayloadMarker);
    out.insert(out.end(), msg.payload.begin(), msg.payload.end());
  }
  return out;
}

std::vector<std::uint8_t> encode_uint(std::uint32_t value) {
  std::vector<std::uint8_t> out;
  for (int shift = 24; shift >= 0; shift -= 8) {
    const auto byte = static_cast<std::uint8_t>(value >> shift);
    if (byte != 0 || !out.empty()) out.push_back(byte);
  }
  return out;
}

std::uint32_t decode_uint(std::span<const std::uint8_t> value) noexcept {
  std::uint32_t v = 0;
  for (std::uint8_t b : value.last(std::min<std::size_t>(value.size(), 4))) v = (v << 8) | b;
  return v;
}

Option make_uint_option(std::uint32_t number, std::uint32_t value) { return {number, encode_uint(value)}; }

Option make_string_option(std::uint32_t number, std::string_view value) {
  return {number, std::vector<std::uint8_t>(value.begin(), value.end())};
}

std::string_view option_name(std::uint32_t number) noexcept {
  switch (number) {
    case options::if_match: return "If-Match";
    case options::uri_host: return "Uri-Host";
    case options::etag: return "ETag";
    case options::if_none_match: return "If-None-Match";
    case options::observe: return "Observe";
    case options::uri_port: return "Uri-Port";
    case options::location_path: return "Location-Path";
    case options::uri_path: return "Uri-Path";
    case options::content_format: return "Content-Format";
    case options::max_age: return "Max-age";
    case options::uri_query: return "Uri-Query";
    case options::accept: return "Accept";
    case options::location_query: return "Location-Query";
    case options::block2: return "Block2";
    case options::block1: return "Block1";
    case options::size2: return "Size2";
    case options::proxy_uri: return "Proxy-Uri";
    case options::proxy_scheme: return "Proxy-Scheme";
    case options::size1: return "Size1";
    default: return "Unknown";
  }
}

std::string option_description(std::uint32_t number) {
  std::string out = "Type " + std::to_string(number);
  out += (number & 1u) ? ", Critical" : ", Elective";
  out += (number & 2u) ? ", Unsafe" : ", Safe";
  if ((number & 0x1Eu) == 0x1Cu) out += ", NoCacheKey";
  return out;
}

std::string content_format_name(std::uint32_t format) {
  switch (format) {
    case 0: return "text/plain; charset=utf-8";
    case 40: return "application/link-format";
    case 41: return "application/xml";
    case 42: return "application/octet-stream";
    case 47: return "application/exi";
    case 50: return "application/json";
    case 60: return "application/cbor";
    default: return "unknown/" + std::to_string(format);
  }
}

}  // namespace coapids::coap
