#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace coapids::coap {

enum class MessageType : std::uint8_t { con = 0, non = 1, ack = 2, rst = 3 };

std::string_view message_type_name(MessageType type) noexcept;

/// Request/response code, class 0-7 and detail 0-31.
struct Code {
  std::uint8_t cls = 0;
  std::uint8_t detail = 0;

  /// "c.dd" rendering, e.g. "0.01" for GET and "2.05" for Content.
  std::string to_string() const;

  auto operator<=>(const Code&) const = default;
};

namespace codes {
inline constexpr Code empty{0, 0};
inline constexpr Code get{0, 1};
inline constexpr Code post{0, 2};
inline constexpr Code put{0, 3};
inline constexpr Code del{0, 4};
inline constexpr Code changed{2, 4};
inline constexpr Code content{2, 5};
inline constexpr Code not_found{4, 4};
}  // namespace codes

namespace options {
inline constexpr std::uint32_t if_match = 1;
inline constexpr std::uint32_t uri_host = 3;
inline constexpr std::uint32_t etag = 4;
inline constexpr std::uint32_t if_none_match = 5;
inline constexpr std::uint32_t observe = 6;
inline constexpr std::uint32_t uri_port = 7;
inline constexpr std::uint32_t location_path = 8;
inline constexpr std::uint32_t uri_path = 11;
inline constexpr std::uint32_t content_format = 12;
inline constexpr std::uint32_t max_age = 14;
inline constexpr std::uint32_t uri_query = 15;
inline constexpr std::uint32_t accept = 17;
inline constexpr std::uint32_t location_query = 20;
inline constexpr std::uint32_t block2 = 23;
inline constexpr std::uint32_t block1 = 27;
inline constexpr std::uint32_t size2 = 28;
inline constexpr std::uint32_t proxy_uri = 35;
inline constexpr std::uint32_t proxy_scheme = 39;
inline constexpr std::uint32_t size1 = 60;
}  // namespace options

/// Largest option delta or length the extended nibble scheme can carry.
inline constexpr std::uint32_t kMaxExtended = 65535 + 269;

struct Option {
  std::uint32_t number = 0;
  std::vector<std::uint8_t> value;

  bool operator==(const Option&) const = default;
};

struct Message {
  std::uint8_t version = 1;
  MessageType type = MessageType::con;
  std::vector<std::uint8_t> token;
  Code code;
  std::uint16_t message_id = 0;
  std::vector<Option> options;  // non-decreasing option numbers
  std::vector<std::uint8_t> payload;

  /// First option with the given number, if any.
  const Option* find_option(std::uint32_t number) const;

  bool operator==(const Message&) const = default;
};

/// Decodes one datagram. Throws DecodeError with the failing byte offset.
Message decode_message(std::span<const std::uint8_t> bytes);

/// Like decode_message, but reports failure as nullopt.
std::optional<Message> try_decode(std::span<const std::uint8_t> bytes) noexcept;

/// Canonical wire form. Throws Error(invariant_violation) if msg is not encodable.
std::vector<std::uint8_t> encode_message(const Message& msg);

// Option value helpers.

/// Minimal big-endian unsigned encoding (zero encodes as an empty value).
std::vector<std::uint8_t> encode_uint(std::uint32_t value);
std::uint32_t decode_uint(std::span<const std::uint8_t> value) noexcept;

Option make_uint_option(std::uint32_t number, std::uint32_t value);
Option make_string_option(std::uint32_t number, std::string_view value);

/// Block1/Block2 option payload.
struct BlockValue {
  std::uint32_t num = 0;
  bool more = false;
  std::uint8_t szx = 0;  // block size is 2^(szx + 4)

  std::uint32_t size() const noexcept { return 1u << (szx + 4); }
  std::uint32_t encoded() const noexcept { return (num << 4) | (more ? 8u : 0u) | szx; }
  static BlockValue from_encoded(std::uint32_t v) noexcept {
    return {v >> 4, (v & 8u) != 0, static_cast<std::uint8_t>(v & 7u)};
  }
};

/// Registered option name, or "Unknown".
std::string_view option_name(std::uint32_t number) noexcept;

/// Wireshark-style property text, e.g. "Type 11, Critical, Unsafe".
std::string option_description(std::uint32_t number);

/// Media type for a Content-Format number, or "unknown/<n>".
std::string content_format_name(std::uint32_t format);

}  // namespace coapids::coap
