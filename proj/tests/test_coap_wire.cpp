#include <doctest.h>

#include "coapids/coap_wire.hpp"
#include "coapids/error.hpp"
#include "oracles/gen.hpp"

using namespace coapids;
using namespace coapids::coap;

namespace {

using Bytes = std::vector<std::uint8_t>;

Errc decode_error(const Bytes& b) {
  try {
    decode_message(b);
  } catch (const DecodeError& e) {
    return e.code();
  }
  FAIL("expected a decode error");
  return Errc::io;
}

}  // namespace

TEST_SUITE("coap_wire") {
  TEST_CASE("header examples") {
    const Message get = decode_message(Bytes{0x40, 0x01, 0x30, 0x39});
    CHECK(get.version == 1);
    CHECK(get.type == MessageType::con);
    CHECK(get.token.empty());
    CHECK(get.code == codes::get);
    CHECK(get.message_id == 12345);
    CHECK(get.options.empty());
    CHECK(get.payload.empty());

    const Message content = decode_message(Bytes{0x50, 0x45, 0x00, 0x01});
    CHECK(content.type == MessageType::non);
    CHECK(content.code == codes::content);
    CHECK(content.code.to_string() == "2.05");
    CHECK(content.message_id == 1);

    CHECK(encode_message(Message{}) == Bytes{0x40, 0x00, 0x00, 0x00});
    Message m;
    m.code = codes::get;
    CHECK(encode_message(m) == Bytes{0x40, 0x01, 0x00, 0x00});
  }

  TEST_CASE("uri-path option packs delta and length in one byte") {
    Message m;
    m.code = codes::get;
    m.options.push_back(make_string_option(options::uri_path, "temp"));
    const Bytes b = encode_message(m);
    REQUIRE(b.size() == 9);
    CHECK(Bytes(b.begin() + 4, b.end()) == Bytes{0xB4, 't', 'e', 'm', 'p'});
    CHECK(decode_message(b) == m);
  }

  TEST_CASE("extended deltas and lengths") {
    Message m;
    m.options.push_back({13, Bytes(13, 1)});
    m.options.push_back({13 + 269, Bytes(269, 2)});
    m.options.push_back({13 + 269 + 300, Bytes(0)});
    m.payload = {9};
    const Bytes b = encode_message(m);
    CHECK(b[4] == 0xDD);
    CHECK(decode_message(b) == m);
  }

  TEST_CASE("decode errors") {
    CHECK(decode_error({0x40, 0x01, 0x00}) == Errc::truncated);
    CHECK(decode_error({}) == Errc::truncated);
    CHECK(decode_error({0x49, 0x01, 0x00, 0x00}) == Errc::invalid_token_length);
    CHECK(decode_error({0x42, 0x01, 0x00, 0x00, 0xAA}) == Errc::truncated);
    CHECK(decode_error({0x40, 0x01, 0x00, 0x00, 0xF1}) == Errc::reserved_option_nibble);
    CHECK(decode_error({0x40, 0x01, 0x00, 0x00, 0x1F}) == Errc::reserved_option_nibble);
    CHECK(decode_error({0x40, 0x01, 0x00, 0x00, 0xB4, 't'}) == Errc::truncated);
    CHECK(decode_error({0x80, 0x01, 0x00, 0x00}) == Errc::unsupported_version);
    CHECK(decode_error({0x40, 0x01, 0x00, 0x00, 0xFF}) == Errc::empty_payload);

    try {
      decode_message(Bytes{0x40, 0x01, 0x00, 0x00, 0xB4, 't'});
    } catch (const DecodeError& e) {
      CHECK(e.offset() >= 4);
      CHECK(e.offset() <= 6);
    }
    CHECK_FALSE(try_decode(Bytes{0x40}).has_value());
  }

  TEST_CASE("encoder rejects invalid messages") {
    Message m;
    m.token.assign(9, 0);
    CHECK_THROWS_AS(encode_message(m), Error);
    Message unsorted;
    unsorted.options = {make_uint_option(12, 0), make_uint_option(11, 0)};
    CHECK_THROWS_AS(encode_message(unsorted), Error);
    Message v2;
    v2.version = 2;
    CHECK_THROWS_AS(encode_message(v2), Error);
  }

  TEST_CASE("8-bit delta extension re-encodes identically") {
    const Bytes b{0x40, 0x01, 0x00, 0x00, 0xD0, 0x00};
    const Message m = decode_message(b);
    REQUIRE(m.options.size() == 1);
    CHECK(m.options[0].number == 13);
    CHECK(encode_message(m) == b);
  }

  TEST_CASE("uint option values are minimal") {
    CHECK(encode_uint(0).empty());
    CHECK(encode_uint(0x1234) == Bytes{0x12, 0x34});
    CHECK(decode_uint(Bytes{0x01, 0x00, 0x00}) == 0x10000);
    BlockValue b{3, true, 2};
    CHECK(BlockValue::from_encoded(b.encoded()).num == 3);
    CHECK(b.size() == 64);
  }

  TEST_CASE("property: round trip of random messages") {
    Rng rng(11);
    for (int i = 0; i < 2000; ++i) {
      const Message m = gen::message(rng);
      const Bytes b = encode_message(m);
      REQUIRE(decode_message(b) == m);
      REQUIRE(encode_message(decode_message(b)) == b);
    }
  }

  TEST_CASE("fuzz: arbitrary bytes never crash the decoder") {
    Rng rng(12);
    std::size_t decoded = 0;
    for (int i = 0; i < 20000; ++i) {
      Bytes b = gen::bytes(rng, 40);
      if (!b.empty() && rng.below(2)) b[0] = static_cast<std::uint8_t>(0x40 | (b[0] & 0x3F));
      if (auto m = try_decode(b)) {
        ++decoded;
        REQUIRE(decode_message(encode_message(*m)) == *m);
      }
    }
    CHECK(decoded > 0);
  }

  TEST_CASE("option names") {
    CHECK(option_name(options::uri_path) == "Uri-Path");
    CHECK(option_name(9999) == "Unknown");
    CHECK(content_format_name(50) == "application/json");
  }
}
