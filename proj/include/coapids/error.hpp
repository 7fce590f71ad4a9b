#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace coapids {

enum class Errc {
  // coap_wire
  truncated,
  invalid_token_length,
  reserved_option_nibble,
  unsupported_version,
  empty_payload,
  option_number_overflow,
  invariant_violation,
  // traffic_synth
  invalid_config,
  // ingest
  ragged_row,
  missing_type_column,
  overlapping_windows,
  malformed_csv,
  // preprocess
  empty_table,
  non_numeric_residue,
  unknown_class_label,
  // autoenc / trees
  dimension_mismatch,
  non_finite_loss,
  empty_data,
  single_class,
  // eval
  length_mismatch,
  too_few_samples_per_class,
  // plumbing
  io,
  bad_model,
  bad_config,
};

std::string_view errc_name(Errc code) noexcept;

/// Data or model error. The CLI maps these to exit status 1.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code), detail_(what) {}

  Errc code() const noexcept { return code_; }
  /// The message without the error-kind prefix.
  const std::string& detail() const noexcept { return detail_; }

  /// Same kind, message prefixed with where it happened.
  Error within(const std::string& context) const { return Error(code_, context + ": " + detail_); }

 private:
  Errc code_;
  std::string detail_;
};

/// Wire decoding failure carrying the byte offset where parsing stopped.
class DecodeError : public Error {
 public:
  DecodeError(Errc code, std::size_t offset)
      : Error(code, "at byte offset " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Bad command-line usage. The CLI maps these to exit status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace coapids
