#include "coapids/error.hpp"

namespace coapids {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::truncated: return "Truncated";
    case Errc::invalid_token_length: return "InvalidTokenLength";
    case Errc::reserved_option_nibble: return "ReservedOptionNibble";
    case Errc::unsupported_version: return "UnsupportedVersion";
    case Errc::empty_payload: return "EmptyPayload";
    case Errc::option_number_overflow: return "OptionNumberOverflow";
    case Errc::invariant_violation: return "InvariantViolation";
    case Errc::invalid_config: return "InvalidConfig";
    case Errc::ragged_row: return "RaggedRow";
    case Errc::missing_type_column: return "MissingTypeColumn";
    case Errc::overlapping_windows: return "OverlappingWindows";
    case Errc::malformed_csv: return "MalformedCsv";
    case Errc::empty_table: return "EmptyTable";
    case Errc::non_numeric_residue: return "NonNumericResidue";
    case Errc::unknown_class_label: return "UnknownClassLabel";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::non_finite_loss: return "NonFiniteLoss";
    case Errc::empty_data: return "EmptyData";
    case Errc::single_class: return "SingleClass";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::too_few_samples_per_class: return "TooFewSamplesPerClass";
    case Errc::io: return "IoError";
    case Errc::bad_model: return "BadModel";
    case Errc::bad_config: return "BadConfig";
  }
  return "Unknown";
}

}  // namespace coapids
