#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coapids/traffic_synth.hpp"

namespace coapids::ingest {

/// A CSV cell. nullopt is an empty unquoted cell; "" is a quoted empty string.
using Cell = std::optional<std::string>;

/// Name of the label column.
inline constexpr std::string_view kTypeColumn = "type";

/// Epoch added to relative timestamps when filling frame.time_epoch.
inline constexpr double kDefaultEpochBase = 1700000000.0;

struct DatasetTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  std::optional<std::size_t> column_index(std::string_view name) const;
  /// Throws Error(missing_type_column) if name == "type", else Error(bad_config).
  std::size_t require_column(std::string_view name) const;
  /// Checks rectangularity and unique header names.
  void validate() const;

  bool operator==(const DatasetTable&) const = default;
};

/// The dissected frame columns, in order, without the trailing "type".
const std::vector<std::string>& frame_columns();

/// frame_columns() followed by "type".
std::vector<std::string> dataset_columns();

struct FrameRecord {
  std::vector<Cell> values;  // aligned with frame_columns()
  std::string label;         // goes to the "type" column
};

/// Flattens one frame. Frame-level columns are always filled; coap.* columns
/// are filled iff the UDP payload decodes as CoAP, otherwise null.
FrameRecord dissect(const synth::LabeledFrame& frame, double epoch_base = kDefaultEpochBase);

DatasetTable dissect_all(std::span<const synth::LabeledFrame> frames, double epoch_base = kDefaultEpochBase);

struct LabelWindow {
  std::string kind;
  double start_s = 0.0;
  double end_s = 0.0;
};

/// Sets "type" to the kind of the first window with start <= t < end, where t
/// is frame.time_relative, else "normal". Windows of different kinds that
/// overlap are rejected with Error(overlapping_windows).
void label_by_window(DatasetTable& table, std::span<const LabelWindow> windows);

// CSV: comma separated, double-quote quoting, LF line ends, mandatory header.

DatasetTable parse_csv(std::istream& in, bool strict_labels = false);
DatasetTable read_csv(const std::filesystem::path& path, bool strict_labels = false);
void write_csv(const DatasetTable& table, std::ostream& out);
void write_csv(const DatasetTable& table, const std::filesystem::path& path);

// Frame log: the synthesizer's output, one frame per row with the UDP
// payload in hex.

DatasetTable frames_to_table(std::span<const synth::LabeledFrame> frames);
std::vector<synth::LabeledFrame> frames_from_table(const DatasetTable& table);

/// Shortest text that parses back to the same double; integers print without
/// a decimal point.
std::string format_number(double value);
std::optional<double> parse_number(std::string_view text) noexcept;

}  // namespace coapids::ingest
