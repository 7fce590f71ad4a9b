#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "coapids/error.hpp"
#include "coapids/ingest.hpp"

namespace coapids::ingest {

namespace {

bool needs_quotes(const std::string& s) {
  return s.empty() || s.find_first_of(",\"\n\r") != std::string::npos;
}

void write_cell(std::ostream& out, const Cell& cell) {
  if (!cell) return;
  if (!needs_quotes(*cell)) {
    out << *cell;
    return;
  }
  out << '"';
  for (char c : *cell) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

// Reads one record. Returns false at end of input. line is advanced past
// every physical line consumed.
bool read_record(std::istream& in, std::vector<Cell>& cells, std::size_t& line) {
  cells.clear();
  int c = in.get();
  if (c == EOF) return false;
  ++line;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (;; c = in.get()) {
    if (c == EOF || c == '\n') {
      if (!quoted && !field.empty() && field.back() == '\r') field.pop_back();
      cells.push_back(quoted || !field.empty() ? Cell{field} : Cell{});
      return true;
    }
    if (c == ',') {
      cells.push_back(quoted || !field.empty() ? Cell{field} : Cell{});
      field.clear();
      quoted = false;
      any = false;
      continue;
    }
    if (c == '"' && !any) {
      quoted = true;
      any = true;
      for (;;) {
        c = in.get();
        if (c == EOF) throw Error(Errc::malformed_csv, "unterminated quote at line " + std::to_string(line));
        if (c == '\n') ++line;
        if (c == '"') {
          if (in.peek() == '"') {
            in.get();
            field.push_back('"');
            continue;
          }
          break;
        }
        field.push_back(static_cast<char>(c));
      }
      continue;
    }
    any = true;
    field.push_back(static_cast<char>(c));
  }
}

}  // namespace

std::optional<std::size_t> DatasetTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t DatasetTable::require_column(std::string_view name) const {
  if (auto idx = column_index(name)) return *idx;
  if (name == kTypeColumn) throw Error(Errc::missing_type_column, "table has no 'type' column");
  throw Error(Errc::bad_config, "table has no column '" + std::string(name) + "'");
}

void DatasetTable::validate() const {
  std::set<std::string_view> seen;
  for (const auto& c : columns) {
    if (!seen.insert(c).second) throw Error(Errc::malformed_csv, "duplicate column '" + c + "'");
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != columns.size()) {
      throw Error(Errc::ragged_row, "row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                                        " cells, header has " + std::to_string(columns.size()));
    }
  }
}

DatasetTable parse_csv(std::istream& in, bool strict_labels) {
  DatasetTable table;
  std::vector<Cell> cells;
  std::size_t line = 0;
  if (!read_record(in, cells, line)) throw Error(Errc::malformed_csv, "missing header row");
  for (auto& c : cells) table.columns.push_back(c.value_or(""));
  table.validate();
  while (true) {
    const std::size_t first_line = line + 1;
    if (!read_record(in, cells, line)) break;
    if (cells.size() == 1 && !cells[0] && table.columns.size() != 1) continue;  // blank line
    if (cells.size() != table.columns.size()) {
      throw Error(Errc::ragged_row, "line " + std::to_string(first_line) + " has " + std::to_string(cells.size()) +
                                        " cells, header has " + std::to_string(table.columns.size()));
    }
    table.rows.push_back(cells);
  }
  if (strict_labels) table.require_column(kTypeColumn);
  return table;
}

DatasetTable read_csv(const std::filesystem::path& path, bool strict_labels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open '" + path.string() + "'");
  return parse_csv(in, strict_labels);
}

void write_csv(const DatasetTable& table, std::ostream& out) {
  table.validate();
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out << ',';
    write_cell(out, table.columns[i]);
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      write_cell(out, row[i]);
    }
    out << '\n';
  }
}

void write_csv(const DatasetTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write '" + path.string() + "'");
  write_csv(table, out);
  if (!out) throw Error(Errc::io, "write failed for '" + path.string() + "'");
}

std::string format_number(double value) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_number(std::string_view text) noexcept {
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

}  // namespace coapids::ingest
