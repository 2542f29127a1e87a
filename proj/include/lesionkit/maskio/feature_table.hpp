#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lesionkit/core/error.hpp"
#include "lesionkit/core/format.hpp"

namespace lesionkit::maskio {

struct FeatureRow {
  std::string case_id;
  std::vector<double> values;  // aligned with FeatureTable::columns
};

// Case-by-feature table. Column order is fixed by whoever produced the table
// (the radiomics catalog for hand-crafted features).
struct FeatureTable {
  std::vector<std::string> columns;
  std::vector<FeatureRow> rows;

  std::size_t column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw InvalidArgument("feature table has no column '" + name + "'");
  }

  const FeatureRow& row(const std::string& case_id) const {
    for (const auto& r : rows)
      if (r.case_id == case_id) return r;
    throw InvalidArgument("feature table has no case '" + case_id + "'");
  }

  void validate() const {
    std::set<std::string> names(columns.begin(), columns.end());
    if (names.size() != columns.size()) throw FormatError("feature table: duplicate column name");
    std::set<std::string> ids;
    for (const auto& r : rows) {
      if (r.case_id.empty()) throw FormatError("feature table: empty case_id");
      if (!ids.insert(r.case_id).second) throw FormatError("feature table: duplicate case_id '" + r.case_id + "'");
      if (r.values.size() != columns.size())
        throw FormatError("feature table: row '" + r.case_id + "' has the wrong number of values");
    }
  }
};

inline std::string feature_table_csv(const FeatureTable& table) {
  table.validate();
  std::string out = "case_id";
  for (const auto& c : table.columns) out += "," + c;
  out += '\n';
  for (const auto& r : table.rows) {
    out += r.case_id;
    for (double v : r.values) out += "," + format_double(v);
    out += '\n';
  }
  return out;
}

inline void write_feature_table(const FeatureTable& table, const std::filesystem::path& path) {
  const std::string text = feature_table_csv(table);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_cell(const std::string& text) {
  if (text == "nan" || text == "NaN") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw FormatError("feature table: bad number '" + text + "'");
  return v;
}

}  // namespace detail

inline FeatureTable read_feature_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  FeatureTable t;
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty feature table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = detail::split_csv_line(line);
  if (header.empty() || header[0] != "case_id") throw FormatError(path.string() + ": header must start with case_id");
  t.columns.assign(header.begin() + 1, header.end());
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) throw FormatError(path.string() + ": row has wrong column count");
    FeatureRow r;
    r.case_id = cells[0];
    for (std::size_t i = 1; i < cells.size(); ++i) r.values.push_back(detail::parse_cell(cells[i]));
    t.rows.push_back(std::move(r));
  }
  t.validate();
  return t;
}

}  // namespace lesionkit::maskio
