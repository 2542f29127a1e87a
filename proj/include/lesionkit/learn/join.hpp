#pragma once

#include <set>
#include <vector>

#include "lesionkit/core/error.hpp"
#include "lesionkit/learn/labels.hpp"
#include "lesionkit/maskio/feature_table.hpp"

namespace lesionkit::learn {

// Column-wise concatenation keyed by case_id; rows follow the first table.
inline maskio::FeatureTable join_feature_tables(const std::vector<maskio::FeatureTable>& tables) {
  if (tables.empty()) throw InvalidArgument("join_feature_tables: no tables");
  for (const auto& t : tables) t.validate();
  maskio::FeatureTable out = tables[0];
  std::set<std::string> names(out.columns.begin(), out.columns.end());
  std::set<std::string> ids;
  for (const auto& r : out.rows) ids.insert(r.case_id);
  for (std::size_t k = 1; k < tables.size(); ++k) {
    const auto& t = tables[k];
    std::set<std::string> other;
    for (const auto& r : t.rows) other.insert(r.case_id);
    if (other != ids) throw InvalidArgument("join_feature_tables: case_id sets differ");
    for (const auto& c : t.columns)
      if (!names.insert(c).second) throw InvalidArgument("join_feature_tables: duplicate feature '" + c + "'");
    out.columns.insert(out.columns.end(), t.columns.begin(), t.columns.end());
    for (auto& r : out.rows) {
      const auto& src = t.row(r.case_id).values;
      r.values.insert(r.values.end(), src.begin(), src.end());
    }
  }
  return out;
}

// Feature matrix of a table, rows in table order.
inline Matrix to_matrix(const maskio::FeatureTable& t) {
  Matrix m(t.rows.size(), t.columns.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    for (std::size_t j = 0; j < t.columns.size(); ++j) m(i, j) = t.rows[i].values[j];
  return m;
}

}  // namespace lesionkit::learn
