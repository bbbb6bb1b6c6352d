#pragma once

// Reading tabular data (CSV with header, KEEL .dat) into typed columns and
// turning categorical columns into state labels. Numeric columns are kept
// as values until discretized.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bkbforge/core.hpp"
#include "bkbforge/error.hpp"

namespace bkbforge {

enum class ColumnKind { kCategorical, kNumeric };

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::kCategorical;
  std::vector<std::string> states;  // categorical: labels in state order
  std::vector<std::string> raw;     // one cell per row
  std::vector<double> values;       // numeric: parsed cells
};

struct Table {
  std::vector<Column> columns;
  std::size_t num_rows = 0;
  std::optional<std::size_t> target;  // KEEL @outputs, if declared

  std::optional<std::size_t> column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i].name == name) return i;
    }
    return std::nullopt;
  }
};

enum class TableFormat { kAuto, kCsv, kKeel };

inline TableFormat parse_format(const std::string& s) {
  if (s == "auto") return TableFormat::kAuto;
  if (s == "csv") return TableFormat::kCsv;
  if (s == "keel" || s == "keel-dat") return TableFormat::kKeel;
  throw InputError("unknown format '" + s + "' (expected csv or keel-dat)");
}

// Integer columns with at most this many distinct values are categorical.
inline constexpr std::size_t kMaxIntegerStates = 10;

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == sep && !quoted) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline bool is_missing(const std::string& cell) { return cell.empty() || cell == "?"; }

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Sorts labels numerically when all parse as numbers, else lexically.
inline std::vector<std::string> ordered_labels(const std::set<std::string>& labels) {
  std::vector<std::string> out(labels.begin(), labels.end());
  bool numeric = true;
  for (const auto& l : out) numeric = numeric && parse_number(l).has_value();
  if (numeric) {
    std::stable_sort(out.begin(), out.end(),
                     [](const std::string& a, const std::string& b) { return *parse_number(a) < *parse_number(b); });
  }
  return out;
}

// Infers the kind of an undeclared column from its cells.
inline void infer_kind(Column& c) {
  bool numeric = true, integral = true;
  std::set<std::string> distinct;
  for (const auto& cell : c.raw) {
    distinct.insert(cell);
    auto v = parse_number(cell);
    if (!v) {
      numeric = false;
      break;
    }
    integral = integral && std::floor(*v) == *v;
  }
  if (numeric && !(integral && distinct.size() <= kMaxIntegerStates)) {
    c.kind = ColumnKind::kNumeric;
  } else {
    c.kind = ColumnKind::kCategorical;
    if (!numeric) {
      distinct.clear();
      distinct.insert(c.raw.begin(), c.raw.end());
    }
    c.states = ordered_labels(distinct);
  }
}

inline void finish_numeric(Column& c) {
  c.values.clear();
  for (std::size_t r = 0; r < c.raw.size(); ++r) {
    auto v = parse_number(c.raw[r]);
    if (!v) throw InputError("column '" + c.name + "', row " + std::to_string(r + 1) + ": '" + c.raw[r] + "' is not numeric");
    c.values.push_back(*v);
  }
}

inline void check_cells(const std::vector<std::string>& cells, std::size_t expected, std::size_t row,
                        const std::vector<Column>& cols) {
  if (cells.size() != expected) {
    throw InputError("row " + std::to_string(row) + " has " + std::to_string(cells.size()) + " cells, expected " +
                     std::to_string(expected));
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (is_missing(cells[i])) {
      throw InputError("missing value at row " + std::to_string(row) + ", column '" + cols[i].name + "'");
    }
  }
}

}  // namespace detail

inline Table parse_csv(std::istream& in) {
  Table t;
  std::string line;
  while (std::getline(in, line) && detail::trim(line).empty()) {
  }
  if (detail::trim(line).empty()) throw InputError("CSV input has no header");
  for (auto& name : detail::split(line, ',')) {
    if (name.empty()) throw InputError("CSV header has an empty column name");
    t.columns.push_back(Column{name, ColumnKind::kCategorical, {}, {}, {}});
  }
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    ++row;
    const auto cells = detail::split(line, ',');
    detail::check_cells(cells, t.columns.size(), row, t.columns);
    for (std::size_t i = 0; i < cells.size(); ++i) t.columns[i].raw.push_back(cells[i]);
  }
  t.num_rows = row;
  for (auto& c : t.columns) {
    detail::infer_kind(c);
    if (c.kind == ColumnKind::kNumeric) detail::finish_numeric(c);
  }
  return t;
}

// KEEL .dat: @attribute lines declare nominal ({a, b}), integer or real
// columns; @outputs names the target; rows follow @data.
inline Table parse_keel(std::istream& in) {
  Table t;
  std::vector<std::string> declared;  // "nominal", "integer", "real"
  std::string outputs;
  std::string line;
  bool in_data = false;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    const auto s = detail::trim(line);
    if (s.empty() || s[0] == '%') continue;
    if (!in_data && s[0] == '@') {
      std::istringstream ls(s);
      std::string kw;
      ls >> kw;
      kw = detail::lower(kw);
      if (kw == "@attribute") {
        std::string rest;
        std::getline(ls, rest);
        rest = detail::trim(rest);
        std::size_t name_end = rest.find_first_of(" \t{");
        if (name_end == std::string::npos) throw InputError("malformed @attribute line: " + s);
        Column c{rest.substr(0, name_end), ColumnKind::kCategorical, {}, {}, {}};
        const std::string spec = detail::trim(rest.substr(name_end));
        if (!spec.empty() && spec[0] == '{') {
          const auto close = spec.find('}');
          if (close == std::string::npos) throw InputError("unterminated nominal list: " + s);
          c.states = detail::split(spec.substr(1, close - 1), ',');
          declared.push_back("nominal");
        } else {
          const auto type = detail::lower(spec.substr(0, spec.find_first_of(" \t[")));
          if (type != "integer" && type != "real" && type != "numeric") {
            throw InputError("unsupported KEEL attribute type '" + type + "'");
          }
          declared.push_back(type == "integer" ? "integer" : "real");
        }
        t.columns.push_back(std::move(c));
      } else if (kw == "@outputs" || kw == "@output") {
        std::getline(ls, outputs);
        outputs = detail::trim(outputs);
      } else if (kw == "@data") {
        in_data = true;
      }
      continue;
    }
    if (!in_data) throw InputError("data before @data section");
    ++row;
    const auto cells = detail::split(s, ',');
    detail::check_cells(cells, t.columns.size(), row, t.columns);
    for (std::size_t i = 0; i < cells.size(); ++i) t.columns[i].raw.push_back(cells[i]);
  }
  if (t.columns.empty()) throw InputError("KEEL input declares no attributes");
  t.num_rows = row;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    auto& c = t.columns[i];
    if (declared[i] == "nominal") {
      for (std::size_t r = 0; r < c.raw.size(); ++r) {
        if (std::find(c.states.begin(), c.states.end(), c.raw[r]) == c.states.end()) {
          throw InputError("row " + std::to_string(r + 1) + ", column '" + c.name + "': '" + c.raw[r] +
                           "' is not a declared value");
        }
      }
    } else if (declared[i] == "integer") {
      detail::infer_kind(c);
      if (c.kind == ColumnKind::kNumeric) detail::finish_numeric(c);
    } else {
      c.kind = ColumnKind::kNumeric;
      detail::finish_numeric(c);
    }
  }
  if (!outputs.empty()) {
    const auto name = detail::split(outputs, ',').front();
    t.target = t.column_index(name);
    if (!t.target) throw InputError("@outputs names unknown attribute '" + name + "'");
  }
  return t;
}

inline Table read_table(const std::string& path, TableFormat format = TableFormat::kAuto) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  if (format == TableFormat::kAuto) {
    const auto dot = path.rfind('.');
    const auto ext = dot == std::string::npos ? std::string() : detail::lower(path.substr(dot));
    if (ext == ".dat") {
      format = TableFormat::kKeel;
    } else if (ext == ".csv" || ext == ".txt") {
      format = TableFormat::kCsv;
    } else {
      throw InputError("cannot infer the format of '" + path + "'; pass --format csv|keel-dat");
    }
  }
  return format == TableFormat::kKeel ? parse_keel(in) : parse_csv(in);
}

// Target column: the named one, else the KEEL output, else the last column.
inline std::size_t resolve_target(const Table& t, const std::string& name = {}) {
  if (!name.empty()) {
    auto idx = t.column_index(name);
    if (!idx) throw InputError("unknown target column '" + name + "'");
    return *idx;
  }
  if (t.target) return *t.target;
  if (t.columns.empty()) throw InputError("table has no columns");
  return t.columns.size() - 1;
}

// Dataset over the table when every column is categorical.
inline Dataset to_dataset(const Table& t) {
  std::vector<Variable> vars;
  for (const auto& c : t.columns) {
    if (c.kind != ColumnKind::kCategorical) {
      throw InputError("column '" + c.name + "' is numeric; discretize first");
    }
    vars.push_back(Variable{c.name, c.states});
  }
  std::vector<Assignment> rows(t.num_rows, Assignment(t.columns.size()));
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    const auto& c = t.columns[i];
    std::map<std::string, StateId> index;
    for (std::size_t k = 0; k < c.states.size(); ++k) index.emplace(c.states[k], static_cast<StateId>(k));
    for (std::size_t r = 0; r < t.num_rows; ++r) {
      auto it = index.find(c.raw[r]);
      if (it == index.end()) throw InputError("unknown value '" + c.raw[r] + "' in column '" + c.name + "'");
      rows[r][i] = it->second;
    }
  }
  return Dataset(std::move(vars), std::move(rows));
}

}  // namespace bkbforge
