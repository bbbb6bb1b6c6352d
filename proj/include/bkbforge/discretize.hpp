#pragma once

// Supervised entropy-MDL discretization (Fayyad & Irani): recursive binary
// cuts maximizing information gain about the target, accepted while the
// gain beats the MDL cost; at least one cut is forced per non-constant
// column.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "bkbforge/core.hpp"
#include "bkbforge/ingest.hpp"

namespace bkbforge {

struct CutSearch {
  bool found = false;
  double cut = 0.0;
  std::size_t split = 0;  // first position of the right part
  double gain = 0.0;
  bool accepted = false;
};

namespace detail {

inline double class_entropy(const std::vector<std::size_t>& counts, std::size_t total) {
  if (total == 0) return 0.0;
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

inline std::size_t distinct_classes(const std::vector<std::size_t>& counts) {
  return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }));
}

}  // namespace detail

// Best cut for sorted (value, label) pairs in [lo, hi) and whether the MDL
// criterion accepts it. Ties keep the smallest cut.
inline CutSearch best_cut(const std::vector<double>& values, const std::vector<StateId>& labels, std::size_t classes,
                          std::size_t lo, std::size_t hi) {
  CutSearch out;
  const std::size_t n = hi - lo;
  if (n < 2) return out;
  std::vector<std::size_t> total(classes, 0), left(classes, 0);
  for (std::size_t i = lo; i < hi; ++i) ++total[labels[i]];
  const double h = detail::class_entropy(total, n);
  double best_weighted = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_left;
  for (std::size_t i = lo + 1; i < hi; ++i) {
    ++left[labels[i - 1]];
    if (!(values[i - 1] < values[i])) continue;
    std::vector<std::size_t> right(classes);
    for (std::size_t c = 0; c < classes; ++c) right[c] = total[c] - left[c];
    const std::size_t nl = i - lo, nr = hi - i;
    const double weighted = (static_cast<double>(nl) * detail::class_entropy(left, nl) +
                             static_cast<double>(nr) * detail::class_entropy(right, nr)) /
                            static_cast<double>(n);
    if (weighted < best_weighted - 1e-12) {
      best_weighted = weighted;
      out.found = true;
      out.split = i;
      out.cut = (values[i - 1] + values[i]) / 2.0;
      best_left = left;
    }
  }
  if (!out.found) return out;
  std::vector<std::size_t> right(classes);
  for (std::size_t c = 0; c < classes; ++c) right[c] = total[c] - best_left[c];
  const std::size_t nl = out.split - lo, nr = hi - out.split;
  const double h1 = detail::class_entropy(best_left, nl), h2 = detail::class_entropy(right, nr);
  out.gain = h - best_weighted;
  const double k = static_cast<double>(detail::distinct_classes(total));
  const double k1 = static_cast<double>(detail::distinct_classes(best_left));
  const double k2 = static_cast<double>(detail::distinct_classes(right));
  const double delta = std::log2(std::pow(3.0, k) - 2.0) - (k * h - k1 * h1 - k2 * h2);
  const double threshold = (std::log2(static_cast<double>(n) - 1.0) + delta) / static_cast<double>(n);
  out.accepted = out.gain > threshold;
  return out;
}

namespace detail {

inline void split_recursive(const std::vector<double>& values, const std::vector<StateId>& labels,
                            std::size_t classes, std::size_t lo, std::size_t hi, std::vector<double>& cuts) {
  const auto c = best_cut(values, labels, classes, lo, hi);
  if (!c.found || !c.accepted) return;
  split_recursive(values, labels, classes, lo, c.split, cuts);
  cuts.push_back(c.cut);
  split_recursive(values, labels, classes, c.split, hi, cuts);
}

}  // namespace detail

// Cut points for one numeric column; empty only for constant columns.
inline std::vector<double> entropy_mdl_cuts(std::span<const double> column, std::span<const StateId> target,
                                            std::size_t classes) {
  std::vector<std::size_t> order(column.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return column[a] < column[b]; });
  std::vector<double> values;
  std::vector<StateId> labels;
  for (auto i : order) {
    values.push_back(column[i]);
    labels.push_back(target[i]);
  }
  std::vector<double> cuts;
  detail::split_recursive(values, labels, classes, 0, values.size(), cuts);
  if (cuts.empty()) {
    const auto forced = best_cut(values, labels, classes, 0, values.size());
    if (forced.found) cuts.push_back(forced.cut);
  }
  return cuts;
}

// Bin of a value: the number of cuts strictly below it.
inline StateId bin_of(double value, const std::vector<double>& cuts) {
  return static_cast<StateId>(std::lower_bound(cuts.begin(), cuts.end(), value) - cuts.begin());
}

inline std::string format_number(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::vector<std::string> bin_labels(const std::vector<double>& cuts) {
  if (cuts.empty()) return {"all"};
  std::vector<std::string> out;
  out.push_back("<=" + format_number(cuts.front()));
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    out.push_back("(" + format_number(cuts[i - 1]) + "," + format_number(cuts[i]) + "]");
  }
  out.push_back(">" + format_number(cuts.back()));
  return out;
}

struct Discretization {
  Dataset dataset;
  std::map<std::string, std::vector<double>> cuts;  // per originally numeric column
  std::vector<std::string> warnings;
};

inline Discretization discretize_entropy_mdl(const Table& table, std::size_t target) {
  if (target >= table.columns.size()) throw InputError("target column out of range");
  const auto& tc = table.columns[target];
  if (tc.kind != ColumnKind::kCategorical) throw InputError("target column '" + tc.name + "' must be categorical");
  std::vector<StateId> labels(table.num_rows);
  for (std::size_t r = 0; r < table.num_rows; ++r) {
    labels[r] = static_cast<StateId>(std::find(tc.states.begin(), tc.states.end(), tc.raw[r]) - tc.states.begin());
  }
  Discretization out;
  Table converted = table;
  for (auto& c : converted.columns) {
    if (c.kind != ColumnKind::kNumeric) continue;
    auto cuts = entropy_mdl_cuts(c.values, labels, tc.states.size());
    if (cuts.empty()) out.warnings.push_back("column '" + c.name + "' is constant; kept as a single bin");
    c.states = bin_labels(cuts);
    for (std::size_t r = 0; r < c.values.size(); ++r) c.raw[r] = c.states[bin_of(c.values[r], cuts)];
    c.kind = ColumnKind::kCategorical;
    out.cuts.emplace(c.name, std::move(cuts));
  }
  out.dataset = to_dataset(converted);
  return out;
}

}  // namespace bkbforge
