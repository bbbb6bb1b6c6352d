#pragma once

// MDL scoring: BKB and BN model-encoding lengths, data-encoding lengths
// from per-world model probabilities, the BN-to-BKB conversion cost, and
// cross-entropy restricted to the data worlds.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bkbforge/core.hpp"
#include "bkbforge/daglearn.hpp"
#include "bkbforge/error.hpp"

namespace bkbforge {

inline constexpr double kDefaultDelta = 32.0;

enum class BnVariant { kLamBacchus, kSuzuki };

inline std::string to_string(BnVariant v) { return v == BnVariant::kSuzuki ? "suzuki" : "lam-bacchus"; }

inline BnVariant parse_bn_variant(const std::string& s) {
  if (s == "lam-bacchus") return BnVariant::kLamBacchus;
  if (s == "suzuki") return BnVariant::kSuzuki;
  throw InputError("unknown MDL variant '" + s + "' (expected lam-bacchus or suzuki)");
}

struct MdlBreakdown {
  double model_bits = 0.0;
  double data_bits = 0.0;
  double delta = kDefaultDelta;
  double log2_m = 0.0;  // m itself overflows quickly
  std::size_t n = 0;
  std::string variant = "bkb";

  double total() const { return model_bits + data_bits; }
  // Table convention: N * sum p log2 q, i.e. the negated encoding length.
  double data_mdl_signed() const { return data_bits == 0.0 ? 0.0 : -data_bits; }
};

inline double bkb_model_bits(const Bkb& bkb, double log2_m, double delta = kDefaultDelta) {
  double total = 0.0;
  for (const auto& q : bkb.snodes()) total += static_cast<double>(q.parents.size() + 1) * log2_m + delta;
  return total;
}

inline std::string describe_world(const std::vector<Variable>& vars, const Assignment& world) {
  std::string out = "{";
  for (std::size_t i = 0; i < world.size() && i < vars.size(); ++i) {
    if (i) out += ", ";
    out += vars[i].name + "=" + vars[i].states.at(world[i]);
  }
  return out + "}";
}

// -sum over unique worlds of multiplicity * log2 q. A zero q makes the data
// unencodable; the error names the first such world.
inline double data_bits(std::span<const World> worlds, std::span<const double> q,
                        const std::vector<Variable>& vars) {
  if (worlds.size() != q.size()) throw InputError("one model probability per world is required");
  double total = 0.0;
  for (std::size_t t = 0; t < worlds.size(); ++t) {
    if (!(q[t] > 0.0)) {
      throw CannotEncodeError("model assigns probability 0 to data world " + describe_world(vars, worlds[t].assignment));
    }
    total -= static_cast<double>(worlds[t].multiplicity) * std::log2(std::min(1.0, q[t]));
  }
  return total;
}

inline std::size_t total_multiplicity(std::span<const World> worlds) {
  std::size_t n = 0;
  for (const auto& w : worlds) n += w.multiplicity;
  return n;
}

// Entropy of the empirical distribution over unique worlds, in bits.
inline double empirical_world_entropy(std::span<const World> worlds) {
  const double n = static_cast<double>(total_multiplicity(worlds));
  double h = 0.0;
  for (const auto& w : worlds) {
    const double p = static_cast<double>(w.multiplicity) / n;
    h -= p * std::log2(p);
  }
  return h;
}

// C_D = sum over data worlds of p (log2 p - log2 q).
inline double cross_entropy_cd(std::span<const World> worlds, std::span<const double> q,
                               const std::vector<Variable>& vars) {
  if (worlds.size() != q.size()) throw InputError("one model probability per world is required");
  const double n = static_cast<double>(total_multiplicity(worlds));
  double c = 0.0;
  for (std::size_t t = 0; t < worlds.size(); ++t) {
    if (!(q[t] > 0.0)) {
      throw CannotEncodeError("model assigns probability 0 to data world " + describe_world(vars, worlds[t].assignment));
    }
    const double p = static_cast<double>(worlds[t].multiplicity) / n;
    c += p * (std::log2(p) - std::log2(q[t]));
  }
  return c;
}

// Number of parent configurations c_i = prod of parent arities.
inline double parent_configurations(VarMask parents, std::span<const std::size_t> arities) {
  double c = 1.0;
  for (VarId j : mask_to_vars(parents)) c *= static_cast<double>(arities[j]);
  return c;
}

// BN model bits. Lam-Bacchus: sum k_i log2 n + delta (r_i - 1) c_i.
// Suzuki: (K(G) / 2) log2 N with K(G) = sum (r_i - 1) c_i.
inline double bn_model_bits(std::span<const VarMask> parents, std::span<const std::size_t> arities,
                            std::size_t num_rows, BnVariant variant, double delta = kDefaultDelta) {
  const double n = static_cast<double>(parents.size());
  double total = 0.0;
  double free_params = 0.0;
  for (std::size_t i = 0; i < parents.size(); ++i) {
    const double c = parent_configurations(parents[i], arities);
    const double k = static_cast<double>(std::popcount(parents[i]));
    free_params += (static_cast<double>(arities[i]) - 1.0) * c;
    total += k * (n > 1 ? std::log2(n) : 0.0) + delta * (static_cast<double>(arities[i]) - 1.0) * c;
  }
  if (variant == BnVariant::kSuzuki) return free_params / 2.0 * std::log2(static_cast<double>(num_rows));
  return total;
}

struct ConversionCost {
  double exact = 0.0;
  double bound = 0.0;
};

// Cost of converting a BN into a complete BKB: sum over variables of
// K log2(m^R / n) + (2 - r_i) delta R, with K = |parents|, R = parent
// configurations; the bound replaces m by r_max^n.
inline ConversionCost bkb_conversion_cost(std::span<const VarMask> parents, std::span<const std::size_t> arities,
                                          double delta = kDefaultDelta) {
  const std::size_t n = parents.size();
  double log2_m = 0.0;
  std::size_t r_max = 1;
  for (auto r : arities) {
    log2_m += std::log2(static_cast<double>(r));
    r_max = std::max(r_max, r);
  }
  const double log2_n = n > 0 ? std::log2(static_cast<double>(n)) : 0.0;
  ConversionCost cost;
  for (std::size_t i = 0; i < n; ++i) {
    const double k = static_cast<double>(std::popcount(parents[i]));
    const double r = parent_configurations(parents[i], arities);
    const double tail = (2.0 - static_cast<double>(arities[i])) * delta * r;
    cost.exact += k * (r * log2_m - log2_n) + tail;
    cost.bound += k * (r * static_cast<double>(n) * std::log2(static_cast<double>(r_max)) - log2_n) + tail;
  }
  return cost;
}

}  // namespace bkbforge
