// Candidate interference patterns: the binary activity matrix A (I x B).
#pragma once

#include "hetnet/scenario.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace hetnet {

struct StrategyList;

/// Immutable set of distinct ON/OFF rows.  Row i, column b is a_ib.
class PatternSet {
 public:
  PatternSet() = default;

  /// Appends rows from `rows` (each of length B), skipping duplicates.
  PatternSet(std::size_t num_bs, const std::vector<std::vector<std::uint8_t>>& rows, const std::string& label)
      : num_bs_(num_bs) {
    for (const auto& r : rows) add(r, label);
    require_nonempty();
  }

  std::size_t num_patterns() const { return labels_.size(); }
  std::size_t num_bs() const { return num_bs_; }

  bool active(std::size_t i, std::size_t b) const { return bits_[i * num_bs_ + b] != 0; }
  const std::string& label(std::size_t i) const { return labels_[i]; }

  std::vector<std::uint8_t> row(std::size_t i) const {
    return {bits_.begin() + static_cast<std::ptrdiff_t>(i * num_bs_),
            bits_.begin() + static_cast<std::ptrdiff_t>((i + 1) * num_bs_)};
  }

  std::string row_string(std::size_t i) const {
    std::string s(num_bs_, '0');
    for (std::size_t b = 0; b < num_bs_; ++b)
      if (active(i, b)) s[b] = '1';
    return s;
  }

  std::size_t active_count(std::size_t i) const {
    std::size_t c = 0;
    for (std::size_t b = 0; b < num_bs_; ++b) c += active(i, b);
    return c;
  }

  bool contains(const std::vector<std::uint8_t>& r) const { return index_.count(key(r)) != 0; }

  /// Union preserving the order of `*this` followed by new rows of `other`.
  PatternSet merged(const PatternSet& other) const {
    if (other.num_bs_ != num_bs_) throw std::invalid_argument("PatternSet::merged: BS count mismatch");
    PatternSet out = *this;
    for (std::size_t i = 0; i < other.num_patterns(); ++i) out.add(other.row(i), other.label(i));
    return out;
  }

  /// Rows that switch on only BSs flagged in `allowed`.
  PatternSet restricted_to(const std::vector<bool>& allowed) const {
    PatternSet out;
    out.num_bs_ = num_bs_;
    for (std::size_t i = 0; i < num_patterns(); ++i) {
      bool ok = true;
      for (std::size_t b = 0; b < num_bs_ && ok; ++b) ok = !active(i, b) || allowed[b];
      if (ok) out.add(row(i), label(i));
    }
    return out;
  }

  /// JSON array of bit strings, BS order as in the scenario.
  nlohmann::json to_json() const {
    nlohmann::json a = nlohmann::json::array();
    for (std::size_t i = 0; i < num_patterns(); ++i) a.push_back(row_string(i));
    return a;
  }

  static PatternSet from_json(const nlohmann::json& a) {
    if (!a.is_array() || a.empty()) throw config_error("patterns", "expected a non-empty array of bit strings");
    PatternSet out;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string f = "patterns[" + std::to_string(i) + "]";
      if (!a[i].is_string()) throw config_error(f, "expected a bit string");
      const std::string s = a[i].get<std::string>();
      if (i == 0) out.num_bs_ = s.size();
      if (s.size() != out.num_bs_ || s.empty()) throw config_error(f, "inconsistent length");
      std::vector<std::uint8_t> r(s.size());
      for (std::size_t b = 0; b < s.size(); ++b) {
        if (s[b] != '0' && s[b] != '1') throw config_error(f, "only '0' and '1' allowed");
        r[b] = s[b] == '1';
      }
      out.add(r, "loaded");
    }
    return out;
  }

  std::uint64_t hash() const {
    std::uint64_t h = fnv1a(std::to_string(num_bs_));
    for (std::size_t i = 0; i < num_patterns(); ++i) h = fnv1a(row_string(i), h);
    return h;
  }

  void require_nonempty() const {
    if (labels_.empty()) throw std::invalid_argument("PatternSet: at least one pattern required");
  }

 private:
  friend PatternSet enumerate_all(std::size_t, std::size_t);
  friend PatternSet reuse1(std::size_t);
  friend PatternSet preselect(const Scenario&, const StrategyList&);

  static std::string key(const std::vector<std::uint8_t>& r) {
    std::string s(r.size(), '0');
    for (std::size_t b = 0; b < r.size(); ++b)
      if (r[b]) s[b] = '1';
    return s;
  }

  void add(const std::vector<std::uint8_t>& r, const std::string& label) {
    if (r.size() != num_bs_) throw std::invalid_argument("PatternSet: row length mismatch");
    if (!index_.insert(key(r)).second) return;
    for (std::uint8_t v : r) bits_.push_back(v ? 1 : 0);
    labels_.push_back(label);
  }

  std::size_t num_bs_ = 0;
  std::vector<std::uint8_t> bits_;
  std::vector<std::string> labels_;
  std::unordered_set<std::string> index_;
};

inline constexpr std::size_t kDefaultEnumerationCap = 20;

/// All 2^B rows in binary counting order (bit b of the row index is a_ib),
/// including the all-off row.
inline PatternSet enumerate_all(std::size_t num_bs, std::size_t cap = kDefaultEnumerationCap) {
  if (num_bs == 0) throw std::invalid_argument("enumerate_all: B must be at least 1");
  if (num_bs > cap)
    throw std::invalid_argument("enumerate_all: B = " + std::to_string(num_bs) + " exceeds the cap of " +
                                std::to_string(cap) + "; use preselect() instead");
  PatternSet out;
  out.num_bs_ = num_bs;
  const std::size_t count = std::size_t{1} << num_bs;
  std::vector<std::uint8_t> r(num_bs);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t b = 0; b < num_bs; ++b) r[b] = (i >> b) & 1U;
    out.add(r, "enumerated");
  }
  return out;
}

/// The single all-ON pattern.
inline PatternSet reuse1(std::size_t num_bs) {
  if (num_bs == 0) throw std::invalid_argument("reuse1: B must be at least 1");
  PatternSet out;
  out.num_bs_ = num_bs;
  out.add(std::vector<std::uint8_t>(num_bs, 1), "reuse1");
  return out;
}

enum class Strategy { all_on, leave_one_out, macros_only, single_bs, macro_plus_local_picos, random };

struct StrategySpec {
  Strategy kind;
  std::size_t count = 0;   // random only
  std::uint64_t seed = 0;  // random only
};

struct StrategyList {
  std::vector<StrategySpec> items;
};

/// Parses "all_on,leave_one_out,random:64:7" (random:<count>[:<seed>]).
inline StrategyList parse_strategies(std::string_view text) {
  StrategyList out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string tok(text.substr(pos, comma - pos));
    pos = comma + 1;
    if (tok.empty()) {
      if (comma >= text.size()) break;
      continue;
    }
    if (tok == "all_on") out.items.push_back({Strategy::all_on});
    else if (tok == "leave_one_out") out.items.push_back({Strategy::leave_one_out});
    else if (tok == "macros_only") out.items.push_back({Strategy::macros_only});
    else if (tok == "single_bs") out.items.push_back({Strategy::single_bs});
    else if (tok == "macro_plus_local_picos") out.items.push_back({Strategy::macro_plus_local_picos});
    else if (tok.rfind("random:", 0) == 0) {
      StrategySpec s{Strategy::random};
      const std::string rest = tok.substr(7);
      const std::size_t colon = rest.find(':');
      try {
        s.count = std::stoull(rest.substr(0, colon));
        if (colon != std::string::npos) s.seed = std::stoull(rest.substr(colon + 1));
      } catch (const std::exception&) {
        throw config_error("patterns", "malformed random strategy '" + tok + "'");
      }
      out.items.push_back(s);
    } else {
      throw config_error("patterns", "unknown strategy '" + tok + "'");
    }
    if (comma >= text.size()) break;
  }
  return out;
}

/// Union of the requested families, deduplicated, always starting with
/// the all-ON row.  `random(n, seed)` adds n new nonzero rows with i.i.d.
/// fair bits; for a fixed seed and preceding families the result for n is
/// a prefix of the result for any larger n.
inline PatternSet preselect(const Scenario& sc, const StrategyList& strategies) {
  const std::size_t num_bs = sc.num_bs();
  if (num_bs == 0) throw std::invalid_argument("preselect: empty scenario");
  PatternSet out;
  out.num_bs_ = num_bs;
  out.add(std::vector<std::uint8_t>(num_bs, 1), "all_on");
  std::vector<std::uint8_t> r(num_bs);
  for (const StrategySpec& s : strategies.items) {
    switch (s.kind) {
      case Strategy::all_on: break;
      case Strategy::leave_one_out:
        for (std::size_t b = 0; b < num_bs; ++b) {
          std::fill(r.begin(), r.end(), 1);
          r[b] = 0;
          out.add(r, "leave_one_out");
        }
        break;
      case Strategy::macros_only:
        for (std::size_t b = 0; b < num_bs; ++b) r[b] = sc.bss[b].kind == BsKind::macro;
        out.add(r, "macros_only");
        break;
      case Strategy::single_bs:
        for (std::size_t b = 0; b < num_bs; ++b) {
          std::fill(r.begin(), r.end(), 0);
          r[b] = 1;
          out.add(r, "single_bs");
        }
        break;
      case Strategy::macro_plus_local_picos: {
        std::vector<std::size_t> macros;
        for (std::size_t b = 0; b < num_bs; ++b)
          if (sc.bss[b].kind == BsKind::macro) macros.push_back(b);
        for (std::size_t m : macros) {
          for (std::size_t b = 0; b < num_bs; ++b) {
            if (sc.bss[b].kind == BsKind::macro) { r[b] = b == m; continue; }
            std::size_t nearest = macros.front();
            for (std::size_t c : macros)
              if (distance(sc.bss[b].position, sc.bss[c].position) <
                  distance(sc.bss[b].position, sc.bss[nearest].position))
                nearest = c;
            r[b] = nearest == m;
          }
          out.add(r, "macro_plus_local_picos");
        }
        break;
      }
      case Strategy::random: {
        const double space = num_bs >= 63 ? 9.2e18 : static_cast<double>((std::uint64_t{1} << num_bs) - 1);
        if (static_cast<double>(s.count + out.num_patterns()) > space + 1.0)
          throw config_error("patterns", "random:" + std::to_string(s.count) + " exceeds the number of unused patterns");
        std::mt19937_64 rng(detail::mix_seed(s.seed, 0x7061747465726eULL));
        std::size_t added = 0;
        while (added < s.count) {
          bool any = false;
          for (std::size_t b = 0; b < num_bs; ++b) {
            r[b] = static_cast<std::uint8_t>(rng() & 1U);
            any = any || r[b];
          }
          if (!any || out.contains(r)) continue;
          out.add(r, "random");
          ++added;
        }
        break;
      }
    }
  }
  return out;
}

}  // namespace hetnet
