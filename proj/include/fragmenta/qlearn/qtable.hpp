#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace fragmenta::qlearn {

/// Connection between site `site_a` of fragment `a` and site `site_b` of `b`.
/// Stored normalized: smaller fragment key first, ties by site index.
struct ConnectionKey {
  std::string a;
  int site_a = 0;
  std::string b;
  int site_b = 0;

  static ConnectionKey make(std::string a, int site_a, std::string b, int site_b);
  ConnectionKey swapped() const { return {b, site_b, a, site_a}; }
  bool is_normalized() const;
  ConnectionKey normalized() const { return make(a, site_a, b, site_b); }

  auto operator<=>(const ConnectionKey&) const = default;
  bool operator==(const ConnectionKey&) const = default;
};

struct QEntry {
  double q = 0.0;
  std::uint64_t visits = 0;
  bool operator==(const QEntry&) const = default;
};

struct QParams {
  double epsilon = 0.1;
  double alpha = 0.1;
  // Ablation: q += r instead of the exponential moving average.
  bool raw_sum = false;
  bool operator==(const QParams&) const = default;
};

class FormatVersionMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kQTableFormatVersion = 1;

/// Connection scores. Value type: copies are independent snapshots.
class QTable {
 public:
  QTable() = default;
  explicit QTable(QParams params) : params_(params) {}

  const QParams& params() const noexcept { return params_; }
  double epsilon() const noexcept { return params_.epsilon; }

  /// Registers a fragment and its site count. Returns true when new.
  bool insert_fragment(const std::string& key, int site_count);
  bool knows_fragment(const std::string& key) const { return fragments_.contains(key); }
  const std::map<std::string, int>& fragments() const noexcept { return fragments_; }

  std::optional<QEntry> find(const ConnectionKey& key) const;
  /// q of the entry, or epsilon when it has not materialized.
  double value(const ConnectionKey& key) const;

  /// q <- q + alpha (r - q) (or q + r in raw-sum mode); visits += 1. Rewards
  /// are clamped to [0, 1]. Materializes the entry at epsilon when absent.
  double update(const ConnectionKey& key, double reward);

  std::size_t size() const noexcept { return entries_.size(); }
  const std::map<ConnectionKey, QEntry>& entries() const noexcept { return entries_; }

  /// Materialized entries touching (fragment, site), in key order.
  std::vector<std::pair<ConnectionKey, QEntry>> entries_at(const std::string& fragment, int site) const;
  /// Materialized entries touching the fragment at any site, in key order.
  std::vector<std::pair<ConnectionKey, QEntry>> entries_of(const std::string& fragment) const;

  /// Drops entries with visits >= min_visits and q < q_min. Returns the count.
  std::size_t prune(std::uint64_t min_visits, double q_min);

  nlohmann::json to_json() const;
  static QTable from_json(const nlohmann::json& j);
  void persist(const std::string& path) const;
  static QTable restore(const std::string& path);

  bool operator==(const QTable& other) const {
    return params_ == other.params_ && entries_ == other.entries_ && fragments_ == other.fragments_;
  }

 private:
  QParams params_;
  std::map<ConnectionKey, QEntry> entries_;
  std::map<std::string, int> fragments_;
  // (fragment, site) -> keys touching it; rebuilt from entries_ on restore.
  std::map<std::pair<std::string, int>, std::set<ConnectionKey>> by_site_;

  void index(const ConnectionKey& key);
};

}  // namespace fragmenta::qlearn
