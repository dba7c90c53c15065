#include "fragmenta/qlearn/qtable.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace fragmenta::qlearn {

using nlohmann::json;

ConnectionKey ConnectionKey::make(std::string a, int site_a, std::string b, int site_b) {
  if (std::tie(b, site_b) < std::tie(a, site_a)) return {std::move(b), site_b, std::move(a), site_a};
  return {std::move(a), site_a, std::move(b), site_b};
}

bool ConnectionKey::is_normalized() const { return std::tie(a, site_a) <= std::tie(b, site_b); }

bool QTable::insert_fragment(const std::string& key, int site_count) {
  return fragments_.emplace(key, site_count).second;
}

std::optional<QEntry> QTable::find(const ConnectionKey& key) const {
  auto it = entries_.find(key.normalized());
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

double QTable::value(const ConnectionKey& key) const {
  auto e = find(key);
  return e ? e->q : params_.epsilon;
}

void QTable::index(const ConnectionKey& key) {
  by_site_[{key.a, key.site_a}].insert(key);
  by_site_[{key.b, key.site_b}].insert(key);
}

double QTable::update(const ConnectionKey& raw, double reward) {
  if (!std::isfinite(reward)) throw std::invalid_argument("Q update with non-finite reward");
  const double r = std::clamp(reward, 0.0, 1.0);
  const ConnectionKey key = raw.normalized();
  auto [it, inserted] = entries_.try_emplace(key, QEntry{params_.epsilon, 0});
  if (inserted) index(key);
  QEntry& e = it->second;
  if (params_.raw_sum) {
    e.q += r;
  } else {
    e.q += params_.alpha * (r - e.q);
  }
  ++e.visits;
  return e.q;
}

std::vector<std::pair<ConnectionKey, QEntry>> QTable::entries_at(const std::string& fragment, int site) const {
  std::vector<std::pair<ConnectionKey, QEntry>> out;
  auto it = by_site_.find({fragment, site});
  if (it == by_site_.end()) return out;
  for (const auto& key : it->second) out.emplace_back(key, entries_.at(key));
  return out;
}

std::vector<std::pair<ConnectionKey, QEntry>> QTable::entries_of(const std::string& fragment) const {
  std::set<ConnectionKey> keys;
  for (auto it = by_site_.lower_bound({fragment, std::numeric_limits<int>::min()});
       it != by_site_.end() && it->first.first == fragment; ++it)
    keys.insert(it->second.begin(), it->second.end());
  std::vector<std::pair<ConnectionKey, QEntry>> out;
  for (const auto& key : keys) out.emplace_back(key, entries_.at(key));
  return out;
}

std::size_t QTable::prune(std::uint64_t min_visits, double q_min) {
  std::size_t removed = 0;
  for (auto it = entries_.begin(); it != entries_.end();) {
    if (it->second.visits >= min_visits && it->second.q < q_min) {
      it = entries_.erase(it);
      ++removed;
    } else {
      ++it;
    }
  }
  if (removed > 0) {
    by_site_.clear();
    for (const auto& [key, e] : entries_) index(key);
  }
  return removed;
}

json QTable::to_json() const {
  json entries = json::array();
  for (const auto& [k, e] : entries_)
    entries.push_back({{"a", k.a}, {"site_a", k.site_a}, {"b", k.b}, {"site_b", k.site_b}, {"q", e.q}, {"visits", e.visits}});
  json fragments = json::array();
  for (const auto& [key, sites] : fragments_) fragments.push_back({{"key", key}, {"sites", sites}});
  return {{"version", kQTableFormatVersion},
          {"epsilon", params_.epsilon},
          {"alpha", params_.alpha},
          {"mode", params_.raw_sum ? "raw_sum" : "ema"},
          {"entries", std::move(entries)},
          {"fragments", std::move(fragments)}};
}

QTable QTable::from_json(const json& j) {
  if (!j.is_object() || !j.contains("version")) throw FormatVersionMismatch("Q-table document has no version field");
  if (j.at("version").get<int>() != kQTableFormatVersion)
    throw FormatVersionMismatch("Q-table format version " + j.at("version").dump() + ", expected " +
                                std::to_string(kQTableFormatVersion));
  QParams params;
  params.epsilon = j.at("epsilon").get<double>();
  params.alpha = j.at("alpha").get<double>();
  params.raw_sum = j.value("mode", std::string("ema")) == "raw_sum";
  QTable table(params);
  for (const auto& e : j.at("entries")) {
    const ConnectionKey key = ConnectionKey::make(e.at("a").get<std::string>(), e.at("site_a").get<int>(),
                                                  e.at("b").get<std::string>(), e.at("site_b").get<int>());
    table.entries_[key] = QEntry{e.at("q").get<double>(), e.at("visits").get<std::uint64_t>()};
    table.index(key);
  }
  if (j.contains("fragments"))
    for (const auto& f : j.at("fragments")) table.fragments_[f.at("key").get<std::string>()] = f.at("sites").get<int>();
  return table;
}

void QTable::persist(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write Q-table to " + path);
  out << to_json().dump(1) << '\n';
  if (!out) throw IoError("failed writing Q-table to " + path);
}

QTable QTable::restore(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read Q-table from " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("malformed Q-table " + path + ": " + e.what());
  }
  return from_json(j);
}

}  // namespace fragmenta::qlearn
