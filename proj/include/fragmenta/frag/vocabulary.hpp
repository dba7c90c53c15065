#pragma once

#include <map>
#include <ostream>
#include <span>
#include <string>

#include "fragmenta/frag/fragment.hpp"
#include "json.hpp"

namespace fragmenta::frag {

/// Fragments keyed by canonical key, with occurrence counts.
class Vocabulary {
 public:
  struct Entry {
    Fragment fragment;
    std::size_t count = 0;
  };

  /// Returns true when the key was new.
  bool add(const Fragment& f, std::size_t occurrences = 1);
  void add(const Decomposition& d);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  bool contains(const std::string& key) const { return entries_.contains(key); }
  const Entry& at(const std::string& key) const { return entries_.at(key); }
  const std::map<std::string, Entry>& entries() const noexcept { return entries_; }

  /// "key<TAB>count" per line, sorted by key.
  void dump(std::ostream& out) const;

  /// {key: count}. Fragments are rebuilt from their keys on load.
  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);

 private:
  std::map<std::string, Entry> entries_;
};

Vocabulary fragment_vocabulary(std::span<const Decomposition> decompositions);

}  // namespace fragmenta::frag
