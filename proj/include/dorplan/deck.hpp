#pragma once

// Deck-of-cards scoring: an ordered layout of equivalence classes separated
// by blank cards becomes an integer score per item, anchored at a zero level.

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "dorplan/model.hpp"

namespace dorplan {

/// Classes run worst -> best. blanks[s] separates classes s and s+1;
/// zero_gap separates the zero level from the first class.
struct CardRanking {
  std::vector<std::vector<std::string>> classes;
  std::vector<long long> blanks;
  long long zero_gap = 0;

  void validate() const {
    std::vector<std::string> d;
    if (classes.empty()) d.push_back("classes: ranking has no classes");
    if (!classes.empty() && blanks.size() + 1 != classes.size())
      d.push_back("blanks: expected " + std::to_string(classes.size() - 1) + " entries, got " +
                  std::to_string(blanks.size()));
    if (zero_gap < 0) d.push_back("zero_gap: must be >= 0");
    for (auto b : blanks)
      if (b < 0) d.push_back("blanks: counts must be >= 0");
    std::set<std::string> seen;
    for (std::size_t s = 0; s < classes.size(); ++s) {
      if (classes[s].empty()) d.push_back("classes[" + std::to_string(s) + "]: empty class");
      for (const auto& id : classes[s])
        if (!seen.insert(id).second) d.push_back("classes: duplicate item " + id);
    }
    if (!d.empty()) throw InputError("invalid card ranking", std::move(d));
  }

  std::vector<std::string> items() const {
    std::vector<std::string> out;
    for (const auto& c : classes) out.insert(out.end(), c.begin(), c.end());
    return out;
  }
};

struct ScoreEntry {
  std::string item;
  long long score = 0;
  std::size_t rank_class = 0;
};

struct ScoreTable {
  std::vector<ScoreEntry> entries;  // ordered worst -> best

  const ScoreEntry* find(const std::string& item) const {
    for (const auto& e : entries)
      if (e.item == item) return &e;
    return nullptr;
  }
  long long at(const std::string& item) const {
    if (const auto* e = find(item)) return e->score;
    throw std::out_of_range("no score for item " + item);
  }
  friend bool operator==(const ScoreTable& a, const ScoreTable& b) {
    if (a.entries.size() != b.entries.size()) return false;
    for (std::size_t i = 0; i < a.entries.size(); ++i)
      if (a.entries[i].item != b.entries[i].item || a.entries[i].score != b.entries[i].score ||
          a.entries[i].rank_class != b.entries[i].rank_class)
        return false;
    return true;
  }
};

// v_s = v_{s-1} + e_{s-1} + 1 with v_0 = 0 at the zero level.
inline ScoreTable score(const CardRanking& ranking) {
  ranking.validate();
  ScoreTable t;
  long long v = 0;
  for (std::size_t s = 0; s < ranking.classes.size(); ++s) {
    const long long gap = s == 0 ? ranking.zero_gap : ranking.blanks[s - 1];
    v += gap + 1;
    for (const auto& id : ranking.classes[s]) t.entries.push_back({id, v, s});
  }
  return t;
}

/// Stacks `upper` on top of `lower` with `bridge_cards` blanks between
/// lower's best class and upper's worst class. Upper's zero level is dropped.
inline CardRanking merge(const CardRanking& lower, const CardRanking& upper, long long bridge_cards) {
  lower.validate();
  upper.validate();
  if (bridge_cards < 0) throw InputError("invalid merge", {"bridge: must be >= 0"});
  std::set<std::string> ids;
  for (const auto& id : lower.items()) ids.insert(id);
  std::vector<std::string> overlap;
  for (const auto& id : upper.items())
    if (ids.count(id)) overlap.push_back("overlapping item " + id);
  if (!overlap.empty()) throw InputError("rankings to merge share items", std::move(overlap));

  CardRanking out = lower;
  out.classes.insert(out.classes.end(), upper.classes.begin(), upper.classes.end());
  out.blanks.push_back(bridge_cards);
  out.blanks.insert(out.blanks.end(), upper.blanks.begin(), upper.blanks.end());
  return out;
}

}  // namespace dorplan
