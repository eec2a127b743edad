#include "corrbridge/data/join.hpp"

#include <set>
#include <unordered_map>

namespace corrbridge {

PivotJoin join_on_pivot(const std::vector<TextPair>& a, const std::vector<TextPair>& b) {
  std::unordered_map<std::string, std::vector<const TextPair*>> by_key;
  for (const auto& p : b) by_key[p.source].push_back(&p);

  PivotJoin result;
  std::set<std::string> matched;
  std::set<std::string> missing_a;
  for (const auto& p : a) {
    auto it = by_key.find(p.source);
    if (it == by_key.end()) {
      missing_a.insert(p.source);
      continue;
    }
    matched.insert(p.source);
    for (const TextPair* q : it->second) result.pairs.push_back(TextPair{p.target, q->target, p.line});
  }
  if (result.pairs.empty()) throw DataError("join_on_pivot: the two files share no pivot keys");
  result.unmatched_a = missing_a.size();
  result.unmatched_b = by_key.size() - matched.size();
  return result;
}

}  // namespace corrbridge
