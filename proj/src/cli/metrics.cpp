#include "corrbridge/cli/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#include "corrbridge/data/text.hpp"

namespace corrbridge {

double compute_accuracy(const std::vector<std::string>& hypotheses,
                        const std::vector<std::vector<std::string>>& references) {
  if (hypotheses.size() != references.size()) {
    throw std::invalid_argument("compute_accuracy: " + std::to_string(hypotheses.size()) + " hypotheses vs " +
                                std::to_string(references.size()) + " references");
  }
  if (hypotheses.empty()) throw std::invalid_argument("compute_accuracy: no examples");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    auto hyp = nfc_normalize(hypotheses[i]);
    bool match = std::any_of(references[i].begin(), references[i].end(),
                             [&](const std::string& ref) { return nfc_normalize(ref) == hyp; });
    if (match) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(hypotheses.size());
}

std::vector<std::vector<std::string>> group_references(const std::vector<TextPair>& pairs) {
  std::map<std::string, std::vector<std::string>> by_source;
  for (const auto& p : pairs) by_source[p.source].push_back(p.target);
  std::vector<std::vector<std::string>> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(by_source.at(p.source));
  return out;
}

std::string format_accuracy_grid(const std::vector<PairAccuracy>& results) {
  std::vector<std::string> rows, cols;
  std::map<std::pair<std::string, std::string>, double> cells;
  for (const auto& r : results) {
    if (std::find(rows.begin(), rows.end(), r.source) == rows.end()) rows.push_back(r.source);
    if (std::find(cols.begin(), cols.end(), r.target) == cols.end()) cols.push_back(r.target);
    cells[{r.source, r.target}] = r.accuracy;
  }
  std::size_t width = 6;
  for (const auto& label : rows) width = std::max(width, label.size() + 1);
  for (const auto& label : cols) width = std::max(width, label.size() + 1);

  auto pad = [&](const std::string& s) { return s + std::string(width - std::min(width, s.size()), ' '); };
  std::ostringstream os;
  os << pad("src\\tgt");
  for (const auto& c : cols) os << pad(c);
  os << '\n';
  for (const auto& r : rows) {
    os << pad(r);
    for (const auto& c : cols) {
      auto it = cells.find({r, c});
      if (it == cells.end()) {
        os << pad("-");
      } else {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * it->second);
        os << pad(buf);
      }
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace corrbridge
