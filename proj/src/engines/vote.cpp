#include "reflect/engines/vote.hpp"

#include "reflect/strings.hpp"

namespace reflect::engines {

std::optional<std::string> modal_vote(
    const std::vector<std::optional<std::string>>& candidates) {
  std::vector<std::string> order;  // normalized values by first occurrence
  std::vector<int> counts;
  for (const auto& c : candidates) {
    if (!c) continue;
    std::string norm = strings::normalize_answer(*c);
    if (norm.empty()) continue;
    bool found = false;
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (order[i] == norm) {
        ++counts[i];
        found = true;
        break;
      }
    }
    if (!found) {
      order.push_back(norm);
      counts.push_back(1);
    }
  }
  if (order.empty()) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (counts[i] > counts[best]) best = i;  // strict: ties keep the earliest
  }
  return order[best];
}

std::optional<std::string> modal_vote(const std::vector<std::string>& candidates) {
  std::vector<std::optional<std::string>> wrapped;
  wrapped.reserve(candidates.size());
  for (const auto& c : candidates) wrapped.emplace_back(c);
  return modal_vote(wrapped);
}

}  // namespace reflect::engines
