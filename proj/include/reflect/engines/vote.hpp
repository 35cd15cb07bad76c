#pragma once

#include <optional>
#include <string>
#include <vector>

namespace reflect::engines {

/// Majority vote over candidate answers. Absent candidates are dropped;
/// the rest are normalized (trim, case-fold, canonical numeric form so
/// "1.50" and "1.5" merge). Returns the most frequent normalized value,
/// ties broken by earliest first occurrence; empty input -> nullopt.
std::optional<std::string> modal_vote(const std::vector<std::optional<std::string>>& candidates);

std::optional<std::string> modal_vote(const std::vector<std::string>& candidates);

}  // namespace reflect::engines
