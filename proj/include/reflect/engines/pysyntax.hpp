#pragma once

#include <optional>
#include <string>
#include <vector>

namespace reflect::engines {

/// Structural Python syntax checker used by the tiered patch scorer.
/// Validates token-level and block-structure grammar: string and bracket
/// termination, hunk-level indentation consistency, compound-statement
/// headers (def/if/for/... require a colon), statement-keyword placement,
/// and illegal trailing operators. It does not resolve names or enforce
/// statement-context rules (e.g. return at module level passes), so it
/// accepts a superset of what a full parser accepts.
/// Returns nullopt when the code passes, otherwise the first error.
std::optional<std::string> check_python_syntax(const std::string& code);

/// Strips the longest common leading whitespace from the nonempty lines
/// and joins them; used to turn diff-added fragments into a checkable
/// block.
std::string dedent_lines(const std::vector<std::string>& lines);

}  // namespace reflect::engines
