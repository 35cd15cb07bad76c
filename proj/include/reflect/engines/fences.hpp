#pragma once

#include <optional>
#include <string>

namespace reflect::engines {

/// Returns the body of the first ``` fenced code block in a model reply.
/// Tolerates fences with or without a language tag; no fence -> nullopt.
std::optional<std::string> extract_fenced_code(const std::string& reply_text);

}  // namespace reflect::engines
