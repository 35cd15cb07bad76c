#include "reflect/engines/fences.hpp"

namespace reflect::engines {

std::optional<std::string> extract_fenced_code(const std::string& reply_text) {
  const std::string fence = "```";
  std::size_t open = reply_text.find(fence);
  if (open == std::string::npos) return std::nullopt;
  // skip the language tag (rest of the opening line)
  std::size_t body_start = reply_text.find('\n', open + fence.size());
  if (body_start == std::string::npos) return std::nullopt;
  ++body_start;
  std::size_t close = reply_text.find(fence, body_start);
  if (close == std::string::npos) return std::nullopt;
  std::string body = reply_text.substr(body_start, close - body_start);
  // drop the newline that precedes the closing fence
  if (!body.empty() && body.back() == '\n') body.pop_back();
  return body;
}

}  // namespace reflect::engines
