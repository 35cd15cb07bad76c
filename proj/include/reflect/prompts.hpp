#pragma once

#include <map>
#include <string>

namespace reflect {

/// Prompt templates keyed by tool/method name. Built-in defaults are
/// compiled in; a template directory (one <key>.txt per template, with
/// {{placeholder}} slots) overrides them per key.
class PromptLibrary {
 public:
  PromptLibrary();
  explicit PromptLibrary(const std::string& override_dir);

  /// Renders the template, substituting {{name}} slots; unknown slots
  /// render empty. Throws std::out_of_range for an unknown key.
  std::string render(const std::string& key,
                     const std::map<std::string, std::string>& vars) const;

  bool has(const std::string& key) const { return templates_.count(key) > 0; }

  const std::map<std::string, std::string>& all() const { return templates_; }

 private:
  std::map<std::string, std::string> templates_;
};

}  // namespace reflect
