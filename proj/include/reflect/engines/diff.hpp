#pragma once

#include <string>
#include <vector>

namespace reflect::engines {

/// One "@@ -a,b +c,d @@" hunk with its body lines (leading marker
/// character stripped, per-line).
struct DiffHunk {
  long old_start = 0;
  long old_count = 1;
  long new_start = 0;
  long new_count = 1;
  std::string section_heading;  // trailing text after the closing @@
  struct Line {
    char tag;  // ' ', '+', '-'
    std::string text;
    bool operator==(const Line&) const = default;
  };
  std::vector<Line> lines;

  bool operator==(const DiffHunk&) const = default;
};

struct DiffFile {
  std::string old_path;  // as written, "a/..." prefix stripped
  std::string new_path;  // "b/..." prefix stripped; "/dev/null" preserved
  std::vector<DiffHunk> hunks;

  /// The effective target path (new path unless the file is deleted).
  std::string target_path() const;
  std::vector<std::string> added_lines() const;

  bool operator==(const DiffFile&) const = default;
};

/// A strictly-parsed unified diff. is_valid_unified is true iff every
/// hunk header parses and body line counts match the header counts.
struct DiffDocument {
  std::string raw_text;
  std::vector<DiffFile> files;
  bool is_valid_unified = false;
  std::string first_error;  // description of the first grammar violation

  std::vector<std::string> target_paths() const;
  std::vector<std::string> added_lines() const;

  /// Canonical re-rendering of the parsed structure.
  std::string serialize() const;

  bool structurally_equal(const DiffDocument& other) const {
    return files == other.files && is_valid_unified == other.is_valid_unified;
  }
};

/// Strict unified-diff parse. Never raises: invalid text yields
/// is_valid_unified=false with a first-error description. Accepted
/// grammar: optional "diff --git"/"index"/"new file"/"deleted file"
/// headers, then "--- <path>", "+++ <path>", one or more
/// "@@ -a[,b] +c[,d] @@" hunks whose bodies consist of ' ', '+', '-'
/// lines (plus the "\ No newline at end of file" marker) with counts
/// matching the header.
DiffDocument validate_diff(const std::string& text);

}  // namespace reflect::engines
