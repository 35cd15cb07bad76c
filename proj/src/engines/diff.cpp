#include "reflect/engines/diff.hpp"

#include <cctype>

#include "reflect/strings.hpp"

namespace reflect::engines {

namespace {

std::string strip_ab_prefix(const std::string& path) {
  if (strings::starts_with(path, "a/") || strings::starts_with(path, "b/")) {
    return path.substr(2);
  }
  return path;
}

/// Extracts the path from a "--- path" / "+++ path" header, dropping a
/// trailing tab-separated timestamp.
std::string header_path(const std::string& line) {
  std::string rest = line.substr(4);
  std::size_t tab = rest.find('\t');
  if (tab != std::string::npos) rest = rest.substr(0, tab);
  return strip_ab_prefix(strings::trim(rest));
}

/// Parses "-a,b" or "-a" (sign given by caller); returns false on error.
bool parse_range(const std::string& text, char sign, long* start, long* count) {
  if (text.empty() || text[0] != sign) return false;
  std::size_t i = 1;
  if (i >= text.size() || std::isdigit(static_cast<unsigned char>(text[i])) == 0) return false;
  long s = 0;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])) != 0) {
    s = s * 10 + (text[i] - '0');
    ++i;
  }
  long c = 1;
  if (i < text.size()) {
    if (text[i] != ',') return false;
    ++i;
    if (i >= text.size() || std::isdigit(static_cast<unsigned char>(text[i])) == 0) return false;
    c = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])) != 0) {
      c = c * 10 + (text[i] - '0');
      ++i;
    }
  }
  if (i != text.size()) return false;
  *start = s;
  *count = c;
  return true;
}

bool parse_hunk_header(const std::string& line, DiffHunk* hunk, std::string* error) {
  // "@@ -a[,b] +c[,d] @@[ heading]"
  if (!strings::starts_with(line, "@@ ")) {
    *error = "hunk header must start with '@@ '";
    return false;
  }
  std::size_t close = line.find(" @@", 3);
  if (close == std::string::npos) {
    *error = "hunk header missing closing '@@'";
    return false;
  }
  std::string ranges = line.substr(3, close - 3);
  auto parts = strings::split_ws(ranges);
  if (parts.size() != 2) {
    *error = "hunk header must contain exactly an old and a new range";
    return false;
  }
  if (!parse_range(parts[0], '-', &hunk->old_start, &hunk->old_count)) {
    *error = "malformed old range '" + parts[0] + "'";
    return false;
  }
  if (!parse_range(parts[1], '+', &hunk->new_start, &hunk->new_count)) {
    *error = "malformed new range '" + parts[1] + "'";
    return false;
  }
  std::string rest = line.substr(close + 3);
  if (!rest.empty() && rest[0] == ' ') rest = rest.substr(1);
  hunk->section_heading = rest;
  return true;
}

bool is_git_header(const std::string& line) {
  return strings::starts_with(line, "diff --git") || strings::starts_with(line, "index ") ||
         strings::starts_with(line, "new file mode") ||
         strings::starts_with(line, "deleted file mode") ||
         strings::starts_with(line, "old mode") || strings::starts_with(line, "new mode") ||
         strings::starts_with(line, "similarity index") ||
         strings::starts_with(line, "rename from") || strings::starts_with(line, "rename to");
}

}  // namespace

std::string DiffFile::target_path() const {
  if (new_path == "/dev/null") return old_path;
  return new_path;
}

std::vector<std::string> DiffFile::added_lines() const {
  std::vector<std::string> out;
  for (const auto& h : hunks) {
    for (const auto& l : h.lines) {
      if (l.tag == '+') out.push_back(l.text);
    }
  }
  return out;
}

std::vector<std::string> DiffDocument::target_paths() const {
  std::vector<std::string> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(f.target_path());
  return out;
}

std::vector<std::string> DiffDocument::added_lines() const {
  std::vector<std::string> out;
  for (const auto& f : files) {
    auto lines = f.added_lines();
    out.insert(out.end(), lines.begin(), lines.end());
  }
  return out;
}

std::string DiffDocument::serialize() const {
  std::string out;
  for (const auto& f : files) {
    out += "--- " + (f.old_path == "/dev/null" ? f.old_path : "a/" + f.old_path) + "\n";
    out += "+++ " + (f.new_path == "/dev/null" ? f.new_path : "b/" + f.new_path) + "\n";
    for (const auto& h : f.hunks) {
      out += "@@ -" + std::to_string(h.old_start) + "," + std::to_string(h.old_count) + " +" +
             std::to_string(h.new_start) + "," + std::to_string(h.new_count) + " @@";
      if (!h.section_heading.empty()) out += " " + h.section_heading;
      out += "\n";
      for (const auto& l : h.lines) {
        out += l.tag + l.text + "\n";
      }
    }
  }
  return out;
}

DiffDocument validate_diff(const std::string& text) {
  DiffDocument doc;
  doc.raw_text = text;

  auto invalid = [&](const std::string& why) {
    doc.is_valid_unified = false;
    if (doc.first_error.empty()) doc.first_error = why;
    return doc;
  };

  std::vector<std::string> lines = strings::split(text, '\n');
  // a trailing newline produces one empty final element; drop it
  if (!lines.empty() && lines.back().empty()) lines.pop_back();

  std::size_t i = 0;
  bool any_file = false;
  while (i < lines.size()) {
    // skip git-style preamble and blank separators between file sections
    if (lines[i].empty() || is_git_header(lines[i])) {
      ++i;
      continue;
    }
    if (!strings::starts_with(lines[i], "--- ")) {
      return invalid("expected '--- ' file header, got: " + lines[i].substr(0, 40));
    }
    DiffFile file;
    file.old_path = header_path(lines[i]);
    ++i;
    if (i >= lines.size() || !strings::starts_with(lines[i], "+++ ")) {
      return invalid("'--- ' header not followed by '+++ '");
    }
    file.new_path = header_path(lines[i]);
    ++i;
    if (file.old_path.empty() || file.new_path.empty()) {
      return invalid("empty file path in header");
    }
    if (i >= lines.size() || !strings::starts_with(lines[i], "@@ ")) {
      return invalid("file section without any hunk");
    }
    while (i < lines.size() && strings::starts_with(lines[i], "@@ ")) {
      DiffHunk hunk;
      std::string err;
      if (!parse_hunk_header(lines[i], &hunk, &err)) return invalid(err);
      ++i;
      long old_seen = 0, new_seen = 0;
      while (i < lines.size() && (old_seen < hunk.old_count || new_seen < hunk.new_count)) {
        const std::string& body = lines[i];
        if (body.empty()) {
          // tolerate a bare empty line as a context line of empty text
          hunk.lines.push_back({' ', ""});
          ++old_seen;
          ++new_seen;
          ++i;
          continue;
        }
        char tag = body[0];
        if (tag == '\\') {
          ++i;  // "\ No newline at end of file" marker, not counted
          continue;
        }
        if (tag != ' ' && tag != '+' && tag != '-') {
          return invalid("unexpected line in hunk body: " + body.substr(0, 40));
        }
        hunk.lines.push_back({tag, body.substr(1)});
        if (tag == ' ') {
          ++old_seen;
          ++new_seen;
        } else if (tag == '-') {
          ++old_seen;
        } else {
          ++new_seen;
        }
        ++i;
      }
      if (old_seen != hunk.old_count || new_seen != hunk.new_count) {
        return invalid("hunk body shorter than header counts");
      }
      file.hunks.push_back(std::move(hunk));
    }
    doc.files.push_back(std::move(file));
    any_file = true;
  }
  if (!any_file) return invalid("no unified-diff file section found");
  doc.is_valid_unified = true;
  return doc;
}

}  // namespace reflect::engines
