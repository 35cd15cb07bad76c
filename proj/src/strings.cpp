#include "reflect/strings.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>

namespace reflect::strings {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

}  // namespace

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), lower);
  return out;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

bool contains_ci(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return true;
  if (haystack.size() < needle.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    bool hit = true;
    for (std::size_t j = 0; j < needle.size(); ++j) {
      if (lower(haystack[i + j]) != lower(needle[j])) { hit = false; break; }
    }
    if (hit) return true;
  }
  return false;
}

std::vector<std::string> split(std::string_view s, char delim) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = s.find(delim, pos);
    if (next == std::string_view::npos) {
      out.emplace_back(s.substr(pos));
      break;
    }
    out.emplace_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t b = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > b) out.emplace_back(s.substr(b, i - b));
  }
  return out;
}

std::size_t count_ws_tokens(std::string_view s) {
  std::size_t n = 0;
  bool in_tok = false;
  for (char c : s) {
    if (is_space(c)) {
      in_tok = false;
    } else if (!in_tok) {
      in_tok = true;
      ++n;
    }
  }
  return n;
}

std::vector<std::string> word_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (is_alnum(c)) {
      cur.push_back(lower(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<std::string> split_sentences(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    cur.push_back(c);
    if (c == '.' || c == '!' || c == '?') {
      std::string t = trim(cur);
      if (!t.empty()) out.push_back(std::move(t));
      cur.clear();
    }
  }
  std::string t = trim(cur);
  if (!t.empty()) out.push_back(std::move(t));
  return out;
}

std::size_t count_word_occurrences(std::string_view text, std::string_view word) {
  if (word.empty()) return 0;
  std::string hay = to_lower(text);
  std::string pat = to_lower(std::string(word));
  std::size_t n = 0;
  std::size_t pos = 0;
  while ((pos = hay.find(pat, pos)) != std::string::npos) {
    bool left_ok = pos == 0 || !is_alnum(hay[pos - 1]);
    std::size_t end = pos + pat.size();
    bool right_ok = end >= hay.size() || !is_alnum(hay[end]);
    if (left_ok && right_ok) ++n;
    pos = end;
  }
  return n;
}

bool looks_numeric(std::string_view sv) {
  std::string s = trim(sv);
  if (s.empty()) return false;
  std::size_t i = 0;
  if (s[i] == '+' || s[i] == '-') ++i;
  std::size_t digits = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) { ++i; ++digits; }
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) { ++i; ++digits; }
  }
  return digits > 0 && i == s.size();
}

std::string canonical_number(std::string_view sv) {
  std::string s = trim(sv);
  if (!looks_numeric(s)) return s;
  bool neg = false;
  std::size_t i = 0;
  if (s[i] == '+') ++i;
  else if (s[i] == '-') { neg = true; ++i; }
  std::string int_part, frac_part;
  while (i < s.size() && s[i] != '.') int_part.push_back(s[i++]);
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size()) frac_part.push_back(s[i++]);
  }
  while (int_part.size() > 1 && int_part.front() == '0') int_part.erase(int_part.begin());
  if (int_part.empty()) int_part = "0";
  while (!frac_part.empty() && frac_part.back() == '0') frac_part.pop_back();
  std::string out = int_part;
  if (!frac_part.empty()) out += "." + frac_part;
  if (neg && out != "0") out.insert(out.begin(), '-');
  return out;
}

std::string normalize_answer(std::string_view s) {
  std::string t = trim(s);
  if (looks_numeric(t)) return canonical_number(t);
  return to_lower(t);
}

std::optional<double> parse_number_lenient(std::string_view sv) {
  std::string s;
  for (char c : sv) {
    if (c == '$' || c == ',' || c == '%' || is_space(c)) continue;
    s.push_back(c);
  }
  // allow surrounding parentheses for negative accounting style "(12)"
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')') {
    s = "-" + s.substr(1, s.size() - 2);
  }
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == nullptr || *end != '\0' || end == s.c_str()) return std::nullopt;
  return v;
}

std::optional<std::string> parse_final_answer(std::string_view reply) {
  std::string hay = to_lower(reply);
  std::string pat = to_lower(kFinalAnswerMarker);
  std::size_t best = std::string::npos;
  std::size_t pos = 0;
  while ((pos = hay.find(pat, pos)) != std::string::npos) {
    best = pos;
    pos += pat.size();
  }
  if (best == std::string::npos) return std::nullopt;
  std::size_t start = best + pat.size();
  std::size_t eol = reply.find('\n', start);
  std::string_view span = reply.substr(start, eol == std::string_view::npos
                                                  ? std::string_view::npos
                                                  : eol - start);
  std::string ans = trim(span);
  if (ans.empty()) return std::nullopt;
  return ans;
}

}  // namespace reflect::strings
