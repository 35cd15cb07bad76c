#include "reflect/engines/pysyntax.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace reflect::engines {

namespace {

struct Token {
  enum class Kind { name, number, str, op };
  Kind kind;
  std::string text;
  int depth;  // bracket depth at the token's position
  int line;
};

struct LogicalLine {
  std::vector<Token> tokens;
  int indent = 0;      // column of the first physical line (tab = 8)
  int first_line = 1;  // 1-based physical line number
};

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_';
}
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool is_string_prefix(const std::string& name) {
  if (name.size() > 2) return false;
  for (char c : name) {
    char l = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (l != 'r' && l != 'b' && l != 'f' && l != 'u') return false;
  }
  return !name.empty();
}

std::string err_at(int line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

const std::set<std::string> kBlockKeywords = {"if",   "elif",  "else",  "for",    "while",
                                              "def",  "class", "with",  "try",    "except",
                                              "finally"};
const std::set<std::string> kSegmentInitialOnly = {"return", "pass", "break", "continue"};
// operators/keywords that cannot legally end a logical line
const std::set<std::string> kBadTrailing = {
    "+",  "-",  "/",  "%",  "<<",  ">>",  "&",  "|",  "^",   "==", "!=", "<=",
    ">=", "<",  ">",  "=",  "+=",  "-=",  "*=", "/=", "//=", "%=", "**=",
    "&=", "|=", "^=", ">>=", "<<=", "->", ".",  "~",  "and", "or", "not",
    "if", "else", "lambda", "in",  "is",  "from", "as"};

struct Tokenizer {
  const std::string& src;
  std::size_t i = 0;
  int line = 1;
  int depth = 0;
  std::vector<char> bracket_stack;
  std::optional<std::string> error;

  std::vector<LogicalLine> logical_lines;
  LogicalLine current;
  bool at_line_start = true;
  int pending_indent = 0;

  explicit Tokenizer(const std::string& s) : src(s) {}

  char peek(std::size_t off = 0) const {
    return i + off < src.size() ? src[i + off] : '\0';
  }

  void fail(const std::string& what) {
    if (!error) error = err_at(line, what);
  }

  void flush_logical_line() {
    if (!current.tokens.empty()) {
      logical_lines.push_back(std::move(current));
      current = LogicalLine{};
    }
    at_line_start = true;
    pending_indent = 0;
  }

  void measure_indent() {
    int col = 0;
    while (i < src.size() && (src[i] == ' ' || src[i] == '\t')) {
      col += src[i] == '\t' ? 8 - (col % 8) : 1;
      ++i;
    }
    pending_indent = col;
  }

  void push_token(Token::Kind kind, std::string text) {
    if (current.tokens.empty()) {
      current.indent = pending_indent;
      current.first_line = line;
    }
    current.tokens.push_back(Token{kind, std::move(text), depth, line});
  }

  /// Consumes a string literal starting at src[i] (a quote); `raw`
  /// disables backslash escapes.
  void scan_string(bool raw) {
    char quote = src[i];
    int start_line = line;
    bool triple = peek(1) == quote && peek(2) == quote;
    i += triple ? 3 : 1;
    while (i < src.size()) {
      char c = src[i];
      if (c == '\\' && !raw) {
        if (i + 1 < src.size() && src[i + 1] == '\n') ++line;
        i += 2;
        continue;
      }
      if (c == '\n') {
        if (!triple) {
          fail("unterminated string literal");
          return;
        }
        ++line;
        ++i;
        continue;
      }
      if (c == quote) {
        if (!triple) {
          ++i;
          return;
        }
        if (peek(1) == quote && peek(2) == quote) {
          i += 3;
          return;
        }
      }
      ++i;
    }
    error = error ? error : err_at(start_line, "unterminated string literal (EOF)");
  }

  void scan_operator() {
    static const char* three[] = {"**=", "//=", ">>=", "<<=", "...", nullptr};
    static const char* two[] = {"**", "//", ">>", "<<", "<=", ">=", "==", "!=", "->",
                                "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", ":=",
                                "@=", nullptr};
    for (const char** p = three; *p; ++p) {
      if (src.compare(i, 3, *p) == 0) {
        push_token(Token::Kind::op, *p);
        i += 3;
        return;
      }
    }
    for (const char** p = two; *p; ++p) {
      if (src.compare(i, 2, *p) == 0) {
        push_token(Token::Kind::op, *p);
        i += 2;
        return;
      }
    }
    char c = src[i];
    if (c == '(' || c == '[' || c == '{') {
      bracket_stack.push_back(c);
      push_token(Token::Kind::op, std::string(1, c));
      ++depth;
      ++i;
      return;
    }
    if (c == ')' || c == ']' || c == '}') {
      char expected = c == ')' ? '(' : c == ']' ? '[' : '{';
      if (bracket_stack.empty() || bracket_stack.back() != expected) {
        fail(std::string("unmatched '") + c + "'");
        ++i;
        return;
      }
      bracket_stack.pop_back();
      --depth;
      push_token(Token::Kind::op, std::string(1, c));
      ++i;
      return;
    }
    static const std::string single = "+-*/%@<>&|^~=:,.;";
    if (single.find(c) != std::string::npos) {
      push_token(Token::Kind::op, std::string(1, c));
      ++i;
      return;
    }
    if (c == '$' || c == '?' || c == '`' || c == '!') {
      fail(std::string("invalid character '") + c + "'");
      ++i;
      return;
    }
    ++i;  // other bytes (unicode in identifiers-ish) pass through leniently
  }

  void run() {
    while (i < src.size() && !error) {
      if (at_line_start) {
        measure_indent();
        at_line_start = false;
        continue;
      }
      char c = src[i];
      if (c == '\n') {
        ++line;
        ++i;
        if (depth == 0) flush_logical_line();
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r') {
        ++i;
        continue;
      }
      if (c == '#') {
        while (i < src.size() && src[i] != '\n') ++i;
        continue;
      }
      if (c == '\\' && peek(1) == '\n') {
        i += 2;
        ++line;
        continue;  // explicit line join
      }
      if (c == '"' || c == '\'') {
        scan_string(false);
        if (!error) push_token(Token::Kind::str, "<str>");
        continue;
      }
      if (is_ident_start(c)) {
        std::size_t b = i;
        while (i < src.size() && is_ident_char(src[i])) ++i;
        std::string name = src.substr(b, i - b);
        if ((peek() == '"' || peek() == '\'') && is_string_prefix(name)) {
          bool raw = name.find('r') != std::string::npos ||
                     name.find('R') != std::string::npos;
          scan_string(raw);
          if (!error) push_token(Token::Kind::str, "<str>");
        } else {
          push_token(Token::Kind::name, name);
        }
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) != 0) {
        std::size_t b = i;
        while (i < src.size() &&
               (is_ident_char(src[i]) || src[i] == '.' ||
                ((src[i] == '+' || src[i] == '-') && i > b &&
                 (src[i - 1] == 'e' || src[i - 1] == 'E')))) {
          ++i;
        }
        push_token(Token::Kind::number, src.substr(b, i - b));
        continue;
      }
      scan_operator();
    }
    if (!error && depth == 0) flush_logical_line();
    if (!error && !bracket_stack.empty()) {
      fail(std::string("'") + bracket_stack.back() + "' was never closed");
    }
  }
};

bool line_has_depth0_colon(const LogicalLine& ll) {
  return std::any_of(ll.tokens.begin(), ll.tokens.end(), [](const Token& t) {
    return t.kind == Token::Kind::op && t.text == ":" && t.depth == 0;
  });
}

bool is_block_opener(const LogicalLine& ll) {
  const Token& last = ll.tokens.back();
  return last.kind == Token::Kind::op && last.text == ":" && last.depth == 0;
}

std::optional<std::string> check_logical_line(const LogicalLine& ll) {
  const auto& toks = ll.tokens;
  std::size_t first = 0;
  std::string head = toks[first].kind == Token::Kind::name ? toks[first].text : "";
  if (head == "async" && toks.size() > 1 && toks[1].kind == Token::Kind::name) {
    ++first;
    head = toks[first].text;
  }

  if (kBlockKeywords.count(head) > 0) {
    if (!line_has_depth0_colon(ll)) {
      return err_at(ll.first_line, "expected ':' in " + head + " statement");
    }
    if (head == "def" || head == "class") {
      if (first + 1 >= toks.size() || toks[first + 1].kind != Token::Kind::name) {
        return err_at(ll.first_line, head + " requires a name");
      }
      if (head == "def" &&
          (first + 2 >= toks.size() || toks[first + 2].text != "(")) {
        return err_at(ll.first_line, "def requires a parameter list");
      }
    }
  }

  // return/pass/break/continue must start a statement segment
  bool segment_start = true;
  for (const auto& t : toks) {
    if (t.kind == Token::Kind::op && t.depth == 0 && (t.text == ";" || t.text == ":")) {
      segment_start = true;
      continue;
    }
    if (t.kind == Token::Kind::name && kSegmentInitialOnly.count(t.text) > 0 &&
        !segment_start) {
      return err_at(t.line, "'" + t.text + "' cannot appear mid-expression");
    }
    segment_start = false;
  }

  const Token& last = toks.back();
  if ((last.kind == Token::Kind::op || last.kind == Token::Kind::name) &&
      kBadTrailing.count(last.text) > 0) {
    // "from x import *" legitimately ends with '*', which is excluded above
    return err_at(last.line, "line cannot end with '" + last.text + "'");
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::string> check_python_syntax(const std::string& code) {
  Tokenizer tz(code);
  tz.run();
  if (tz.error) return tz.error;

  std::vector<int> indent_stack = {tz.logical_lines.empty() ? 0
                                                            : tz.logical_lines[0].indent};
  bool expect_indent = false;
  int opener_line = 0;
  for (const auto& ll : tz.logical_lines) {
    if (expect_indent) {
      if (ll.indent <= indent_stack.back()) {
        return err_at(opener_line, "expected an indented block");
      }
      indent_stack.push_back(ll.indent);
    } else if (ll.indent > indent_stack.back()) {
      return err_at(ll.first_line, "unexpected indent");
    } else if (ll.indent < indent_stack.back()) {
      while (indent_stack.size() > 1 && ll.indent < indent_stack.back()) {
        indent_stack.pop_back();
      }
      if (ll.indent != indent_stack.back()) {
        return err_at(ll.first_line, "unindent does not match any outer indentation level");
      }
    }
    if (auto err = check_logical_line(ll)) return err;
    expect_indent = is_block_opener(ll);
    opener_line = ll.first_line;
  }
  if (expect_indent) return err_at(opener_line, "expected an indented block (EOF)");
  return std::nullopt;
}

std::string dedent_lines(const std::vector<std::string>& lines) {
  std::optional<std::string> prefix;
  for (const auto& line : lines) {
    if (line.find_first_not_of(" \t") == std::string::npos) continue;  // blank
    std::size_t ws = line.find_first_not_of(" \t");
    std::string lead = line.substr(0, ws);
    if (!prefix) {
      prefix = lead;
    } else {
      std::size_t common = 0;
      while (common < prefix->size() && common < lead.size() &&
             (*prefix)[common] == lead[common]) {
        ++common;
      }
      prefix->resize(common);
    }
  }
  std::string out;
  for (const auto& line : lines) {
    std::string stripped = line;
    if (prefix && !prefix->empty() && line.size() >= prefix->size() &&
        line.compare(0, prefix->size(), *prefix) == 0) {
      stripped = line.substr(prefix->size());
    } else if (line.find_first_not_of(" \t") == std::string::npos) {
      stripped.clear();
    }
    out += stripped;
    out += "\n";
  }
  return out;
}

}  // namespace reflect::engines
