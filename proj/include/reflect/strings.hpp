#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reflect::strings {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);
bool contains_ci(std::string_view haystack, std::string_view needle);

/// Splits on a single-character delimiter; keeps empty fields.
std::vector<std::string> split(std::string_view s, char delim);

/// Whitespace-separated tokens (the token-counting rule used for
/// scripted-backend token estimates and the doc-length feature).
std::vector<std::string> split_ws(std::string_view s);
std::size_t count_ws_tokens(std::string_view s);

/// Lowercased alphanumeric word tokens ([a-z0-9]+ runs).
std::vector<std::string> word_tokens(std::string_view s);

/// Splits prose into sentences on '.', '!', '?' terminators.
std::vector<std::string> split_sentences(std::string_view s);

/// Counts word-boundary occurrences of `word` in `text`, case-insensitive.
/// Multi-word entries match as a phrase.
std::size_t count_word_occurrences(std::string_view text, std::string_view word);

/// True when the trimmed string is a decimal number
/// (optional sign, digits, optional fractional part).
bool looks_numeric(std::string_view s);

/// Canonical form for numeric answer strings: strips leading '+' and
/// redundant zeros, trailing zeros after the decimal point, and maps
/// "-0" to "0". Non-numeric input is returned unchanged.
std::string canonical_number(std::string_view s);

/// Shared answer normalization: trim, case-fold, canonical numeric form.
std::string normalize_answer(std::string_view s);

/// Parses a number out of a formatted answer ("$1,234.00", "45%", "1e3").
std::optional<double> parse_number_lenient(std::string_view s);

/// Extracts the payload of the last "FINAL ANSWER:" line in a model reply.
std::optional<std::string> parse_final_answer(std::string_view reply);

inline constexpr const char* kFinalAnswerMarker = "FINAL ANSWER:";

}  // namespace reflect::strings
