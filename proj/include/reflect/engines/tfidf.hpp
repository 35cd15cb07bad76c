#pragma once

#include <string>
#include <vector>

namespace reflect::engines {

struct RankedSection {
  std::size_t index = 0;  // position in the input document list
  std::string name;
  std::string text;
  double score = 0.0;
};

struct NamedSection {
  std::string name;
  std::string text;
};

/// Ranks sections by cosine similarity of TF-IDF vectors built from
/// case-folded word tokens, with weight ln(1+tf) * ln(N/df). Stable:
/// ties resolve by section index. A query sharing no token with any
/// section falls back to the first top_n sections in document order.
std::vector<RankedSection> tfidf_retrieve(const std::string& query,
                                          const std::vector<NamedSection>& docs,
                                          std::size_t top_n);

}  // namespace reflect::engines
