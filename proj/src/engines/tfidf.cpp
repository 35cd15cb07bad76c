#include "reflect/engines/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "reflect/strings.hpp"

namespace reflect::engines {

namespace {

std::map<std::string, int> term_counts(const std::string& text) {
  std::map<std::string, int> tf;
  for (const auto& tok : strings::word_tokens(text)) ++tf[tok];
  return tf;
}

}  // namespace

std::vector<RankedSection> tfidf_retrieve(const std::string& query,
                                          const std::vector<NamedSection>& docs,
                                          std::size_t top_n) {
  if (docs.empty()) throw std::invalid_argument("tfidf_retrieve: docs must be nonempty");

  const std::size_t n_docs = docs.size();
  std::vector<std::map<std::string, int>> doc_tf;
  doc_tf.reserve(n_docs);
  std::map<std::string, int> df;
  for (const auto& d : docs) {
    auto tf = term_counts(d.text);
    for (const auto& [term, _] : tf) ++df[term];
    doc_tf.push_back(std::move(tf));
  }

  auto idf = [&](const std::string& term) {
    auto it = df.find(term);
    if (it == df.end()) return 0.0;
    return std::log(static_cast<double>(n_docs) / static_cast<double>(it->second));
  };
  auto weight = [&](int tf, double idf_val) { return std::log(1.0 + tf) * idf_val; };

  auto query_tf = term_counts(query);

  std::vector<RankedSection> ranked;
  ranked.reserve(n_docs);
  bool any_overlap = false;
  for (std::size_t i = 0; i < n_docs; ++i) {
    double dot = 0.0, doc_norm = 0.0, query_norm = 0.0;
    for (const auto& [term, tf] : doc_tf[i]) {
      double w = weight(tf, idf(term));
      doc_norm += w * w;
    }
    for (const auto& [term, tf] : query_tf) {
      double iv = idf(term);
      double qw = weight(tf, iv);
      query_norm += qw * qw;
      auto it = doc_tf[i].find(term);
      if (it != doc_tf[i].end()) {
        dot += qw * weight(it->second, iv);
        if (qw != 0.0) any_overlap = true;
      }
    }
    double score = 0.0;
    if (dot > 0.0 && doc_norm > 0.0 && query_norm > 0.0) {
      score = dot / (std::sqrt(doc_norm) * std::sqrt(query_norm));
    }
    ranked.push_back({i, docs[i].name, docs[i].text, score});
  }

  if (!any_overlap) {
    // document-order fallback
    if (ranked.size() > top_n) ranked.resize(top_n);
    return ranked;
  }

  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedSection& a,
                                                    const RankedSection& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.index < b.index;
  });
  if (ranked.size() > top_n) ranked.resize(top_n);
  return ranked;
}

}  // namespace reflect::engines
