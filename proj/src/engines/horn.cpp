#include "reflect/engines/horn.hpp"

#include <algorithm>

#include "reflect/strings.hpp"

namespace reflect::engines {

std::string normalize_atom(const std::string& atom) {
  std::string lower = strings::to_lower(atom);
  // strip sentence-terminal punctuation
  while (!lower.empty() && (lower.back() == '.' || lower.back() == '!' || lower.back() == ',')) {
    lower.pop_back();
  }
  auto toks = strings::split_ws(lower);
  std::string out;
  for (const auto& t : toks) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

std::string negate_atom(const std::string& atom) {
  std::string a = normalize_atom(atom);
  std::size_t pos = a.find(" is not ");
  if (pos != std::string::npos) {
    return a.substr(0, pos) + " is " + a.substr(pos + 8);
  }
  pos = a.find(" is ");
  if (pos != std::string::npos) {
    return a.substr(0, pos) + " is not " + a.substr(pos + 4);
  }
  if (strings::starts_with(a, "not ")) return a.substr(4);
  return "not " + a;
}

std::string atom_predicate(const std::string& atom) {
  std::string a = normalize_atom(atom);
  std::size_t pos = a.rfind(" is not ");
  if (pos != std::string::npos) return a.substr(pos + 8);
  pos = a.rfind(" is ");
  if (pos != std::string::npos) return a.substr(pos + 4);
  return a;
}

void HornRuleBase::add_fact(const std::string& atom) {
  std::string a = normalize_atom(atom);
  if (!a.empty()) facts.insert(a);
}

void HornRuleBase::add_rule(const std::vector<std::string>& antecedents,
                            const std::string& consequent) {
  if (antecedents.empty()) return;
  HornRule r;
  for (const auto& a : antecedents) {
    std::string n = normalize_atom(a);
    if (n.empty()) return;
    r.antecedents.push_back(std::move(n));
  }
  r.consequent = normalize_atom(consequent);
  if (r.consequent.empty()) return;
  if (std::find(rules.begin(), rules.end(), r) == rules.end()) {
    rules.push_back(std::move(r));
  }
}

const char* chain_label_name(ChainVerdict::Label l) {
  switch (l) {
    case ChainVerdict::Label::TRUE_: return "True";
    case ChainVerdict::Label::FALSE_: return "False";
    case ChainVerdict::Label::UNKNOWN: return "Unknown";
  }
  return "Unknown";
}

namespace {

std::string describe(const HornRule& r) {
  std::string s;
  for (std::size_t i = 0; i < r.antecedents.size(); ++i) {
    if (i > 0) s += " and ";
    s += r.antecedents[i];
  }
  s += " -> " + r.consequent;
  return s;
}

/// Runs rule application to fixpoint, recording fired rules in order.
std::set<std::string> closure_with_trace(const HornRuleBase& base,
                                         std::vector<std::string>* fired) {
  std::set<std::string> known = base.facts;
  std::vector<bool> used(base.rules.size(), false);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < base.rules.size(); ++i) {
      if (used[i]) continue;
      const HornRule& r = base.rules[i];
      bool all_known = std::all_of(r.antecedents.begin(), r.antecedents.end(),
                                   [&](const std::string& a) { return known.count(a) > 0; });
      if (!all_known) continue;
      used[i] = true;
      if (fired) fired->push_back(describe(r));
      if (known.insert(r.consequent).second) changed = true;
    }
  }
  return known;
}

}  // namespace

std::set<std::string> horn_closure(const HornRuleBase& base) {
  return closure_with_trace(base, nullptr);
}

ChainVerdict forward_chain(const HornRuleBase& base, const std::string& query) {
  ChainVerdict v;
  std::string q = normalize_atom(query);
  if (q.empty()) return v;  // malformed query -> UNKNOWN

  std::vector<std::string> fired;
  std::set<std::string> known = closure_with_trace(base, &fired);

  if (known.count(q) > 0) {
    v.label = ChainVerdict::Label::TRUE_;
    v.derivation = fired;
    if (v.derivation.empty()) v.derivation.push_back("fact: " + q);
    return v;
  }
  if (known.count(negate_atom(q)) > 0) {
    v.label = ChainVerdict::Label::FALSE_;
    v.derivation = fired;
    if (v.derivation.empty()) v.derivation.push_back("fact: " + negate_atom(q));
    return v;
  }
  if (base.closed_predicates.count(atom_predicate(q)) > 0) {
    v.label = ChainVerdict::Label::FALSE_;
    v.derivation.push_back("closed-world: " + q + " not derivable");
    return v;
  }
  return v;  // UNKNOWN, empty derivation
}

RuleExtraction extract_rules(const std::string& text) {
  RuleExtraction out;
  for (const auto& sentence : strings::split_sentences(text)) {
    std::string s = strings::trim(sentence);
    if (s.empty()) continue;
    if (!s.empty() && s.back() == '?') {
      ++out.skipped_sentences;  // questions are not facts
      continue;
    }
    std::string lower = strings::to_lower(s);
    if (strings::starts_with(lower, "if ")) {
      std::size_t then_pos = lower.find(" then ");
      if (then_pos == std::string::npos) {
        ++out.skipped_sentences;
        continue;
      }
      std::string antecedent_text = s.substr(3, then_pos - 3);
      std::string consequent_text = s.substr(then_pos + 6);
      std::vector<std::string> antecedents;
      std::string lower_ante = strings::to_lower(antecedent_text);
      std::size_t start = 0;
      while (true) {
        std::size_t and_pos = lower_ante.find(" and ", start);
        if (and_pos == std::string::npos) {
          antecedents.push_back(antecedent_text.substr(start));
          break;
        }
        antecedents.push_back(antecedent_text.substr(start, and_pos - start));
        start = and_pos + 5;
      }
      bool ok = !strings::trim(consequent_text).empty() &&
                std::all_of(antecedents.begin(), antecedents.end(), [](const std::string& a) {
                  return !strings::trim(a).empty();
                });
      if (!ok) {
        ++out.skipped_sentences;
        continue;
      }
      out.base.add_rule(antecedents, consequent_text);
    } else {
      std::string atom = normalize_atom(s);
      if (atom.empty()) {
        ++out.skipped_sentences;
        continue;
      }
      out.base.add_fact(atom);
    }
  }
  return out;
}

}  // namespace reflect::engines
