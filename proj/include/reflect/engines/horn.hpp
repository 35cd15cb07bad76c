#pragma once

#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace reflect::engines {

/// A ground Horn rule: all antecedents derivable implies the consequent.
struct HornRule {
  std::vector<std::string> antecedents;  // nonempty
  std::string consequent;

  bool operator==(const HornRule&) const = default;
  bool operator<(const HornRule& o) const {
    return std::tie(antecedents, consequent) < std::tie(o.antecedents, o.consequent);
  }
};

/// Ground facts plus rules over normalized atoms (case-folded,
/// whitespace-collapsed). Closed-world FALSE commitments are gated by
/// the explicit-negation convention ("x is not y") or by an explicitly
/// declared closed predicate set.
struct HornRuleBase {
  std::set<std::string> facts;
  std::vector<HornRule> rules;
  std::set<std::string> closed_predicates;

  void add_fact(const std::string& atom);
  /// Rejects rules with no antecedents; duplicates are dropped.
  void add_rule(const std::vector<std::string>& antecedents, const std::string& consequent);
};

/// Atom normalization: case-fold, collapse whitespace, strip terminal
/// punctuation and articles-preserving text otherwise.
std::string normalize_atom(const std::string& atom);

/// Negation pairing: "x is y" <-> "x is not y"; otherwise a "not "
/// prefix is added or removed.
std::string negate_atom(const std::string& atom);

/// The predicate slot used by the closed-predicate policy: the tail of
/// an "x is y" atom, else the whole atom.
std::string atom_predicate(const std::string& atom);

struct ChainVerdict {
  enum class Label { TRUE_, FALSE_, UNKNOWN };
  Label label = Label::UNKNOWN;
  /// Fired-rule descriptions in firing order; empty iff UNKNOWN.
  std::vector<std::string> derivation;

  bool committed() const { return label != Label::UNKNOWN; }
};

const char* chain_label_name(ChainVerdict::Label l);

/// Least-fixed-point forward chaining. Sound: a committed TRUE/FALSE
/// never contradicts the exhaustive closure; always terminates (finite
/// ground atoms, monotone closure). Malformed (empty) queries yield
/// UNKNOWN, never a crash.
ChainVerdict forward_chain(const HornRuleBase& base, const std::string& query);

/// Full closure of the base (facts plus everything derivable).
std::set<std::string> horn_closure(const HornRuleBase& base);

struct RuleExtraction {
  HornRuleBase base;
  int skipped_sentences = 0;
};

/// Parses "If X [and Y ...] then Z." rules and bare declarative fact
/// sentences out of problem context. Unparseable sentences are skipped
/// and counted; zero-rule output is legal.
RuleExtraction extract_rules(const std::string& text);

}  // namespace reflect::engines
