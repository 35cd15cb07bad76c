#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace reflect::engines {

/// Supported action vocabulary for the procedural precondition tracker.
enum class ActionVerb { goto_, pickup, put, open, close, toggle, slice, clean, heat, cool };

std::optional<ActionVerb> action_verb_from_name(const std::string& name);
const char* action_verb_name(ActionVerb v);

struct Action {
  ActionVerb verb;
  std::vector<std::string> args;

  std::string to_string() const;
  bool operator==(const Action&) const = default;
};

struct ObjectState {
  std::string location;
  bool open = false;
  bool on = false;
  bool sliced = false;
  bool clean = false;
  bool heated = false;
  bool cooled = false;

  bool operator==(const ObjectState&) const = default;
};

/// Symbolic world: the agent, at most one held object (whose location is
/// "agent"), and per-object states.
struct WorldState {
  std::string agent_location;
  std::optional<std::string> holding;
  std::map<std::string, ObjectState> objects;

  bool operator==(const WorldState&) const = default;
};

struct PreconditionResult {
  bool ok = false;
  std::string reason;  // empty on success
  WorldState next_state;
};

/// Pure precondition check + transition. Preconditions:
///   goto(dest)        dest nonempty
///   pickup(obj)       obj exists, at agent's location, hand empty
///   put(obj, dest)    holding obj, agent at dest
///   open(obj)         obj exists, at agent's location, not open
///   close(obj)        obj exists, at agent's location, open
///   toggle(obj)       obj exists, at agent's location
///   slice(obj)        obj at agent's location, holding some implement, not sliced
///   clean/heat/cool   obj at agent's location or held
/// Unknown verbs report reason "unknown_action".
PreconditionResult check_preconditions(const WorldState& state, const Action& action);
PreconditionResult check_preconditions(const WorldState& state, const std::string& action_text);

struct PrefixScore {
  std::size_t valid_prefix_len = 0;
  std::size_t total = 0;
  std::string first_failure;  // reason for the first failing action, if any

  bool fully_valid() const { return valid_prefix_len == total; }
};

/// Length of the longest prefix in which every action's preconditions
/// hold when applied in order.
PrefixScore prefix_score(const WorldState& initial, const std::vector<Action>& actions);

/// Parses one "verb(arg[, arg])" action; tolerates "1. verb(...)" list
/// numbering and surrounding prose-free lines.
std::optional<Action> parse_action(const std::string& line);

/// Parses a plan: one action per line; lines that do not parse are
/// dropped (an unparseable plan becomes an empty action list).
std::vector<Action> parse_plan(const std::string& text);

/// Parses the fixture world block:
///   agent at: kitchen
///   objects: apple at kitchen; knife at counter
/// Returns nullopt when either block is missing.
std::optional<WorldState> parse_world(const std::string& text);

std::string serialize_plan(const std::vector<Action>& actions);

}  // namespace reflect::engines
