#include "reflect/engines/world.hpp"

#include <cctype>

#include "reflect/strings.hpp"

namespace reflect::engines {

std::optional<ActionVerb> action_verb_from_name(const std::string& name) {
  std::string n = strings::to_lower(strings::trim(name));
  if (n == "goto" || n == "go") return ActionVerb::goto_;
  if (n == "pickup" || n == "pick_up") return ActionVerb::pickup;
  if (n == "put") return ActionVerb::put;
  if (n == "open") return ActionVerb::open;
  if (n == "close") return ActionVerb::close;
  if (n == "toggle") return ActionVerb::toggle;
  if (n == "slice") return ActionVerb::slice;
  if (n == "clean") return ActionVerb::clean;
  if (n == "heat") return ActionVerb::heat;
  if (n == "cool") return ActionVerb::cool;
  return std::nullopt;
}

const char* action_verb_name(ActionVerb v) {
  switch (v) {
    case ActionVerb::goto_: return "goto";
    case ActionVerb::pickup: return "pickup";
    case ActionVerb::put: return "put";
    case ActionVerb::open: return "open";
    case ActionVerb::close: return "close";
    case ActionVerb::toggle: return "toggle";
    case ActionVerb::slice: return "slice";
    case ActionVerb::clean: return "clean";
    case ActionVerb::heat: return "heat";
    case ActionVerb::cool: return "cool";
  }
  return "goto";
}

std::string Action::to_string() const {
  std::string s = action_verb_name(verb);
  s += "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i > 0) s += ", ";
    s += args[i];
  }
  s += ")";
  return s;
}

namespace {

PreconditionResult fail(const WorldState& state, std::string reason) {
  PreconditionResult r;
  r.ok = false;
  r.reason = std::move(reason);
  r.next_state = state;  // unchanged on failure
  return r;
}

PreconditionResult succeed(WorldState next) {
  PreconditionResult r;
  r.ok = true;
  r.next_state = std::move(next);
  return r;
}

bool object_reachable(const WorldState& s, const std::string& obj) {
  auto it = s.objects.find(obj);
  if (it == s.objects.end()) return false;
  if (s.holding && *s.holding == obj) return true;
  return it->second.location == s.agent_location;
}

}  // namespace

PreconditionResult check_preconditions(const WorldState& state, const Action& action) {
  const auto need_args = [&](std::size_t n) { return action.args.size() >= n; };

  switch (action.verb) {
    case ActionVerb::goto_: {
      if (!need_args(1) || strings::trim(action.args[0]).empty()) {
        return fail(state, "goto requires a destination");
      }
      WorldState next = state;
      next.agent_location = action.args[0];
      return succeed(std::move(next));
    }
    case ActionVerb::pickup: {
      if (!need_args(1)) return fail(state, "pickup requires an object");
      const std::string& obj = action.args[0];
      auto it = state.objects.find(obj);
      if (it == state.objects.end()) return fail(state, "unknown object: " + obj);
      if (state.holding) {
        return fail(state, "hand occupied by " + *state.holding + ", cannot pick up " + obj);
      }
      if (it->second.location != state.agent_location) {
        return fail(state, obj + " is at " + it->second.location + ", agent is at " +
                               state.agent_location);
      }
      WorldState next = state;
      next.holding = obj;
      next.objects[obj].location = "agent";
      return succeed(std::move(next));
    }
    case ActionVerb::put: {
      if (!need_args(2)) return fail(state, "put requires an object and a destination");
      const std::string& obj = action.args[0];
      const std::string& dest = action.args[1];
      if (!state.holding || *state.holding != obj) {
        return fail(state, "not holding " + obj);
      }
      if (state.agent_location != dest) {
        return fail(state, "agent is at " + state.agent_location + ", not at " + dest);
      }
      WorldState next = state;
      next.holding.reset();
      next.objects[obj].location = dest;
      return succeed(std::move(next));
    }
    case ActionVerb::open:
    case ActionVerb::close: {
      if (!need_args(1)) return fail(state, "open/close requires an object");
      const std::string& obj = action.args[0];
      auto it = state.objects.find(obj);
      if (it == state.objects.end()) return fail(state, "unknown object: " + obj);
      if (it->second.location != state.agent_location) {
        return fail(state, obj + " is not at the agent's location");
      }
      bool opening = action.verb == ActionVerb::open;
      if (opening && it->second.open) return fail(state, obj + " is already open");
      if (!opening && !it->second.open) return fail(state, obj + " is not open");
      WorldState next = state;
      next.objects[obj].open = opening;
      return succeed(std::move(next));
    }
    case ActionVerb::toggle: {
      if (!need_args(1)) return fail(state, "toggle requires an object");
      const std::string& obj = action.args[0];
      auto it = state.objects.find(obj);
      if (it == state.objects.end()) return fail(state, "unknown object: " + obj);
      if (it->second.location != state.agent_location) {
        return fail(state, obj + " is not at the agent's location");
      }
      WorldState next = state;
      next.objects[obj].on = !it->second.on;
      return succeed(std::move(next));
    }
    case ActionVerb::slice: {
      if (!need_args(1)) return fail(state, "slice requires an object");
      const std::string& obj = action.args[0];
      auto it = state.objects.find(obj);
      if (it == state.objects.end()) return fail(state, "unknown object: " + obj);
      if (it->second.location != state.agent_location) {
        return fail(state, obj + " is not at the agent's location");
      }
      if (!state.holding) return fail(state, "slicing requires holding an implement");
      if (*state.holding == obj) return fail(state, "cannot slice the held object");
      if (it->second.sliced) return fail(state, obj + " is already sliced");
      WorldState next = state;
      next.objects[obj].sliced = true;
      return succeed(std::move(next));
    }
    case ActionVerb::clean:
    case ActionVerb::heat:
    case ActionVerb::cool: {
      if (!need_args(1)) return fail(state, "action requires an object");
      const std::string& obj = action.args[0];
      if (state.objects.find(obj) == state.objects.end()) {
        return fail(state, "unknown object: " + obj);
      }
      if (!object_reachable(state, obj)) {
        return fail(state, obj + " is neither held nor at the agent's location");
      }
      WorldState next = state;
      if (action.verb == ActionVerb::clean) next.objects[obj].clean = true;
      if (action.verb == ActionVerb::heat) {
        next.objects[obj].heated = true;
        next.objects[obj].cooled = false;
      }
      if (action.verb == ActionVerb::cool) {
        next.objects[obj].cooled = true;
        next.objects[obj].heated = false;
      }
      return succeed(std::move(next));
    }
  }
  return fail(state, "unknown_action");
}

PreconditionResult check_preconditions(const WorldState& state, const std::string& action_text) {
  auto action = parse_action(action_text);
  if (!action) return fail(state, "unknown_action");
  return check_preconditions(state, *action);
}

PrefixScore prefix_score(const WorldState& initial, const std::vector<Action>& actions) {
  PrefixScore score;
  score.total = actions.size();
  WorldState cur = initial;
  for (const auto& a : actions) {
    PreconditionResult r = check_preconditions(cur, a);
    if (!r.ok) {
      score.first_failure = a.to_string() + ": " + r.reason;
      break;
    }
    cur = std::move(r.next_state);
    ++score.valid_prefix_len;
  }
  return score;
}

std::optional<Action> parse_action(const std::string& line) {
  std::string s = strings::trim(line);
  // strip "3." / "3)" / "-" list prefixes
  std::size_t i = 0;
  while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) != 0)) ++i;
  if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')')) {
    s = strings::trim(s.substr(i + 1));
  } else if (!s.empty() && s[0] == '-') {
    s = strings::trim(s.substr(1));
  }
  std::size_t lp = s.find('(');
  if (lp == std::string::npos || s.back() != ')') return std::nullopt;
  auto verb = action_verb_from_name(s.substr(0, lp));
  if (!verb) return std::nullopt;
  std::string arg_text = s.substr(lp + 1, s.size() - lp - 2);
  Action a;
  a.verb = *verb;
  if (!strings::trim(arg_text).empty()) {
    for (auto& part : strings::split(arg_text, ',')) {
      a.args.push_back(strings::to_lower(strings::trim(part)));
    }
  }
  return a;
}

std::vector<Action> parse_plan(const std::string& text) {
  std::vector<Action> plan;
  for (const auto& line : strings::split(text, '\n')) {
    if (auto a = parse_action(line)) plan.push_back(std::move(*a));
  }
  return plan;
}

std::optional<WorldState> parse_world(const std::string& text) {
  WorldState w;
  bool have_agent = false, have_objects = false;
  for (const auto& line : strings::split(text, '\n')) {
    std::string lower = strings::to_lower(strings::trim(line));
    if (strings::starts_with(lower, "agent at:")) {
      w.agent_location = strings::to_lower(strings::trim(line.substr(line.find(':') + 1)));
      have_agent = !w.agent_location.empty();
    } else if (strings::starts_with(lower, "objects:")) {
      std::string body = line.substr(line.find(':') + 1);
      for (auto& entry : strings::split(body, ';')) {
        std::string e = strings::to_lower(strings::trim(entry));
        if (e.empty()) continue;
        std::size_t at = e.find(" at ");
        if (at == std::string::npos) continue;
        std::string obj = strings::trim(e.substr(0, at));
        std::string loc = strings::trim(e.substr(at + 4));
        if (obj.empty() || loc.empty()) continue;
        ObjectState os;
        os.location = loc;
        w.objects[obj] = os;
        have_objects = true;
      }
    }
  }
  if (!have_agent || !have_objects) return std::nullopt;
  return w;
}

std::string serialize_plan(const std::vector<Action>& actions) {
  std::string out;
  for (const auto& a : actions) {
    if (!out.empty()) out += "\n";
    out += a.to_string();
  }
  return out;
}

}  // namespace reflect::engines
