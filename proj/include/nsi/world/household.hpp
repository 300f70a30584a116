#pragma once

// Desk-scale deterministic household environment. Observation phrasing
// follows the text-adventure convention ("On the dresser 1, you see a
// mug 1.") with snake_case identifiers, so an external grounder could be
// swapped in unchanged.

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nsi/logic/parser.hpp"
#include "nsi/world/iface.hpp"

namespace nsi {

inline const Vocabulary& household_vocabulary() {
  static const Vocabulary v = [] {
    Vocabulary vv;
    vv.boolean("locates", 1)
        .boolean("reachable", 1)
        .boolean("is_open", 1)
        .boolean("is_closed", 1)
        .boolean("contains", 2)
        .boolean("holding", 1)
        .boolean("is_cleaned", 1)
        .boolean("is_heated", 1)
        .boolean("is_cooled", 1)
        .boolean("is_turned_on", 1)
        .type_check("is_type")
        .type_check("is_item_of_type")
        .type_check("is_receptacle_of_type");
    return vv;
  }();
  return v;
}

class HouseholdWorld : public WorldInterface {
 public:
  struct Receptacle {
    std::string id;
    std::string category;                  // fridge, drawer, countertop, ...
    std::vector<std::string> extra_categories;  // washstation, heater, cooler
    bool openable = false;
    bool open = true;
    std::vector<std::string> items;
  };
  struct Item {
    std::string id;
    std::string category;  // apple, mug, desklamp, ...
    bool cleaned = false;
    bool heated = false;
    bool cooled = false;
    bool turned_on = false;
  };

  std::map<std::string, Receptacle> receptacles;
  std::map<std::string, Item> items;
  std::string agent_at;  // empty: middle of the room
  std::string held;

  Receptacle& add_receptacle(const std::string& id, const std::string& category,
                             bool openable = false, bool open = true,
                             std::vector<std::string> extra = {}) {
    Receptacle r{id, category, std::move(extra), openable, openable ? open : true, {}};
    return receptacles.emplace(id, std::move(r)).first->second;
  }

  Item& add_item(const std::string& id, const std::string& category, const std::string& in_rec) {
    Item it{id, category};
    auto& stored = items.emplace(id, std::move(it)).first->second;
    receptacles.at(in_rec).items.push_back(id);
    return stored;
  }

  const Vocabulary& vocabulary() const override { return household_vocabulary(); }

  // Universe plus initially perceivable facts: every receptacle is
  // reachable, and items on exposed surfaces are in view. Openable
  // receptacles reveal status and contents only on visit.
  SymbolicState initial_state() const override {
    SymbolicState z;
    for (const auto& [id, r] : receptacles) {
      z.register_object("Receptacle", id);
      z.register_object(r.category, id);
      for (const auto& c : r.extra_categories) z.register_object(c, id);
      z.register_object("ReceptacleType", r.category);
      z.atoms.insert({"reachable", {Value::object(id)}});
      if (!r.openable)
        for (const auto& i : r.items)
          z.atoms.insert({"contains", {Value::object(id), Value::object(i)}});
    }
    for (const auto& [id, it] : items) {
      z.register_object("Item", id);
      z.register_object(it.category, id);
      z.register_object("ItemType", it.category);
    }
    // Self-knowledge: the agent always knows its pose and what it holds.
    if (!agent_at.empty()) z.atoms.insert({"locates", {Value::object(agent_at)}});
    if (!held.empty()) z.atoms.insert({"holding", {Value::object(held)}});
    return z;
  }

  // The full predicate projection of the true state, honoring visibility:
  // closed receptacles hide their contents. Oracle soundness is checked
  // against this projection with everything visible.
  SymbolicState truth_projection(bool include_hidden = false) const {
    SymbolicState z = initial_state();
    if (!agent_at.empty()) z.atoms.insert({"locates", {Value::object(agent_at)}});
    if (!held.empty()) z.atoms.insert({"holding", {Value::object(held)}});
    for (const auto& [id, r] : receptacles) {
      if (r.openable)
        z.atoms.insert({r.open ? "is_open" : "is_closed", {Value::object(id)}});
      if (include_hidden || !r.openable || r.open)
        for (const auto& i : r.items)
          z.atoms.insert({"contains", {Value::object(id), Value::object(i)}});
    }
    for (const auto& [id, it] : items) {
      if (it.cleaned) z.atoms.insert({"is_cleaned", {Value::object(id)}});
      if (it.heated) z.atoms.insert({"is_heated", {Value::object(id)}});
      if (it.cooled) z.atoms.insert({"is_cooled", {Value::object(id)}});
      if (it.turned_on) z.atoms.insert({"is_turned_on", {Value::object(id)}});
    }
    return z;
  }

  ActionResult perform(const std::string& action) override {
    std::vector<std::string> tok = tokens(action);
    if (tok.size() == 3 && tok[0] == "go" && tok[1] == "to") return do_goto(tok[2]);
    if (tok.size() == 2 && tok[0] == "open") return do_open(tok[1]);
    if (tok.size() == 4 && tok[0] == "take" && tok[2] == "from") return do_take(tok[1], tok[3]);
    if (tok.size() == 4 && tok[0] == "move" && tok[2] == "to") return do_move(tok[1], tok[3]);
    if (tok.size() == 4 && tok[0] == "clean" && tok[2] == "with")
      return do_treat(tok[1], tok[3], "washstation");
    if (tok.size() == 4 && tok[0] == "heat" && tok[2] == "with")
      return do_treat(tok[1], tok[3], "heater");
    if (tok.size() == 4 && tok[0] == "cool" && tok[2] == "with")
      return do_treat(tok[1], tok[3], "cooler");
    if (tok.size() == 2 && tok[0] == "use") return do_use(tok[1]);
    throw UnknownAction(action);
  }

  Expr action_precondition(const std::string& action) const override {
    const Vocabulary& v = vocabulary();
    std::vector<std::string> tok = tokens(action);
    auto parse = [&](const std::string& t) { return parse_expression(t, v); };
    auto hand_empty = "not exists('Item', lambda x: holding(x))";
    if (tok.size() == 3 && tok[0] == "go" && tok[1] == "to") return parse("reachable(" + tok[2] + ")");
    if (tok.size() == 2 && tok[0] == "open")
      return parse("locates(" + tok[1] + ") and is_closed(" + tok[1] + ")");
    if (tok.size() == 4 && tok[0] == "take") {
      std::string open_clause = needs_open(tok[3]) ? " and is_open(" + tok[3] + ")" : "";
      return parse("locates(" + tok[3] + ") and contains(" + tok[3] + ", " + tok[1] + ")" +
                   open_clause + " and " + hand_empty);
    }
    if (tok.size() == 4 && tok[0] == "move") {
      std::string open_clause = needs_open(tok[3]) ? " and is_open(" + tok[3] + ")" : "";
      return parse("holding(" + tok[1] + ") and locates(" + tok[3] + ")" + open_clause);
    }
    if (tok.size() == 4 && (tok[0] == "clean" || tok[0] == "heat" || tok[0] == "cool")) {
      std::string cat = tok[0] == "clean" ? "washstation" : tok[0] == "heat" ? "heater" : "cooler";
      return parse("holding(" + tok[1] + ") and locates(" + tok[3] + ") and is_type(" + tok[3] +
                   ", '" + cat + "')");
    }
    if (tok.size() == 2 && tok[0] == "use")
      return parse("holding(" + tok[1] + ") or exists('Receptacle', lambda r: locates(r) and contains(r, " +
                   tok[1] + "))");
    throw UnknownAction(action);
  }

 private:
  static std::vector<std::string> tokens(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string t;
    while (in >> t) out.push_back(t);
    return out;
  }

  bool needs_open(const std::string& rec) const {
    auto it = receptacles.find(rec);
    return it != receptacles.end() && it->second.openable;
  }

  static ActionResult nothing() { return {"Nothing happens.", false, {}}; }

  static GroundAtom a1(const std::string& p, const std::string& x) {
    return {p, {Value::object(x)}};
  }
  static GroundAtom a2(const std::string& p, const std::string& x, const std::string& y) {
    return {p, {Value::object(x), Value::object(y)}};
  }

  std::string list_items(const Receptacle& r) const {
    if (r.items.empty()) return "nothing";
    std::string out;
    for (std::size_t i = 0; i < r.items.size(); ++i) {
      if (i) out += i + 1 == r.items.size() ? " and " : ", ";
      out += "a " + r.items[i];
    }
    return out;
  }

  ActionResult do_goto(const std::string& rec) {
    auto it = receptacles.find(rec);
    if (it == receptacles.end()) return nothing();
    const Receptacle& r = it->second;
    ActionResult res;
    res.success = true;
    if (!agent_at.empty() && agent_at != rec)
      res.raw_event.remove_facts.push_back(a1("locates", agent_at));
    agent_at = rec;
    res.raw_event.add_facts.push_back(a1("locates", rec));
    std::ostringstream obs;
    obs << "You arrive at the " << rec << ".";
    if (r.openable && !r.open) {
      obs << " The " << rec << " is closed.";
      res.raw_event.add_facts.push_back(a1("is_closed", rec));
    } else {
      if (r.openable) {
        obs << " The " << rec << " is open.";
        res.raw_event.add_facts.push_back(a1("is_open", rec));
      }
      obs << " " << (r.openable ? "In" : "On") << " the " << rec << ", you see " << list_items(r)
          << ".";
      for (const auto& i : r.items) res.raw_event.add_facts.push_back(a2("contains", rec, i));
    }
    res.observation = obs.str();
    return res;
  }

  ActionResult do_open(const std::string& rec) {
    auto it = receptacles.find(rec);
    if (it == receptacles.end() || agent_at != rec || !it->second.openable || it->second.open)
      return nothing();
    it->second.open = true;
    ActionResult res;
    res.success = true;
    std::ostringstream obs;
    obs << "You open the " << rec << ". The " << rec << " is open. In it, you see "
        << list_items(it->second) << ".";
    res.observation = obs.str();
    res.raw_event.add_facts.push_back(a1("is_open", rec));
    res.raw_event.remove_facts.push_back(a1("is_closed", rec));
    for (const auto& i : it->second.items)
      res.raw_event.add_facts.push_back(a2("contains", rec, i));
    return res;
  }

  ActionResult do_take(const std::string& item, const std::string& rec) {
    auto rit = receptacles.find(rec);
    if (rit == receptacles.end() || agent_at != rec || !held.empty()) return nothing();
    Receptacle& r = rit->second;
    if (r.openable && !r.open) return nothing();
    auto pos = std::find(r.items.begin(), r.items.end(), item);
    if (pos == r.items.end()) return nothing();
    r.items.erase(pos);
    held = item;
    ActionResult res;
    res.success = true;
    res.observation = "You pick up the " + item + " from the " + rec + ".";
    res.raw_event.add_facts.push_back(a1("holding", item));
    res.raw_event.remove_facts.push_back(a2("contains", rec, item));
    return res;
  }

  ActionResult do_move(const std::string& item, const std::string& rec) {
    auto rit = receptacles.find(rec);
    if (rit == receptacles.end() || agent_at != rec || held != item) return nothing();
    Receptacle& r = rit->second;
    if (r.openable && !r.open) return nothing();
    r.items.push_back(item);
    held.clear();
    ActionResult res;
    res.success = true;
    res.observation = "You move the " + item + " to the " + rec + ".";
    res.raw_event.add_facts.push_back(a2("contains", rec, item));
    res.raw_event.remove_facts.push_back(a1("holding", item));
    return res;
  }

  ActionResult do_treat(const std::string& item, const std::string& rec, const std::string& cap) {
    auto rit = receptacles.find(rec);
    if (rit == receptacles.end() || agent_at != rec || held != item) return nothing();
    const Receptacle& r = rit->second;
    bool capable = std::find(r.extra_categories.begin(), r.extra_categories.end(), cap) !=
                   r.extra_categories.end();
    if (!capable) return nothing();
    Item& it = items.at(item);
    ActionResult res;
    res.success = true;
    if (cap == "washstation") {
      it.cleaned = true;
      res.observation = "You clean the " + item + " using the " + rec + ".";
      res.raw_event.add_facts.push_back(a1("is_cleaned", item));
    } else if (cap == "heater") {
      it.heated = true;
      res.observation = "You heat the " + item + " using the " + rec + ".";
      res.raw_event.add_facts.push_back(a1("is_heated", item));
      if (it.cooled) {
        it.cooled = false;
        res.raw_event.remove_facts.push_back(a1("is_cooled", item));
      }
    } else {
      it.cooled = true;
      res.observation = "You cool the " + item + " using the " + rec + ".";
      res.raw_event.add_facts.push_back(a1("is_cooled", item));
      if (it.heated) {
        it.heated = false;
        res.raw_event.remove_facts.push_back(a1("is_heated", item));
      }
    }
    return res;
  }

  ActionResult do_use(const std::string& item) {
    auto iit = items.find(item);
    if (iit == items.end()) return nothing();
    bool at_hand = held == item;
    if (!at_hand && !agent_at.empty()) {
      const auto& here = receptacles.at(agent_at).items;
      at_hand = std::find(here.begin(), here.end(), item) != here.end() &&
                (!receptacles.at(agent_at).openable || receptacles.at(agent_at).open);
    }
    if (!at_hand) return nothing();
    iit->second.turned_on = true;
    ActionResult res;
    res.success = true;
    res.observation = "You turn on the " + item + ".";
    res.raw_event.add_facts.push_back(a1("is_turned_on", item));
    return res;
  }
};

}  // namespace nsi
