#pragma once

// Crafting environment: an acyclic recipe book, an inventory, and a goal.
// Base items are gathered with `get`, composites built with `craft`.

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nsi/logic/parser.hpp"
#include "nsi/world/iface.hpp"

namespace nsi {

inline const Vocabulary& craft_vocabulary() {
  static const Vocabulary v = [] {
    Vocabulary vv;
    vv.boolean_with_num("inventory")
        .boolean_with_num("goal")
        .boolean("unavailable", 1)
        .attribute("count", "inventory")
        .type_check("is_type");
    return vv;
  }();
  return v;
}

class CraftWorld : public WorldInterface {
 public:
  std::map<std::string, std::vector<std::pair<std::string, int>>> recipes;
  std::map<std::string, int> inventory;
  std::pair<std::string, int> goal{"", 1};
  std::set<std::string> unavailable;

  void add_recipe(const std::string& item, std::vector<std::pair<std::string, int>> inputs) {
    recipes[item] = std::move(inputs);
  }

  bool is_base(const std::string& item) const { return !recipes.count(item); }

  std::set<std::string> all_items() const {
    std::set<std::string> out;
    for (const auto& [item, inputs] : recipes) {
      out.insert(item);
      for (const auto& [in, k] : inputs) out.insert(in);
    }
    if (!goal.first.empty()) out.insert(goal.first);
    for (const auto& [i, n] : inventory) out.insert(i);
    return out;
  }

  const Vocabulary& vocabulary() const override { return craft_vocabulary(); }

  SymbolicState initial_state() const override {
    SymbolicState z;
    for (const auto& item : all_items()) {
      z.register_object("Item", item);
      z.register_object(is_base(item) ? "base_item" : "craftable_item", item);
    }
    if (!goal.first.empty())
      z.atoms.insert({"goal", {Value::object(goal.first), Value::number(Rational(goal.second))}});
    for (const auto& u : unavailable) z.atoms.insert({"unavailable", {Value::object(u)}});
    for (const auto& [item, n] : inventory)
      if (n > 0) {
        z.atoms.insert({"inventory", {Value::object(item), Value::number(Rational(n))}});
        z.attributes[{"count", item}] = Rational(n);
      }
    return z;
  }

  SymbolicState truth_projection(bool = false) const { return initial_state(); }

  ActionResult perform(const std::string& action) override {
    std::istringstream in(action);
    std::string verb, item;
    in >> verb >> item;
    std::string extra;
    if (in >> extra) throw UnknownAction(action);
    if (verb == "get") return do_get(item);
    if (verb == "craft") return do_craft(item);
    throw UnknownAction(action);
  }

  Expr action_precondition(const std::string& action) const override {
    std::istringstream in(action);
    std::string verb, item;
    in >> verb >> item;
    const Vocabulary& v = vocabulary();
    if (verb == "get")
      return parse_expression(
          "is_type('" + item + "', 'base_item') and not unavailable('" + item + "')", v);
    if (verb == "craft") {
      auto it = recipes.find(item);
      if (it == recipes.end()) return parse_expression("false", v);
      std::string cond;
      for (const auto& [in_item, k] : it->second) {
        if (!cond.empty()) cond += " and ";
        cond += "count('" + in_item + "') > " + std::to_string(k - 1);
      }
      return parse_expression(cond.empty() ? "true" : cond, v);
    }
    throw UnknownAction(action);
  }

 private:
  static ActionResult nothing() { return {"Nothing happens.", false, {}}; }

  ActionResult set_count(const std::string& item, int old_n, int new_n, ActionResult res) {
    if (old_n > 0)
      res.raw_event.remove_facts.push_back(
          {"inventory", {Value::object(item), Value::number(Rational(old_n))}});
    if (new_n > 0)
      res.raw_event.add_facts.push_back(
          {"inventory", {Value::object(item), Value::number(Rational(new_n))}});
    return res;
  }

  ActionResult do_get(const std::string& item) {
    if (!is_base(item) || unavailable.count(item)) return nothing();
    int old_n = stock(item);
    inventory[item] = old_n + 1;
    ActionResult res;
    res.success = true;
    res.observation = "You get 1 " + item + ".";
    return set_count(item, old_n, old_n + 1, std::move(res));
  }

  int stock(const std::string& item) const {
    auto it = inventory.find(item);
    return it == inventory.end() ? 0 : it->second;
  }

  ActionResult do_craft(const std::string& item) {
    auto it = recipes.find(item);
    if (it == recipes.end()) return nothing();
    for (const auto& [in_item, k] : it->second)
      if (stock(in_item) < k) return nothing();
    ActionResult res;
    res.success = true;
    res.observation = "You craft 1 " + item + ".";
    for (const auto& [in_item, k] : it->second) {
      int old_n = stock(in_item);
      inventory[in_item] = old_n - k;
      res = set_count(in_item, old_n, old_n - k, std::move(res));
    }
    int old_n = stock(item);
    inventory[item] = old_n + 1;
    return set_count(item, old_n, old_n + 1, std::move(res));
  }
};

}  // namespace nsi
