#pragma once

// Sub-goal contracts: the parameter signature plus start/success
// conditions, expressed over the parameters. Induced skills inherit these
// into their docstrings.

#include <map>
#include <string>
#include <vector>

#include "nsi/graph/graph.hpp"
#include "nsi/logic/parser.hpp"
#include "nsi/world/craft.hpp"
#include "nsi/world/household.hpp"

namespace nsi {

struct SubGoalSpec {
  std::string name;
  std::vector<Param> params;
  std::vector<Expr> start_conditions;
  std::vector<Expr> success_conditions;
  std::string description;
};

class SubGoalRegistry {
 public:
  const SubGoalSpec* find(const std::string& name) const {
    auto it = specs_.find(name);
    return it == specs_.end() ? nullptr : &it->second;
  }
  const SubGoalSpec& require(const std::string& name) const {
    if (auto* s = find(name)) return *s;
    throw Error("unknown sub-goal: " + name);
  }
  const std::map<std::string, SubGoalSpec>& all() const { return specs_; }

  void add(SubGoalSpec s) { specs_.emplace(s.name, std::move(s)); }

  static const SubGoalRegistry& household() {
    static const SubGoalRegistry r = make_household();
    return r;
  }
  static const SubGoalRegistry& craft() {
    static const SubGoalRegistry r = make_craft();
    return r;
  }
  static const SubGoalRegistry& for_domain(const std::string& domain) {
    if (domain == "household") return household();
    if (domain == "craft") return craft();
    throw Error("unknown domain: " + domain);
  }

 private:
  std::map<std::string, SubGoalSpec> specs_;

  static SubGoalRegistry make_household() {
    const Vocabulary& v = household_vocabulary();
    auto e = [&](const std::string& t) { return parse_expression(t, v); };
    SubGoalRegistry r;
    r.add({"retrieve_item_of_type",
           {{"TARGET_ITEM_TYPE", "ItemType"}},
           {e("not exists('Item', lambda x: holding(x))"),
            e("exists('Item', lambda x: is_type(x, TARGET_ITEM_TYPE))")},
           {e("exists('Item', lambda x: holding(x) and is_type(x, TARGET_ITEM_TYPE))")},
           "locate an item of the requested type and pick it up"});
    r.add({"deliver_held_item",
           {{"TARGET_REC_TYPE", "ReceptacleType"}},
           {e("exists('Item', lambda x: holding(x))"),
            e("exists('Receptacle', lambda r: is_type(r, TARGET_REC_TYPE))")},
           {e("not exists('Item', lambda x: holding(x))"),
            e("exists('Receptacle', lambda r: is_type(r, TARGET_REC_TYPE) and "
              "exists('Item', lambda y: contains(r, y)))")},
           "carry the held item to a receptacle of the requested type and put it there"});
    r.add({"wash_held_item",
           {},
           {e("exists('Item', lambda x: holding(x))"),
            e("exists('Receptacle', lambda r: is_type(r, 'washstation'))")},
           {e("exists('Item', lambda x: holding(x) and is_cleaned(x))")},
           "clean the held item at a washing station"});
    r.add({"heat_held_item",
           {},
           {e("exists('Item', lambda x: holding(x))"),
            e("exists('Receptacle', lambda r: is_type(r, 'heater'))")},
           {e("exists('Item', lambda x: holding(x) and is_heated(x))")},
           "heat the held item at a heating appliance"});
    r.add({"cool_held_item",
           {},
           {e("exists('Item', lambda x: holding(x))"),
            e("exists('Receptacle', lambda r: is_type(r, 'cooler'))")},
           {e("exists('Item', lambda x: holding(x) and is_cooled(x))")},
           "cool the held item at a cooling appliance"});
    r.add({"illuminate_held_item",
           {},
           {e("exists('Item', lambda x: holding(x))"),
            e("exists('Item', lambda l: is_type(l, 'desklamp'))")},
           {e("exists('Item', lambda x: holding(x))"),
            e("exists('Item', lambda l: is_type(l, 'desklamp') and is_turned_on(l))")},
           "bring the held item to a desk lamp and switch the lamp on"});
    r.add({"survey_storage",
           {},
           {e("exists('Receptacle', lambda r: is_type(r, 'drawer'))")},
           {e("not exists('Receptacle', lambda r: is_type(r, 'drawer') and not is_open(r))")},
           "visit and open every storage drawer"});
    return r;
  }

  static SubGoalRegistry make_craft() {
    const Vocabulary& v = craft_vocabulary();
    auto e = [&](const std::string& t) { return parse_expression(t, v); };
    SubGoalRegistry r;
    r.add({"acquire_and_craft",
           {{"TARGET_ITEM", "ItemName"}, {"INGREDIENTS", "List_ItemName"}},
           {e("not unavailable(TARGET_ITEM)")},
           {e("count(TARGET_ITEM) > 0")},
           "gather the listed ingredients and craft the target item"});
    return r;
  }
};

}  // namespace nsi
