#pragma once

// Task families, the seeded instance generator, scripted experts, and
// demonstration recording. Six household families plus depth-bounded
// crafting tasks; every generated instance is solvable by its expert.

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nsi/logic/eval.hpp"
#include "nsi/world/craft.hpp"
#include "nsi/world/household.hpp"
#include "nsi/world/rng.hpp"
#include "nsi/world/subgoals.hpp"
#include "nsi/world/trace.hpp"

namespace nsi {

struct ExpertFailed : Error {
  explicit ExpertFailed(const std::string& why) : Error("scripted expert failed: " + why) {}
};

// One planned sub-goal invocation: name plus parameter bindings.
struct PlannedSubGoal {
  std::string sub_goal;
  std::map<std::string, Value> bindings;
};

struct TaskInstance {
  std::string domain;
  std::string family;
  std::string description;
  std::vector<PlannedSubGoal> plan;
  Expr goal;  // ground goal condition over the final symbolic state
};

inline const std::vector<std::string>& household_families() {
  static const std::vector<std::string> fams = {
      "pick_and_place",      "pick_clean_then_place", "pick_heat_then_place",
      "pick_cool_then_place", "look_at_obj_in_light",  "pick_two_obj_and_place"};
  return fams;
}

// ---------------------------------------------------------------------------
// Household instances

struct HouseholdInstance {
  HouseholdWorld world;
  TaskInstance task;
};

namespace task_detail {

inline Expr household_goal(const std::string& family, const std::string& item_type,
                           const std::string& rec_type) {
  const Vocabulary& v = household_vocabulary();
  std::string placed = "exists('Receptacle', lambda r: is_type(r, '" + rec_type +
                       "') and exists('Item', lambda x: contains(r, x) and is_type(x, '" +
                       item_type + "')";
  if (family == "pick_and_place") return parse_expression(placed + "))", v);
  if (family == "pick_clean_then_place")
    return parse_expression(placed + " and is_cleaned(x)))", v);
  if (family == "pick_heat_then_place")
    return parse_expression(placed + " and is_heated(x)))", v);
  if (family == "pick_cool_then_place")
    return parse_expression(placed + " and is_cooled(x)))", v);
  if (family == "look_at_obj_in_light")
    return parse_expression("exists('Item', lambda x: holding(x) and is_type(x, '" + item_type +
                                "')) and exists('Item', lambda l: is_type(l, 'desklamp') and "
                                "is_turned_on(l))",
                            v);
  if (family == "pick_two_obj_and_place")
    return parse_expression(
        "exists('Receptacle', lambda r: is_type(r, '" + rec_type +
            "') and exists('Item', lambda x: contains(r, x) and is_type(x, '" + item_type +
            "') and exists('Item', lambda y: contains(r, y) and is_type(y, '" + item_type +
            "') and not y == x)))",
        v);
  throw Error("unknown household family: " + family);
}

}  // namespace task_detail

// The standard room: fixed receptacle roster, seeded item placement. The
// washstation variant alternates between two station categories so
// demonstrations exercise functionally equivalent stations.
inline HouseholdInstance make_household_instance(const std::string& family, std::uint64_t seed) {
  SeededRng rng(seed * 1000003 + 17);
  HouseholdWorld w;
  w.add_receptacle("countertop_1", "countertop");
  w.add_receptacle("diningtable_1", "diningtable");
  w.add_receptacle("sidetable_1", "sidetable");
  w.add_receptacle("dresser_1", "dresser");
  w.add_receptacle("garbagecan_1", "garbagecan");
  w.add_receptacle("desk_1", "desk");
  w.add_receptacle("microwave_1", "microwave", false, true, {"heater"});
  w.add_receptacle("fridge_1", "fridge", true, rng.chance(50), {"cooler"});
  w.add_receptacle("drawer_1", "drawer", true, false);
  w.add_receptacle("drawer_2", "drawer", true, false);
  if (seed % 2 == 0)
    w.add_receptacle("sinkbasin_1", "sinkbasin", false, true, {"washstation"});
  else
    w.add_receptacle("bathtubbasin_1", "bathtubbasin", false, true, {"washstation"});
  w.add_item("desklamp_1", "desklamp", "desk_1");

  std::vector<std::string> exposed = {"countertop_1", "diningtable_1", "sidetable_1", "dresser_1"};
  std::vector<std::string> item_types = {"apple", "mug", "egg", "book", "cellphone", "plate",
                                         "keychain"};
  std::vector<std::string> dest_types = {"countertop", "diningtable", "sidetable", "garbagecan",
                                         "dresser"};

  std::string item_type = rng.pick(item_types);
  std::string source = rng.pick(exposed);
  std::string dest_type = rng.pick(dest_types);
  // The destination must not be where the item already sits.
  while (source.rfind(dest_type, 0) == 0) dest_type = rng.pick(dest_types);
  if (family == "pick_two_obj_and_place") dest_type = "garbagecan";

  w.add_item(item_type + "_1", item_type, source);
  if (family == "pick_two_obj_and_place") {
    std::string source2 = rng.pick(exposed);
    while (source2.rfind(dest_type, 0) == 0) source2 = rng.pick(exposed);
    w.add_item(item_type + "_2", item_type, source2);
  }
  // A distractor item of another type.
  std::string other_type = rng.pick(item_types);
  while (other_type == item_type) other_type = rng.pick(item_types);
  w.add_item(other_type + "_1", other_type, rng.pick(exposed));

  TaskInstance t;
  t.domain = "household";
  t.family = family;
  t.goal = task_detail::household_goal(family, item_type, dest_type);
  auto retrieve = [&]() {
    t.plan.push_back({"retrieve_item_of_type", {{"TARGET_ITEM_TYPE", Value::object(item_type)}}});
  };
  auto deliver = [&]() {
    t.plan.push_back({"deliver_held_item", {{"TARGET_REC_TYPE", Value::object(dest_type)}}});
  };
  if (family == "pick_and_place") {
    t.description = "put a " + item_type + " on the " + dest_type;
    retrieve();
    deliver();
  } else if (family == "pick_clean_then_place") {
    t.description = "put a clean " + item_type + " on the " + dest_type;
    retrieve();
    t.plan.push_back({"wash_held_item", {}});
    deliver();
  } else if (family == "pick_heat_then_place") {
    t.description = "put a hot " + item_type + " on the " + dest_type;
    retrieve();
    t.plan.push_back({"heat_held_item", {}});
    deliver();
  } else if (family == "pick_cool_then_place") {
    t.description = "put a cool " + item_type + " on the " + dest_type;
    retrieve();
    t.plan.push_back({"cool_held_item", {}});
    deliver();
  } else if (family == "look_at_obj_in_light") {
    t.description = "examine the " + item_type + " under the desklamp";
    retrieve();
    t.plan.push_back({"illuminate_held_item", {}});
  } else if (family == "pick_two_obj_and_place") {
    t.description = "put two " + item_type + "s in the " + dest_type;
    retrieve();
    deliver();
    retrieve();
    deliver();
  } else {
    throw Error("unknown household family: " + family);
  }
  return {std::move(w), std::move(t)};
}

// ---------------------------------------------------------------------------
// Craft instances

struct CraftInstance {
  CraftWorld world;
  TaskInstance task;
};

inline void standard_recipes(CraftWorld& w) {
  w.add_recipe("wooden_plank", {{"log", 1}});
  w.add_recipe("stick", {{"wooden_plank", 2}});
  w.add_recipe("torch", {{"coal", 1}, {"stick", 1}});
  w.add_recipe("crafting_table", {{"wooden_plank", 4}});
  w.add_recipe("furnace", {{"cobblestone", 8}});
  w.add_recipe("glass", {{"sand", 1}});
}

// Ordered sub-goal plan for a craft target: post-order over the recipe
// tree down to base items, one acquire_and_craft per composite.
inline void craft_plan_into(const CraftWorld& w, const std::string& target,
                            std::vector<PlannedSubGoal>* plan) {
  auto it = w.recipes.find(target);
  if (it == w.recipes.end()) return;  // base item, gathered by the parent
  std::vector<Value> ingredients;
  for (const auto& [in_item, k] : it->second) {
    if (!w.is_base(in_item))
      for (int rep = 0; rep < k; ++rep) craft_plan_into(w, in_item, plan);
    for (int rep = 0; rep < k; ++rep)
      if (w.is_base(in_item)) ingredients.push_back(Value::object(in_item));
  }
  plan->push_back({"acquire_and_craft",
                   {{"TARGET_ITEM", Value::object(target)},
                    {"INGREDIENTS", Value::list(ValueKind::Object, ingredients)}}});
}

inline CraftInstance make_craft_instance(const std::string& target, std::uint64_t seed) {
  (void)seed;
  CraftWorld w;
  standard_recipes(w);
  w.goal = {target, 1};
  TaskInstance t;
  t.domain = "craft";
  t.family = "craft_goal";
  t.description = "craft 1 " + target;
  craft_plan_into(w, target, &t.plan);
  t.goal = parse_expression("count('" + target + "') > 0", craft_vocabulary());
  return {std::move(w), std::move(t)};
}

// ---------------------------------------------------------------------------
// Scripted experts

namespace task_detail {

struct Recorder {
  WorldInterface& world;
  SymbolicState z;
  Trace trace;
  GrounderFn grounder = oracle_grounder();

  explicit Recorder(WorldInterface& w) : world(w), z(w.initial_state()) { trace.initial = z; }

  void act(const std::string& action) {
    ActionResult r = world.perform(action);
    if (!r.success) throw ExpertFailed("action '" + action + "' bounced: " + r.observation);
    FactDelta d = grounder(z, action, r);
    z = apply_fact_delta(world.vocabulary(), z, d);
    trace.steps.push_back({action, r.observation, d});
  }

  void mark_segment(const std::string& sub_goal, std::map<std::string, Value> bindings,
                    std::size_t start) {
    if (trace.steps.size() == start) throw ExpertFailed("empty segment for " + sub_goal);
    trace.segments.push_back({sub_goal, std::move(bindings), start, trace.steps.size()});
  }
};

inline std::string find_item_of_type(const HouseholdWorld& w, const std::string& type,
                                     const std::string& avoid_rec_category) {
  std::vector<std::string> candidates;
  for (const auto& [id, it] : w.items) {
    if (it.category != type) continue;
    if (w.held == id) continue;
    for (const auto& [rid, r] : w.receptacles) {
      if (std::find(r.items.begin(), r.items.end(), id) == r.items.end()) continue;
      if (!avoid_rec_category.empty() && r.category == avoid_rec_category) continue;
      candidates.push_back(id);
    }
  }
  std::sort(candidates.begin(), candidates.end());
  if (candidates.empty()) throw ExpertFailed("no item of type " + type + " to retrieve");
  return candidates.front();
}

inline std::string rec_holding_item(const HouseholdWorld& w, const std::string& item) {
  for (const auto& [rid, r] : w.receptacles)
    if (std::find(r.items.begin(), r.items.end(), item) != r.items.end()) return rid;
  throw ExpertFailed("item " + item + " is nowhere");
}

inline std::string first_rec_of_category(const HouseholdWorld& w, const std::string& category,
                                         bool super = false) {
  std::vector<std::string> ids;
  for (const auto& [rid, r] : w.receptacles) {
    bool match = r.category == category;
    if (super)
      match = match || std::find(r.extra_categories.begin(), r.extra_categories.end(), category) !=
                           r.extra_categories.end();
    if (match) ids.push_back(rid);
  }
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) throw ExpertFailed("no receptacle of category " + category);
  return ids.front();
}

inline void expert_goto(Recorder& rec, HouseholdWorld& w, const std::string& target) {
  if (w.agent_at != target) rec.act("go to " + target);
}

inline void expert_retrieve(Recorder& rec, HouseholdWorld& w, const std::string& item_type,
                            const std::string& avoid_rec_category) {
  std::size_t start = rec.trace.steps.size();
  std::string item = find_item_of_type(w, item_type, avoid_rec_category);
  std::string at = rec_holding_item(w, item);
  expert_goto(rec, w, at);
  if (w.receptacles.at(at).openable && !w.receptacles.at(at).open) rec.act("open " + at);
  rec.act("take " + item + " from " + at);
  rec.mark_segment("retrieve_item_of_type", {{"TARGET_ITEM_TYPE", Value::object(item_type)}},
                   start);
}

inline void expert_deliver(Recorder& rec, HouseholdWorld& w, const std::string& rec_type) {
  std::size_t start = rec.trace.steps.size();
  std::string item = w.held;
  if (item.empty()) throw ExpertFailed("deliver with empty hand");
  std::string dest = first_rec_of_category(w, rec_type);
  expert_goto(rec, w, dest);
  if (w.receptacles.at(dest).openable && !w.receptacles.at(dest).open) rec.act("open " + dest);
  rec.act("move " + item + " to " + dest);
  rec.mark_segment("deliver_held_item", {{"TARGET_REC_TYPE", Value::object(rec_type)}}, start);
}

inline void expert_treat(Recorder& rec, HouseholdWorld& w, const std::string& capability,
                         const std::string& verb, const std::string& sub_goal) {
  std::size_t start = rec.trace.steps.size();
  std::string item = w.held;
  if (item.empty()) throw ExpertFailed(sub_goal + " with empty hand");
  std::string station = first_rec_of_category(w, capability, true);
  expert_goto(rec, w, station);
  rec.act(verb + " " + item + " with " + station);
  rec.mark_segment(sub_goal, {}, start);
}

inline void expert_illuminate(Recorder& rec, HouseholdWorld& w) {
  std::size_t start = rec.trace.steps.size();
  std::string lamp;
  for (const auto& [id, it] : w.items)
    if (it.category == "desklamp") { lamp = id; break; }
  if (lamp.empty()) throw ExpertFailed("no desklamp in world");
  expert_goto(rec, w, rec_holding_item(w, lamp));
  rec.act("use " + lamp);
  rec.mark_segment("illuminate_held_item", {}, start);
}

}  // namespace task_detail

// Run the scripted expert for a household instance, recording a trace with
// sub-goal segment annotations.
inline Trace household_expert_demonstrate(HouseholdInstance inst, const std::string& trace_id) {
  using namespace task_detail;
  HouseholdWorld& w = inst.world;
  Recorder rec(w);
  rec.trace.id = trace_id;
  rec.trace.domain = "household";
  rec.trace.task = inst.task.description;

  std::string dest_category;
  for (const auto& sg : inst.task.plan)
    if (sg.sub_goal == "deliver_held_item")
      dest_category = sg.bindings.at("TARGET_REC_TYPE").as_object();

  for (const auto& sg : inst.task.plan) {
    if (sg.sub_goal == "retrieve_item_of_type")
      expert_retrieve(rec, w, sg.bindings.at("TARGET_ITEM_TYPE").as_object(),
                      inst.task.family == "pick_two_obj_and_place" ? dest_category : "");
    else if (sg.sub_goal == "deliver_held_item")
      expert_deliver(rec, w, sg.bindings.at("TARGET_REC_TYPE").as_object());
    else if (sg.sub_goal == "wash_held_item")
      expert_treat(rec, w, "washstation", "clean", "wash_held_item");
    else if (sg.sub_goal == "heat_held_item")
      expert_treat(rec, w, "heater", "heat", "heat_held_item");
    else if (sg.sub_goal == "cool_held_item")
      expert_treat(rec, w, "cooler", "cool", "cool_held_item");
    else if (sg.sub_goal == "illuminate_held_item")
      expert_illuminate(rec, w);
    else
      throw ExpertFailed("no expert for sub-goal " + sg.sub_goal);
  }

  Scope scope;
  if (!eval_condition(inst.task.goal, scope, rec.z))
    throw ExpertFailed("task goal unsatisfied after demonstration");
  validate_segments(rec.trace);
  return rec.trace;
}

inline Trace craft_expert_demonstrate(CraftInstance inst, const std::string& trace_id) {
  using namespace task_detail;
  CraftWorld& w = inst.world;
  Recorder rec(w);
  rec.trace.id = trace_id;
  rec.trace.domain = "craft";
  rec.trace.task = inst.task.description;

  for (const auto& sg : inst.task.plan) {
    if (sg.sub_goal != "acquire_and_craft") throw ExpertFailed("no expert for " + sg.sub_goal);
    std::size_t start = rec.trace.steps.size();
    const auto& ingredients = sg.bindings.at("INGREDIENTS").as_list().items;
    for (const auto& in_item : ingredients) rec.act("get " + in_item.as_object());
    rec.act("craft " + sg.bindings.at("TARGET_ITEM").as_object());
    rec.mark_segment("acquire_and_craft", sg.bindings, start);
  }

  Scope scope;
  if (!eval_condition(inst.task.goal, scope, rec.z))
    throw ExpertFailed("craft goal unsatisfied after demonstration");
  validate_segments(rec.trace);
  return rec.trace;
}

// ---------------------------------------------------------------------------
// Dedicated scenario worlds

// Fridge variant pair: the target item sits in the fridge, which starts
// open or closed. Retrieval demos from the two variants exercise latent
// branch discovery.
inline HouseholdInstance make_fridge_scenario(bool fridge_closed) {
  HouseholdWorld w;
  w.add_receptacle("countertop_1", "countertop");
  w.add_receptacle("garbagecan_1", "garbagecan");
  w.add_receptacle("fridge_1", "fridge", true, !fridge_closed, {"cooler"});
  w.add_item("apple_1", "apple", "fridge_1");
  TaskInstance t;
  t.domain = "household";
  t.family = "fridge_retrieval";
  t.description = "take the apple from the fridge";
  t.plan.push_back({"retrieve_item_of_type", {{"TARGET_ITEM_TYPE", Value::object("apple")}}});
  t.goal = parse_expression("exists('Item', lambda x: holding(x) and is_type(x, 'apple'))",
                            household_vocabulary());
  return {std::move(w), std::move(t)};
}

// Washing-station variant: the only washstation in the world carries the
// given category. Used for lifting across functionally equivalent
// stations.
inline HouseholdInstance make_wash_scenario(const std::string& station_category) {
  HouseholdWorld w;
  w.add_receptacle("countertop_1", "countertop");
  w.add_receptacle("diningtable_1", "diningtable");
  w.add_receptacle(station_category + "_1", station_category, false, true, {"washstation"});
  w.add_item("apple_1", "apple", "countertop_1");
  TaskInstance t;
  t.domain = "household";
  t.family = "wash_item";
  t.description = "clean the apple";
  t.plan.push_back({"retrieve_item_of_type", {{"TARGET_ITEM_TYPE", Value::object("apple")}}});
  t.plan.push_back({"wash_held_item", {}});
  t.goal = parse_expression("exists('Item', lambda x: holding(x) and is_cleaned(x))",
                            household_vocabulary());
  return {std::move(w), std::move(t)};
}

// Storage survey: three closed drawers opened in sequence; the repeated
// go/open unit is loop-folding material.
inline HouseholdInstance make_survey_scenario() {
  HouseholdWorld w;
  w.add_receptacle("countertop_1", "countertop");
  w.add_receptacle("drawer_1", "drawer", true, false);
  w.add_receptacle("drawer_2", "drawer", true, false);
  w.add_receptacle("drawer_3", "drawer", true, false);
  w.add_item("keychain_1", "keychain", "drawer_3");
  TaskInstance t;
  t.domain = "household";
  t.family = "survey_storage";
  t.description = "open every drawer";
  t.plan.push_back({"survey_storage", {}});
  t.goal = parse_expression(
      "not exists('Receptacle', lambda r: is_type(r, 'drawer') and not is_open(r))",
      household_vocabulary());
  return {std::move(w), std::move(t)};
}

inline Trace survey_expert_demonstrate(HouseholdInstance inst, const std::string& trace_id) {
  using namespace task_detail;
  HouseholdWorld& w = inst.world;
  Recorder rec(w);
  rec.trace.id = trace_id;
  rec.trace.domain = "household";
  rec.trace.task = inst.task.description;
  std::size_t start = 0;
  std::vector<std::string> drawers;
  for (const auto& [id, r] : w.receptacles)
    if (r.category == "drawer") drawers.push_back(id);
  std::sort(drawers.begin(), drawers.end());
  for (const auto& d : drawers) {
    rec.act("go to " + d);
    rec.act("open " + d);
  }
  rec.mark_segment("survey_storage", {}, start);
  Scope scope;
  if (!eval_condition(inst.task.goal, scope, rec.z))
    throw ExpertFailed("survey goal unsatisfied");
  validate_segments(rec.trace);
  return rec.trace;
}

// generate_demonstrations: `count` seeded instances of one task family,
// each solved by the scripted expert. Identical seeds give identical
// traces.
inline std::vector<Trace> generate_demonstrations(const std::string& domain,
                                                  const std::string& family_or_target,
                                                  int count, std::uint64_t seed) {
  std::vector<Trace> out;
  for (int i = 0; i < count; ++i) {
    std::string id = domain + "_" + family_or_target + "_" + std::to_string(seed + i);
    if (domain == "household") {
      out.push_back(
          household_expert_demonstrate(make_household_instance(family_or_target, seed + i), id));
    } else if (domain == "craft") {
      out.push_back(craft_expert_demonstrate(make_craft_instance(family_or_target, seed + i), id));
    } else {
      throw Error("unknown domain: " + domain);
    }
  }
  return out;
}

}  // namespace nsi
