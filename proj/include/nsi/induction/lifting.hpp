#pragma once

// Variable lifting: hard-coded constants become UPPERCASE parameters, and
// each lifted parameter gets a docstring binder — a select_one over the
// conjunction of properties shared by the observed values at their
// segment-start states. The existential theta search supplies per-trace
// witnesses; the binder makes the parameter self-binding at runtime.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nsi/graph/mermaid.hpp"
#include "nsi/induction/context.hpp"
#include "nsi/induction/predicate_invention.hpp"

namespace nsi {

namespace lift_detail {

inline void collect_const_symbols(const Expr& e, std::vector<std::string>* out) {
  if (e->op == ExprOp::Const && e->value.kind() == ValueKind::Object) {
    out->push_back(e->value.as_object());
    return;
  }
  for (const auto& k : e->kids) collect_const_symbols(k, out);
}

// Distinct action-argument constants in first-use order, with the slot tag
// that names their type.
inline std::vector<std::pair<std::string, std::string>> liftable_constants(const SkillGraph& g) {
  std::vector<std::pair<std::string, std::string>> out;
  std::set<std::string> seen;
  for (const auto& id : mermaid_detail::canonical_order(g)) {
    const Node& n = g.nodes.at(id);
    if (n.kind != NodeKind::PrimitiveAction) continue;
    for (const auto& slot : template_slots(n.action_template)) {
      auto it = n.local_in.find(slot);
      if (it == n.local_in.end() || it->second.binding->op != ExprOp::Const) continue;
      if (it->second.binding->value.kind() != ValueKind::Object) continue;
      std::string sym = it->second.binding->value.as_object();
      if (seen.insert(sym).second) out.emplace_back(sym, it->second.type_tag);
    }
  }
  return out;
}

inline std::string param_base_for_tag(const std::string& tag) {
  if (tag == "ItemName") return "TARGET_ITEM";
  if (tag == "ReceptacleName") return "TARGET_RECEPTACLE";
  if (tag == "ItemType") return "TARGET_TYPE";
  if (tag == "ReceptacleType") return "TARGET_REC_TYPE";
  return "TARGET_VALUE";
}

inline std::string domain_tag_for(const std::string& tag) {
  if (tag == "ItemName") return "Item";
  if (tag == "ReceptacleName") return "Receptacle";
  if (tag == "ItemType") return "ItemType";
  if (tag == "ReceptacleType") return "ReceptacleType";
  return "Item";
}

inline void lift_everywhere(SkillGraph& g, const std::string& sym, const std::string& param) {
  for (auto& [id, n] : g.nodes) {
    for (auto& [name, b] : n.local_in) b.binding = lift_constant(b.binding, sym, param);
    for (auto& [name, w] : n.writes_global) w.expr = lift_constant(w.expr, sym, param);
    if (n.condition) n.condition = lift_constant(n.condition, sym, param);
    if (n.loop_source) n.loop_source = lift_constant(n.loop_source, sym, param);
  }
}

// One observed value of a lifted parameter: where the covering replay
// started and what the search bound it to.
struct Occurrence {
  Value value;
  Scope scope;  // earlier parameters seeded from the witness theta
  SymbolicState state;
};

// Property templates true of every occurrence: start from atoms touching
// the first occurrence's value, abstract that value to the binder
// variable, lift other scope-bound constants, and keep what holds
// everywhere (negations included).
inline std::vector<Expr> shared_properties(const std::vector<Occurrence>& occurrences,
                                           const Vocabulary& vocab) {
  if (occurrences.empty()) return {};
  const Occurrence& first = occurrences.front();
  if (first.value.kind() != ValueKind::Object) return {};

  std::vector<SymbolicState> all_states;
  for (const auto& o : occurrences) all_states.push_back(o.state);
  std::vector<Expr> pool = separator_atom_pool(all_states, vocab, first.scope);

  std::vector<Expr> templates;
  std::set<std::string> texts;
  for (const auto& atom : pool) {
    std::vector<std::string> consts;
    collect_const_symbols(atom, &consts);
    bool touches = false;
    for (const auto& c : consts) touches |= c == first.value.as_object();
    if (!touches) continue;
    Expr tmpl = lift_constant(atom, first.value.as_object(), "x");
    for (const Expr& e : {tmpl, ExprNode::negate(tmpl)}) {
      if (texts.insert(serialize(e)).second) templates.push_back(e);
    }
  }

  std::vector<Expr> shared;
  for (const auto& tmpl : templates) {
    bool everywhere = true;
    for (const auto& occ : occurrences) {
      Scope env = occ.scope;
      env.locals["x"] = occ.value;
      try {
        if (!eval_condition(tmpl, env, occ.state)) { everywhere = false; break; }
      } catch (const Error&) {
        everywhere = false;
        break;
      }
    }
    if (everywhere) shared.push_back(tmpl);
  }
  return shared;
}

// select_one over the conjunction must reproduce the witness value at
// every occurrence.
inline bool binder_selects(const Expr& binder, const std::vector<Occurrence>& occurrences) {
  for (const auto& occ : occurrences) {
    try {
      Value got = eval_expression(binder, occ.scope, occ.state);
      if (!(got == occ.value)) return false;
    } catch (const Error&) {
      return false;
    }
  }
  return true;
}

inline Expr conjoin(const std::vector<Expr>& parts) {
  Expr out;
  for (const auto& p : parts) out = out ? ExprNode::conj(out, p) : p;
  return out;
}

}  // namespace lift_detail

// Lift the given constants (in order) into parameters with self-binding
// docstring binders. Returns nothing when a binder cannot be derived or
// the lifted skill loses coverage anywhere.
inline std::optional<SkillSchema> lift_variables(const SkillSchema& skill,
                                                 const InductionContext& ctx,
                                                 std::vector<std::pair<std::string, std::string>>
                                                     symbols /* (symbol, slot tag) */) {
  using namespace lift_detail;
  if (symbols.empty()) return std::nullopt;

  SkillSchema lifted = skill;
  std::vector<std::string> new_params;
  for (const auto& [sym, tag] : symbols) {
    std::string base = param_base_for_tag(tag);
    std::string name = base;
    for (int i = 2; lifted.graph.has_param(name); ++i) name = base + "_" + std::to_string(i);
    lifted.graph.params.push_back({name, tag});
    lift_everywhere(lifted.graph, sym, name);
    new_params.push_back(name);
  }
  if (!validates_clean(lifted.graph)) return std::nullopt;

  // Witness thetas per dataset entry at the segment start.
  struct Witness {
    Theta theta;
    SymbolicState z0;
  };
  std::vector<Witness> witnesses;
  auto old_regions = ctx.regions_of(skill);
  for (std::size_t i = 0; i < ctx.dataset.size(); ++i) {
    auto region = ctx.region_of(lifted, ctx.dataset[i]);
    if (!region.superset_of(old_regions[i])) return std::nullopt;  // lost coverage
    std::size_t start = ctx.dataset[i].segment->start;
    if (region.covers(start))
      witnesses.push_back({region.covered.at(start),
                           trace_state_at(*ctx.dataset[i].trace, *ctx.vocab, start)});
  }
  if (witnesses.empty()) return std::nullopt;

  // Derive binders in declaration order so later binders may reference
  // earlier parameters.
  std::vector<std::string> earlier;
  for (const auto& p : skill.graph.params) earlier.push_back(p.name);
  for (std::size_t pi = 0; pi < new_params.size(); ++pi) {
    const std::string& pname = new_params[pi];
    std::string tag = symbols[pi].second;
    std::vector<Occurrence> occurrences;
    for (const auto& w : witnesses) {
      auto it = w.theta.find(pname);
      if (it == w.theta.end()) continue;
      Occurrence occ;
      occ.value = it->second;
      for (const auto& name : earlier) {
        auto t = w.theta.find(name);
        if (t != w.theta.end()) occ.scope.globals[name] = t->second;
      }
      occ.state = w.z0;
      occurrences.push_back(std::move(occ));
    }
    if (occurrences.empty()) return std::nullopt;

    std::vector<Expr> shared = shared_properties(occurrences, *ctx.vocab);
    std::sort(shared.begin(), shared.end(), [](const Expr& a, const Expr& b) {
      auto ka = std::tuple(ast_size(a), serialize(a));
      auto kb = std::tuple(ast_size(b), serialize(b));
      return ka < kb;
    });
    if (shared.size() > 8) shared.resize(8);

    std::string domain_tag = domain_tag_for(tag);
    auto make_binder = [&](const std::vector<Expr>& parts) {
      return ExprNode::select(ExprOp::SelectOne, domain_tag, "x", conjoin(parts));
    };
    if (shared.empty() || !binder_selects(make_binder(shared), occurrences))
      return std::nullopt;  // no shared selective property

    // Greedy minimization, largest candidates dropped first.
    for (std::size_t i = shared.size(); i-- > 0;) {
      if (shared.size() == 1) break;
      std::vector<Expr> without;
      for (std::size_t j = 0; j < shared.size(); ++j)
        if (j != i) without.push_back(shared[j]);
      if (binder_selects(make_binder(without), occurrences)) shared = std::move(without);
    }
    lifted.docstring.param_binders[pname] = make_binder(shared);
    earlier.push_back(pname);
  }
  return lifted;
}

// Ranked lift candidates: all constants in first-use order, all in
// reverse, then each constant alone.
inline std::vector<SkillSchema> lift_candidates(const SkillSchema& skill,
                                                const InductionContext& ctx) {
  using namespace lift_detail;
  auto consts = liftable_constants(skill.graph);
  std::vector<SkillSchema> out;
  if (consts.empty()) return out;
  auto add = [&](std::vector<std::pair<std::string, std::string>> symbols) {
    if (auto lifted = lift_variables(skill, ctx, std::move(symbols))) out.push_back(*lifted);
  };
  if (consts.size() > 1) {
    auto reversed = consts;
    std::reverse(reversed.begin(), reversed.end());
    add(reversed);  // later-used slots first: earlier slots may reference them
    add(consts);
  }
  for (const auto& c : consts) add({c});
  return out;
}

}  // namespace nsi
