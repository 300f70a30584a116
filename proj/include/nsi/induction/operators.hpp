#pragma once

// Structural consolidation operators. Each produces a candidate schema;
// callers accept or reject by region dominance and the MDL objective.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nsi/consistency/replay.hpp"
#include "nsi/graph/validate.hpp"
#include "nsi/induction/predicate_invention.hpp"
#include "nsi/world/actions.hpp"

namespace nsi {

struct InterfaceMismatch : Error {
  explicit InterfaceMismatch(const std::string& what_) : Error("graft interface: " + what_) {}
};

struct NoRepetition : Error {
  NoRepetition() : Error("no foldable repetition found") {}
};

struct NoSharedProperty : Error {
  NoSharedProperty() : Error("lifted occurrences share no property") {}
};

namespace op_detail {

inline void redirect_incoming(SkillGraph& g, const std::string& node, const std::string& to) {
  for (auto& e : g.edges)
    if (!e.spec_link && e.to == node) e.to = to;
}

inline std::string first_success(const SkillGraph& g) {
  for (const auto& [id, n] : g.nodes)
    if (n.kind == NodeKind::Success) return id;
  throw Error("graph has no success terminal");
}

}  // namespace op_detail

// Wrap the region starting at `from` behind a guard: when the condition
// holds control enters `from` as before, otherwise it skips to `to`.
inline SkillSchema insert_skip_guard(const SkillSchema& skill, const std::string& from,
                                     const std::string& to, const Expr& guard) {
  SkillSchema out = skill;
  SkillGraph& g = out.graph;
  if (!g.find(from) || !g.find(to)) throw Error("skip guard anchors missing");
  std::string cid = g.fresh_id("C_GUARD");
  op_detail::redirect_incoming(g, from, cid);
  Node check;
  check.id = cid;
  check.kind = NodeKind::Check;
  check.condition = guard;
  g.nodes.emplace(cid, std::move(check));
  g.edges.push_back({cid, from, BranchLabel::Yes, LoopEntry::None, false});
  g.edges.push_back({cid, to, BranchLabel::No, LoopEntry::None, false});
  require_valid(g);
  return out;
}

// Insert a guarded linear chain of actions before `before`: when the guard
// holds the chain runs first, otherwise control falls through directly.
inline SkillSchema insert_guarded_chain(const SkillSchema& skill, const std::string& before,
                                        const std::vector<std::string>& action_texts,
                                        const Expr& guard, const std::string& domain) {
  SkillSchema out = skill;
  SkillGraph& g = out.graph;
  if (!g.find(before)) throw Error("splice anchor missing");
  const auto& templates = action_templates_for(domain);

  std::string cid = g.fresh_id("C_GUARD");
  op_detail::redirect_incoming(g, before, cid);
  Node check;
  check.id = cid;
  check.kind = NodeKind::Check;
  check.condition = guard;
  g.nodes.emplace(cid, std::move(check));

  std::string prev = cid;
  BranchLabel label = BranchLabel::Yes;
  for (const auto& text : action_texts) {
    auto matched = match_action(text, templates);
    if (!matched) throw Error("spliced action does not fit the grammar: " + text);
    Node n;
    n.kind = NodeKind::PrimitiveAction;
    n.action_template = matched->info->template_text;
    for (std::size_t s = 0; s < matched->info->slots.size(); ++s) {
      const auto& [slot, tag] = matched->info->slots[s];
      n.local_in[slot] = {tag, ExprNode::constant(Value::object(matched->values[s]))};
    }
    std::string verb = matched->info->template_text.substr(0, matched->info->template_text.find(' '));
    n.id = g.fresh_id("A_" + to_upper_ident(verb) + "_G");
    g.nodes.emplace(n.id, n);
    g.edges.push_back({prev, n.id, label, LoopEntry::None, false});
    prev = n.id;
    label = BranchLabel::None;
  }
  g.edges.push_back({prev, before, label, LoopEntry::None, false});
  g.edges.push_back({cid, before, BranchLabel::No, LoopEntry::None, false});
  require_valid(g);
  return out;
}

// ---------------------------------------------------------------------------
// Modular crossover

struct GraftSpec {
  std::vector<std::string> donor_ids;           // a linear chain in the donor
  std::map<std::string, std::string> rebind;    // donor global/param -> acceptor name
  std::string attach_before;                    // acceptor node the graft precedes
  Expr guard;                                   // optional guard; empty = unconditional
};

// Copy a donor subgraph into the acceptor with fresh ids, rebinding its
// variable interface. Rejection leaves the acceptor untouched (the caller
// keeps its copy).
inline SkillSchema crossover_graft(const SkillSchema& acceptor, const SkillSchema& donor,
                                   const GraftSpec& spec) {
  if (spec.donor_ids.empty()) return acceptor;  // identity graft
  SkillSchema out = acceptor;
  SkillGraph& g = out.graph;
  if (!g.find(spec.attach_before)) throw InterfaceMismatch("attach point missing");

  // The subgraph's variable interface: every global or parameter read by
  // the copied nodes must be rebound to an acceptor name or already exist.
  std::set<std::string> acceptor_names;
  for (const auto& p : g.params) acceptor_names.insert(p.name);
  for (const auto& [name, t] : g.declared_globals) acceptor_names.insert(name);

  std::vector<Node> copies;
  for (const auto& id : spec.donor_ids) {
    const Node* n = donor.graph.find(id);
    if (!n) throw InterfaceMismatch("donor node missing: " + id);
    if (n->kind != NodeKind::PrimitiveAction && n->kind != NodeKind::DataOp &&
        n->kind != NodeKind::Check)
      throw InterfaceMismatch("only action/data/check nodes graft");
    Node copy = *n;
    for (auto& [name, b] : copy.local_in) {
      for (const auto& v : free_vars(b.binding)) {
        if (!is_upper_ident(v)) continue;
        auto r = spec.rebind.find(v);
        std::string target = r != spec.rebind.end() ? r->second : v;
        if (!acceptor_names.count(target))
          throw InterfaceMismatch("unbound graft input " + v);
        if (target != v) b.binding = substitute_var(b.binding, v, ExprNode::var(target));
      }
    }
    if (copy.condition)
      for (const auto& v : free_vars(copy.condition)) {
        if (!is_upper_ident(v)) continue;
        auto r = spec.rebind.find(v);
        std::string target = r != spec.rebind.end() ? r->second : v;
        if (!acceptor_names.count(target)) throw InterfaceMismatch("unbound graft input " + v);
        if (target != v) copy.condition = substitute_var(copy.condition, v, ExprNode::var(target));
      }
    copies.push_back(std::move(copy));
  }

  std::string before = spec.attach_before;
  std::string entry_id;
  std::vector<std::string> fresh_ids;
  for (auto& copy : copies) {
    copy.id = g.fresh_id(copy.id);
    fresh_ids.push_back(copy.id);
    for (const auto& [name, w] : copy.writes_global)
      if (!g.declared_globals.count(name)) g.declared_globals[name] = w.type_tag;
    g.nodes.emplace(copy.id, copy);
  }
  // Chain the copies linearly (donor linearity is the caller's contract;
  // interior donor checks are not supported by this built-in).
  for (std::size_t i = 0; i + 1 < fresh_ids.size(); ++i)
    g.edges.push_back({fresh_ids[i], fresh_ids[i + 1], BranchLabel::None, LoopEntry::None, false});
  entry_id = fresh_ids.front();

  if (spec.guard) {
    std::string cid = g.fresh_id("C_GUARD");
    op_detail::redirect_incoming(g, before, cid);
    Node check;
    check.id = cid;
    check.kind = NodeKind::Check;
    check.condition = spec.guard;
    g.nodes.emplace(cid, std::move(check));
    g.edges.push_back({cid, entry_id, BranchLabel::Yes, LoopEntry::None, false});
    g.edges.push_back({cid, before, BranchLabel::No, LoopEntry::None, false});
  } else {
    op_detail::redirect_incoming(g, before, entry_id);
  }
  g.edges.push_back({fresh_ids.back(), before, BranchLabel::None, LoopEntry::None, false});
  require_valid(g);
  return out;
}

// ---------------------------------------------------------------------------
// Loop folding

namespace op_detail {

// The acyclic single-successor chain starting after the start node.
inline std::vector<std::string> main_chain(const SkillGraph& g) {
  std::vector<std::string> chain;
  std::set<std::string> seen;
  std::string at = g.start;
  while (true) {
    auto outs = g.out_edges(at);
    if (outs.size() != 1) break;
    at = outs[0]->to;
    if (!seen.insert(at).second) break;
    const Node* n = g.find(at);
    if (!n || is_terminal(n->kind)) break;
    chain.push_back(at);
  }
  return chain;
}

struct UnitSignature {
  std::vector<std::string> templates;  // per node: action template or ""
  bool operator==(const UnitSignature& o) const { return templates == o.templates; }
};

inline UnitSignature unit_signature(const SkillGraph& g, const std::vector<std::string>& chain,
                                    std::size_t from, std::size_t len) {
  UnitSignature sig;
  for (std::size_t i = from; i < from + len; ++i)
    sig.templates.push_back(g.nodes.at(chain[i]).action_template);
  return sig;
}

}  // namespace op_detail

// Fold >= 2 consecutive structurally identical action runs differing in a
// single constant into a LoopControl. Candidates are returned best-first:
// a select_all source over a category that enumerates exactly the unit
// targets (when one exists), then the literal list.
inline std::vector<SkillSchema> fold_loop_candidates(const SkillSchema& skill,
                                                     const SymbolicState* universe_hint) {
  using namespace op_detail;
  const SkillGraph& g = skill.graph;
  std::vector<std::string> chain = main_chain(g);
  // Pure action runs only.
  std::vector<SkillSchema> out;

  for (std::size_t len = 1; len <= 3; ++len) {
    for (std::size_t begin = 0; begin + 2 * len <= chain.size(); ++begin) {
      bool actions_only = true;
      for (std::size_t i = begin; i < begin + len && actions_only; ++i)
        actions_only = g.nodes.at(chain[i]).kind == NodeKind::PrimitiveAction;
      if (!actions_only) continue;
      UnitSignature sig = unit_signature(g, chain, begin, len);

      // Count repeats and collect each unit's varying target.
      std::size_t count = 1;
      while (begin + (count + 1) * len <= chain.size()) {
        bool same = unit_signature(g, chain, begin + count * len, len) == sig;
        for (std::size_t i = 0; i < len && same; ++i)
          same = g.nodes.at(chain[begin + count * len + i]).kind == NodeKind::PrimitiveAction;
        if (!same) break;
        ++count;
      }
      if (count < 2) continue;

      // Within each unit every local must either be constant-equal across
      // units or vary in lockstep (the single loop binding).
      std::vector<std::string> targets(count);
      bool foldable = true;
      std::vector<std::pair<std::size_t, std::string>> varying_slots;
      for (std::size_t i = 0; i < len && foldable; ++i) {
        const Node& base = g.nodes.at(chain[begin + i]);
        for (const auto& [slot, binding] : base.local_in) {
          if (binding.binding->op != ExprOp::Const) { foldable = false; break; }
          std::string v0 = binding.binding->value.as_object();
          bool varies = false;
          for (std::size_t u = 1; u < count; ++u) {
            const Node& other = g.nodes.at(chain[begin + u * len + i]);
            auto it = other.local_in.find(slot);
            if (it == other.local_in.end() || it->second.binding->op != ExprOp::Const) {
              foldable = false;
              break;
            }
            std::string vu = it->second.binding->value.as_object();
            if (vu != v0) varies = true;
          }
          if (!foldable) break;
          if (varies) {
            varying_slots.emplace_back(i, slot);
            for (std::size_t u = 0; u < count; ++u) {
              const Node& other = g.nodes.at(chain[begin + u * len + i]);
              std::string vu = other.local_in.at(slot).binding->value.as_object();
              if (targets[u].empty()) targets[u] = vu;
              else if (targets[u] != vu) { foldable = false; break; }
            }
          }
        }
      }
      if (!foldable || varying_slots.empty()) continue;

      // The loop binding's type follows the varying slot's declaration.
      std::string slot_tag =
          g.nodes.at(chain[begin + varying_slots[0].first]).local_in.at(varying_slots[0].second).type_tag;
      std::string domain_tag = slot_tag == "ItemName" ? "Item" : "Receptacle";

      // Loop sources: select_all over a category that enumerates exactly
      // the targets in order, then the literal list.
      std::vector<Expr> sources;
      if (universe_hint) {
        for (const auto& [cat, objs] : universe_hint->universe) {
          std::vector<std::string> sorted(objs.begin(), objs.end());
          if (sorted == targets) {
            sources.push_back(ExprNode::select(
                ExprOp::SelectAll, domain_tag, "x",
                ExprNode::pred("is_type",
                               {ExprNode::var("x", ExprType::obj()),
                                ExprNode::constant(Value::object(cat))},
                               true)));
            break;
          }
        }
      }
      {
        std::vector<Value> lits;
        for (const auto& t : targets) lits.push_back(Value::object(t));
        sources.push_back(ExprNode::constant(Value::list(ValueKind::Object, lits)));
      }

      for (const auto& source : sources) {
        SkillSchema folded = skill;
        SkillGraph& fg = folded.graph;
        std::string loop_id = fg.fresh_id("LOOP_TARGETS");
        std::string global = fg.declared_globals.count("CURRENT_TARGET")
                                 ? to_upper_ident(fg.fresh_id("current_target"))
                                 : "CURRENT_TARGET";

        Node loop;
        loop.id = loop_id;
        loop.kind = NodeKind::LoopControl;
        loop.loop_var = "target_i";
        loop.loop_source = source;
        loop.writes_global[global] = {slot_tag, ExprNode::var("target_i", ExprType::obj())};
        fg.declared_globals[global] = slot_tag;
        fg.nodes.emplace(loop_id, std::move(loop));

        std::string first = chain[begin];
        std::string unit_tail = chain[begin + len - 1];
        std::string after;
        {
          auto outs = fg.out_edges(chain[begin + count * len - 1]);
          if (outs.size() != 1) continue;
          after = outs[0]->to;
        }
        // Predecessors of the first unit now start the loop.
        for (auto& e : fg.edges)
          if (!e.spec_link && e.to == first) {
            e.to = loop_id;
            e.loop_entry = LoopEntry::Start;
          }
        // The surviving unit binds its varying slots to the loop global.
        for (const auto& [offset, slot] : varying_slots)
          fg.nodes.at(chain[begin + offset]).local_in[slot].binding =
              ExprNode::var(global, ExprType::obj());
        // Drop units 2..count.
        std::set<std::string> dropped;
        for (std::size_t u = 1; u < count; ++u)
          for (std::size_t i = 0; i < len; ++i) dropped.insert(chain[begin + u * len + i]);
        fg.edges.erase(std::remove_if(fg.edges.begin(), fg.edges.end(),
                                      [&](const Edge& e) {
                                        return dropped.count(e.from) || dropped.count(e.to) ||
                                               e.from == unit_tail;
                                      }),
                       fg.edges.end());
        for (const auto& id : dropped) fg.nodes.erase(id);
        fg.edges.push_back({loop_id, first, BranchLabel::Body, LoopEntry::None, false});
        fg.edges.push_back({loop_id, after, BranchLabel::Done, LoopEntry::None, false});
        fg.edges.push_back({unit_tail, loop_id, BranchLabel::None, LoopEntry::Continue, false});

        if (!validates_clean(fg)) continue;
        if (graph_complexity(fg) >= graph_complexity(skill.graph)) continue;
        out.push_back(std::move(folded));
      }
      if (!out.empty()) return out;  // first fold site wins, deterministically
    }
  }
  return out;
}

inline SkillSchema fold_loops(const SkillSchema& skill, const SymbolicState* universe_hint = nullptr) {
  auto candidates = fold_loop_candidates(skill, universe_hint);
  if (candidates.empty()) throw NoRepetition();
  return candidates.front();
}

}  // namespace nsi
