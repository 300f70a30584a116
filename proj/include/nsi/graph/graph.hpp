#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "nsi/logic/ast.hpp"

namespace nsi {

enum class NodeKind { Start, Success, Failure, DataOp, Check, LoopControl, PrimitiveAction, Spec };

inline const char* node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Start: case NodeKind::Success: case NodeKind::Failure: return "Interface";
    case NodeKind::DataOp: return "DataOp";
    case NodeKind::Check: return "Check";
    case NodeKind::LoopControl: return "LoopControl";
    case NodeKind::PrimitiveAction: return "PrimitiveAction";
    case NodeKind::Spec: return "Spec";
  }
  return "?";
}

inline bool is_interface(NodeKind k) {
  return k == NodeKind::Start || k == NodeKind::Success || k == NodeKind::Failure;
}
inline bool is_terminal(NodeKind k) { return k == NodeKind::Success || k == NodeKind::Failure; }

struct LocalBinding {
  std::string type_tag;
  Expr binding;
};

struct GlobalWrite {
  std::string type_tag;
  Expr expr;
};

// One workflow node. Which fields are meaningful depends on the kind:
// local_in everywhere except Interface/Spec; writes_global only on
// DataOp/LoopControl; action_template on PrimitiveAction; condition on
// Check; loop_var/loop_source on LoopControl; diagnosis_template on
// Failure terminals.
struct Node {
  std::string id;
  NodeKind kind = NodeKind::Spec;
  std::map<std::string, LocalBinding> local_in;
  std::map<std::string, GlobalWrite> writes_global;
  std::string action_template;      // "take {{take_item}} from {{from_rec}}"
  Expr condition;
  std::string loop_var;
  Expr loop_source;
  std::string diagnosis_template;
  std::string spec_text;
};

// Placeholder slots of an action template, in textual order.
inline std::vector<std::string> template_slots(const std::string& tmpl) {
  std::vector<std::string> out;
  std::size_t p = 0;
  while ((p = tmpl.find("{{", p)) != std::string::npos) {
    std::size_t e = tmpl.find("}}", p + 2);
    if (e == std::string::npos) break;
    out.push_back(tmpl.substr(p + 2, e - p - 2));
    p = e + 2;
  }
  return out;
}

// Declared type tags (ReceptacleName, ItemType, List_ReceptacleName, ...)
// map onto value kinds; category information lives in the universe.
inline ValueKind tag_value_kind(const std::string& tag) {
  if (tag.rfind("List", 0) == 0) return ValueKind::List;
  if (tag == "Bool") return ValueKind::Bool;
  if (tag == "Num" || tag == "Count" || tag == "Int") return ValueKind::Num;
  return ValueKind::Object;
}

// A bare variable reference parses Object-typed; narrow it to the kind the
// declared tag demands (List_... bindings, Bool flags, counts).
inline Expr coerce_expr_to_tag(Expr e, const std::string& tag) {
  ValueKind want = tag_value_kind(tag);
  if (e->op == ExprOp::Var && e->type.kind != want) {
    ExprType t = want == ValueKind::List ? ExprType::list_of(ValueKind::Object)
                 : want == ValueKind::Bool ? ExprType::boolean()
                 : want == ValueKind::Num  ? ExprType::num()
                                           : ExprType::obj();
    return ExprNode::var(e->name, t);
  }
  return e;
}

enum class BranchLabel { None, Yes, No, Body, Done };
enum class LoopEntry { None, Start, Continue };

inline const char* branch_name(BranchLabel b) {
  switch (b) {
    case BranchLabel::None: return "";
    case BranchLabel::Yes: return "Yes";
    case BranchLabel::No: return "No";
    case BranchLabel::Body: return "body";
    case BranchLabel::Done: return "done";
  }
  return "";
}

// An edge carries at most one branch tag plus at most one loop-entry tag
// (a Check's No edge that re-enters a loop is labeled "No, Continue_Loop").
struct Edge {
  std::string from;
  std::string to;
  BranchLabel branch = BranchLabel::None;
  LoopEntry loop_entry = LoopEntry::None;
  bool spec_link = false;  // dotted documentation links (START -.- LEGEND)

  std::string label() const {
    std::string out = branch_name(branch);
    if (loop_entry != LoopEntry::None) {
      if (!out.empty()) out += ", ";
      out += loop_entry == LoopEntry::Start ? "Start_Loop" : "Continue_Loop";
    }
    return out;
  }
};

struct Param {
  std::string name;  // UPPERCASE; lives in the globals namespace
  std::string type_tag;
};

// The executable skill IR: a typed workflow graph over a shared scope.
struct SkillGraph {
  std::map<std::string, Node> nodes;
  std::vector<Edge> edges;
  std::string start;
  std::vector<Param> params;
  std::map<std::string, std::string> declared_globals;  // name -> type tag

  const Node* find(const std::string& id) const {
    auto it = nodes.find(id);
    return it == nodes.end() ? nullptr : &it->second;
  }

  std::vector<const Edge*> out_edges(const std::string& id) const {
    std::vector<const Edge*> out;
    for (const auto& e : edges)
      if (e.from == id && !e.spec_link) out.push_back(&e);
    return out;
  }

  std::vector<const Edge*> in_edges(const std::string& id) const {
    std::vector<const Edge*> out;
    for (const auto& e : edges)
      if (e.to == id && !e.spec_link) out.push_back(&e);
    return out;
  }

  bool has_param(const std::string& name) const {
    for (const auto& p : params)
      if (p.name == name) return true;
    return false;
  }

  std::string fresh_id(const std::string& base) const {
    if (!nodes.count(base)) return base;
    for (int i = 2;; ++i) {
      std::string candidate = base + "_" + std::to_string(i);
      if (!nodes.count(candidate)) return candidate;
    }
  }
};

// Expressions attached to a node, in a stable order.
inline std::vector<Expr> node_expressions(const Node& n) {
  std::vector<Expr> out;
  for (const auto& [name, b] : n.local_in)
    if (b.binding) out.push_back(b.binding);
  if (n.condition) out.push_back(n.condition);
  if (n.loop_source) out.push_back(n.loop_source);
  for (const auto& [name, w] : n.writes_global)
    if (w.expr) out.push_back(w.expr);
  return out;
}

// Program complexity |pi|: structural node count (non-Spec, non-Interface)
// plus the AST sizes of every attached expression. Additive over disjoint
// composition by construction.
inline std::size_t graph_complexity(const SkillGraph& g) {
  std::size_t total = 0;
  for (const auto& [id, n] : g.nodes) {
    if (n.kind == NodeKind::Spec || is_interface(n.kind)) continue;
    total += 1;
    for (const auto& e : node_expressions(n)) total += ast_size(e);
  }
  return total;
}

// Docstring: the human/planner-facing contract. Conditions are expressions
// over the parameters; param_binders let the router (and init) derive a
// missing parameter from the current state.
struct Docstring {
  std::string description;
  std::vector<Expr> start_conditions;
  std::vector<Expr> success_conditions;
  std::vector<Expr> feasibility_exclusions;
  std::map<std::string, Expr> param_binders;
};

struct BranchStats {
  long invocations = 0;
  long successes = 0;
  long failures = 0;
  long consecutive_successes = 0;
};

struct SkillSchema {
  std::string name;
  std::string sub_goal;
  Docstring docstring;
  SkillGraph graph;
  std::set<std::string> tentative_nodes;
  std::map<std::string, BranchStats> stats;  // branch guard node id -> stats
  BranchStats totals;
};

}  // namespace nsi
