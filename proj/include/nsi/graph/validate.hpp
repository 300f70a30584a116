#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "nsi/graph/graph.hpp"

namespace nsi {

struct ValidationIssue {
  enum class Severity { Error, Warning };
  Severity severity = Severity::Error;
  std::string rule;   // R1..R8
  std::string where;  // node or edge location
  std::string message;

  std::string str() const {
    return std::string(severity == Severity::Error ? "error" : "warning") + " " + rule + " @ " +
           where + ": " + message;
  }
};

struct ValidationFailed : Error {
  std::vector<ValidationIssue> issues;
  explicit ValidationFailed(std::vector<ValidationIssue> iss)
      : Error(join(iss)), issues(std::move(iss)) {}
  static std::string join(const std::vector<ValidationIssue>& iss) {
    std::string out = "graph validation failed:";
    for (const auto& i : iss) out += "\n  " + i.str();
    return out;
  }
};

namespace detail {

// UPPERCASE free variables across a node's expressions that are not
// written by the node itself. These are the node's global reads.
inline std::set<std::string> global_reads(const Node& n) {
  std::set<std::string> reads;
  for (const auto& e : node_expressions(n)) {
    for (const auto& v : free_vars(e))
      if (is_upper_ident(v)) reads.insert(v);
  }
  return reads;
}

inline std::set<std::string> global_writes(const Node& n) {
  std::set<std::string> w;
  for (const auto& [name, gw] : n.writes_global) w.insert(name);
  return w;
}

}  // namespace detail

// Must-be-written analysis: for each node, the set of globals written on
// every control path from start to the node's entry. Edge-wise transfer:
// only writes that actually happened on that edge's side count (a loop's
// done edge does not guarantee the loop body's writes).
inline std::map<std::string, std::set<std::string>> dataflow_written_on_entry(
    const SkillGraph& g) {
  std::set<std::string> all;
  for (const auto& [id, n] : g.nodes)
    for (const auto& w : detail::global_writes(n)) all.insert(w);
  for (const auto& p : g.params) all.insert(p.name);

  std::map<std::string, std::set<std::string>> in;
  for (const auto& [id, n] : g.nodes) in[id] = all;  // top
  std::set<std::string> start_in;
  for (const auto& p : g.params) start_in.insert(p.name);
  if (g.nodes.count(g.start)) in[g.start] = start_in;

  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& e : g.edges) {
      if (e.spec_link || !g.nodes.count(e.from) || !g.nodes.count(e.to)) continue;
      const Node& from = g.nodes.at(e.from);
      std::set<std::string> out = in[e.from];
      // A LoopControl writes its loop binding on the body side only; the
      // done side may be taken with an empty list before any write.
      if (!(from.kind == NodeKind::LoopControl && e.branch == BranchLabel::Done))
        for (const auto& w : detail::global_writes(from)) out.insert(w);
      std::set<std::string> met;
      std::set_intersection(out.begin(), out.end(), in[e.to].begin(), in[e.to].end(),
                            std::inserter(met, met.begin()));
      if (met != in[e.to]) {
        in[e.to] = std::move(met);
        changed = true;
      }
    }
  }
  return in;
}

// The full rule catalog. Returns all findings; callers treat Error
// severity as fatal.
inline std::vector<ValidationIssue> validate_graph(const SkillGraph& g) {
  using Sev = ValidationIssue::Severity;
  std::vector<ValidationIssue> issues;
  auto err = [&](const std::string& rule, const std::string& where, const std::string& msg) {
    issues.push_back({Sev::Error, rule, where, msg});
  };
  auto warn = [&](const std::string& rule, const std::string& where, const std::string& msg) {
    issues.push_back({Sev::Warning, rule, where, msg});
  };

  // Edge endpoints must exist (reported under R6: reachability is
  // meaningless over dangling edges).
  for (const auto& e : g.edges) {
    if (!g.nodes.count(e.from)) err("R6", e.from + "->" + e.to, "edge from unknown node");
    if (!g.nodes.count(e.to)) err("R6", e.from + "->" + e.to, "edge to unknown node");
  }
  if (!issues.empty()) return issues;

  // R5: exactly one start, at least one success and one failure terminal.
  std::vector<std::string> starts, successes, failures;
  for (const auto& [id, n] : g.nodes) {
    if (n.kind == NodeKind::Start) starts.push_back(id);
    if (n.kind == NodeKind::Success) successes.push_back(id);
    if (n.kind == NodeKind::Failure) failures.push_back(id);
  }
  if (starts.size() != 1)
    err("R5", "<graph>", "expected exactly one start node, found " + std::to_string(starts.size()));
  else if (g.start != starts[0])
    err("R5", g.start, "start field does not name the start node");
  if (successes.empty()) err("R5", "<graph>", "no success terminal");
  if (failures.empty()) err("R5", "<graph>", "no failure terminal");

  // R2: writes only on DataOp/LoopControl.
  for (const auto& [id, n] : g.nodes) {
    if (!n.writes_global.empty() && n.kind != NodeKind::DataOp && n.kind != NodeKind::LoopControl)
      err("R2", id, std::string(node_kind_name(n.kind)) + " node carries writes_global");
  }

  // R3: branching discipline. Checks have exactly {Yes, No}; no other node
  // branches or labels its single out-edge.
  for (const auto& [id, n] : g.nodes) {
    auto outs = g.out_edges(id);
    if (n.kind == NodeKind::Check) {
      bool yes = false, no = false;
      for (const auto* e : outs) {
        if (e->branch == BranchLabel::Yes) yes = true;
        else if (e->branch == BranchLabel::No) no = true;
        else err("R3", id, "check out-edge must be labeled Yes or No");
      }
      if (outs.size() != 2 || !yes || !no)
        err("R3", id, "check must have exactly one Yes and one No out-edge");
    } else if (n.kind == NodeKind::LoopControl) {
      // handled by R4
    } else if (is_terminal(n.kind)) {
      if (!outs.empty()) err("R3", id, "terminal node has out-edges");
    } else if (n.kind != NodeKind::Spec) {
      if (outs.size() != 1)
        err("R3", id, "expected exactly one out-edge, found " + std::to_string(outs.size()));
      else if (outs[0]->branch != BranchLabel::None)
        err("R3", id, "only Check/LoopControl out-edges carry branch labels");
    }
  }

  // R4: loop edge labels.
  for (const auto& [id, n] : g.nodes) {
    if (n.kind != NodeKind::LoopControl) continue;
    auto outs = g.out_edges(id);
    bool body = false, done = false;
    for (const auto* e : outs) {
      if (e->branch == BranchLabel::Body) body = true;
      else if (e->branch == BranchLabel::Done) done = true;
      else err("R4", id, "loop out-edge must be labeled body or done");
    }
    if (outs.size() != 2 || !body || !done)
      err("R4", id, "loop must have exactly one body and one done out-edge");
    for (const auto* e : g.in_edges(id)) {
      if (e->loop_entry == LoopEntry::None)
        err("R4", e->from + "->" + id, "edge into a loop must be Start_Loop or Continue_Loop");
    }
    if (n.loop_var.empty() || !n.loop_source) err("R4", id, "loop missing var or source");
  }
  for (const auto& e : g.edges) {
    if (e.spec_link) continue;
    if (e.loop_entry != LoopEntry::None && g.nodes.at(e.to).kind != NodeKind::LoopControl)
      err("R4", e.from + "->" + e.to, "loop-entry label on an edge not entering a loop");
  }

  // R6: reachability. Non-terminal control nodes must be reachable from
  // start; terminals may be unreachable (runtime failures land there).
  // Every control node must reach some terminal.
  std::set<std::string> reachable;
  if (starts.size() == 1) {
    std::vector<std::string> stack = {starts[0]};
    while (!stack.empty()) {
      std::string id = stack.back();
      stack.pop_back();
      if (!reachable.insert(id).second) continue;
      for (const auto* e : g.out_edges(id)) stack.push_back(e->to);
    }
    for (const auto& [id, n] : g.nodes) {
      if (n.kind == NodeKind::Spec || is_terminal(n.kind)) continue;
      if (!reachable.count(id)) err("R6", id, "node not reachable from start");
    }
    // Backward sweep from terminals.
    std::set<std::string> reaches_terminal;
    std::vector<std::string> back;
    for (const auto& [id, n] : g.nodes)
      if (is_terminal(n.kind)) back.push_back(id);
    while (!back.empty()) {
      std::string id = back.back();
      back.pop_back();
      if (!reaches_terminal.insert(id).second) continue;
      for (const auto* e : g.in_edges(id)) back.push_back(e->from);
    }
    for (const auto& [id, n] : g.nodes) {
      if (n.kind == NodeKind::Spec) continue;
      if (!reaches_terminal.count(id)) err("R6", id, "no terminal reachable from node");
    }
  }

  // R7: casing discipline.
  for (const auto& p : g.params)
    if (!is_upper_ident(p.name)) err("R7", "<params>", "parameter " + p.name + " must be UPPERCASE");
  for (const auto& [name, t] : g.declared_globals)
    if (!is_upper_ident(name)) err("R7", "<globals>", "global " + name + " must be UPPERCASE");
  for (const auto& [id, n] : g.nodes) {
    for (const auto& [name, b] : n.local_in) {
      if (is_upper_ident(name)) err("R7", id, "local " + name + " must be lowercase");
      if (g.declared_globals.count(to_upper_ident(name)) || g.has_param(to_upper_ident(name)))
        warn("R7", id, "local " + name + " reuses a global base name");
    }
    for (const auto& [name, w] : n.writes_global)
      if (!is_upper_ident(name)) err("R7", id, "written global " + name + " must be UPPERCASE");
    if (n.kind == NodeKind::LoopControl && !n.loop_var.empty() && is_upper_ident(n.loop_var))
      err("R7", id, "loop variable must be lowercase");
  }

  // R8: type agreement and resolvable references.
  auto tag_kind = [](const std::string& tag) { return tag_value_kind(tag); };
  for (const auto& [id, n] : g.nodes) {
    for (const auto& [name, b] : n.local_in) {
      if (!b.binding) { err("R8", id, "local " + name + " has no binding"); continue; }
      if (b.binding->type.kind != tag_kind(b.type_tag))
        err("R8", id, "local " + name + ": binding type " + b.binding->type.str() +
                          " does not match declared " + b.type_tag);
      for (const auto& v : free_vars(b.binding))
        if (!is_upper_ident(v))
          err("R8", id, "local binding " + name + " references node-local " + v);
    }
    for (const auto& [name, w] : n.writes_global) {
      if (!w.expr) { err("R8", id, "write " + name + " has no expression"); continue; }
      if (w.expr->type.kind != tag_kind(w.type_tag))
        err("R8", id, "global " + name + ": expression type " + w.expr->type.str() +
                          " does not match declared " + w.type_tag);
      auto declared = g.declared_globals.find(name);
      if (declared != g.declared_globals.end() && declared->second != w.type_tag)
        err("R8", id, "global " + name + " redeclared with type " + w.type_tag);
      for (const auto& v : free_vars(w.expr)) {
        if (is_upper_ident(v)) continue;
        bool local_ok = n.local_in.count(v) || (n.kind == NodeKind::LoopControl && v == n.loop_var);
        if (!local_ok) err("R8", id, "write " + name + " references unknown local " + v);
      }
    }
    if (n.kind == NodeKind::Check) {
      if (!n.condition || n.condition->type.kind != ValueKind::Bool)
        err("R8", id, "check requires one boolean condition");
      else
        for (const auto& v : free_vars(n.condition))
          if (!is_upper_ident(v) && !n.local_in.count(v))
            err("R8", id, "condition references unknown local " + v);
    }
    if (n.kind == NodeKind::LoopControl && n.loop_source) {
      if (n.loop_source->type.kind != ValueKind::List)
        err("R8", id, "loop source must be list-typed");
      for (const auto& v : free_vars(n.loop_source))
        if (!is_upper_ident(v) && !n.local_in.count(v))
          err("R8", id, "loop source references unknown local " + v);
    }
    if (n.kind == NodeKind::PrimitiveAction) {
      for (const auto& slot : template_slots(n.action_template))
        if (!n.local_in.count(slot))
          err("R8", id, "action argument " + slot + " missing from local_in");
    }
  }

  // R1: data-flow ordering, via the must-written fixpoint.
  auto written = dataflow_written_on_entry(g);
  for (const auto& [id, n] : g.nodes) {
    if (n.kind == NodeKind::Spec) continue;
    if (!reachable.count(id)) continue;  // unreachable nodes reported by R6
    const auto& have = written[id];
    for (const auto& r : detail::global_reads(n)) {
      bool own_write = detail::global_writes(n).count(r) > 0 && !have.count(r);
      if (!have.count(r)) {
        // Reading a global the same node writes is still read-before-write.
        err("R1", id, "global " + r + " read before any write on some path" +
                          (own_write ? " (self-write does not count)" : ""));
      }
    }
  }

  return issues;
}

inline bool validates_clean(const SkillGraph& g) {
  for (const auto& i : validate_graph(g))
    if (i.severity == ValidationIssue::Severity::Error) return false;
  return true;
}

inline void require_valid(const SkillGraph& g) {
  auto issues = validate_graph(g);
  std::vector<ValidationIssue> errors;
  for (auto& i : issues)
    if (i.severity == ValidationIssue::Severity::Error) errors.push_back(i);
  if (!errors.empty()) throw ValidationFailed(std::move(errors));
}

}  // namespace nsi
