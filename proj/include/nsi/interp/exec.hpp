#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nsi/graph/graph.hpp"
#include "nsi/logic/eval.hpp"
#include "nsi/logic/scope.hpp"
#include "nsi/logic/state.hpp"

namespace nsi {

struct MissingParam : Error {
  explicit MissingParam(const std::string& n) : Error("missing parameter: " + n) {}
};

struct InternalBudgetExceeded : Error {
  InternalBudgetExceeded() : Error("internal step budget exceeded") {}
};

// Machine-readable failure feedback. The condition is ground (bindings
// substituted) and evaluates to false in the terminal state Z.
struct Diagnosis {
  std::string node_id;
  std::string text;
  Expr condition;
  std::vector<GroundAtom> witnesses;
};

struct ResolvedAction {
  std::string text;                                     // "take apple_1 from fridge_1"
  std::string template_text;                            // "take {{take_item}} from {{from_rec}}"
  std::vector<std::pair<std::string, Value>> args;      // slot -> concrete value
  std::string node_id;
};

struct StepOutcome {
  enum class Kind { Internal, Action, Success, Failure };
  Kind kind = Kind::Internal;
  ResolvedAction action;
  Diagnosis diagnosis;
};

struct LoopFrame {
  std::string node_id;
  std::vector<Value> items;
  std::size_t index = 0;
};

// The explicit execution state: current node v, scope C, symbolic state Z,
// plus loop enumeration frames and step accounting.
struct ExecState {
  const SkillSchema* skill = nullptr;
  std::string current;
  Scope scope;
  SymbolicState state;
  std::vector<LoopFrame> loop_frames;
  std::size_t internal_steps = 0;
  std::size_t emitted_actions = 0;
  std::size_t internal_budget = 64 * 65;
  LoopEntry entered_via = LoopEntry::None;
  bool awaiting_observation = false;
  bool done = false;
  // Last Check evaluation in unsatisfied polarity, for failure diagnoses.
  Expr last_guard;
  std::vector<GroundAtom> last_guard_witnesses;

  const SkillGraph& graph() const { return skill->graph; }
};

namespace interp_detail {

// Node-local environment: the enclosing scope plus this node's local_in
// bindings. Bindings may reference globals only.
inline Scope node_env(const Node& n, const Scope& scope, const SymbolicState& state,
                      EvalTrace* trace = nullptr) {
  Scope env = scope;
  for (const auto& [name, b] : n.local_in) env.locals[name] = eval_expression(b.binding, scope, state, trace);
  return env;
}

inline std::string render_value(const Value& v) {
  return v.kind() == ValueKind::Object ? v.as_object() : v.str();
}

inline std::string render_template(const std::string& tmpl, const Scope& env) {
  std::string out;
  std::size_t p = 0;
  while (p < tmpl.size()) {
    if (tmpl.compare(p, 2, "{{") == 0) {
      std::size_t e = tmpl.find("}}", p + 2);
      if (e == std::string::npos) { out += tmpl.substr(p); break; }
      std::string name = tmpl.substr(p + 2, e - p - 2);
      if (auto v = env.try_get(name)) out += render_value(*v);
      else out += "{{" + name + "}}";
      p = e + 2;
    } else {
      out += tmpl[p++];
    }
  }
  return out;
}

inline const Edge* sole_out_edge(const SkillGraph& g, const std::string& id) {
  auto outs = g.out_edges(id);
  if (outs.size() != 1) throw Error("node " + id + " has no unique successor");
  return outs[0];
}

inline const Edge* branch_edge(const SkillGraph& g, const std::string& id, BranchLabel want) {
  for (const auto* e : g.out_edges(id))
    if (e->branch == want) return e;
  throw Error("node " + id + " lacks a " + branch_name(want) + " edge");
}

}  // namespace interp_detail

inline std::string scope_summary(const Scope& s) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : s.globals) {
    if (!first) out += ", ";
    first = false;
    out += k + "=" + interp_detail::render_value(v);
  }
  return out + "}";
}

// Seed an execution: parameters become UPPERCASE globals. A parameter
// missing from the bindings may self-bind through its docstring binder
// expression against z0; otherwise MissingParam.
inline ExecState init_execution(const SkillSchema& skill,
                                const std::map<std::string, Value>& bindings,
                                const SymbolicState& z0) {
  ExecState xs;
  xs.skill = &skill;
  xs.state = z0;
  xs.current = skill.graph.start;

  std::map<std::string, Value> upper;
  for (const auto& [k, v] : bindings) upper[to_upper_ident(k)] = v;

  for (const auto& p : skill.graph.params) {
    auto it = upper.find(p.name);
    if (it != upper.end()) {
      ValueKind want = tag_value_kind(p.type_tag);
      if (it->second.kind() != want)
        throw TypeMismatch(p.type_tag, kind_name(it->second.kind()));
      xs.scope.globals[p.name] = it->second;
      upper.erase(it);
      continue;
    }
    auto binder = skill.docstring.param_binders.find(p.name);
    if (binder == skill.docstring.param_binders.end()) throw MissingParam(p.name);
    xs.scope.globals[p.name] = eval_expression(binder->second, xs.scope, z0);
  }
  for (const auto& [k, v] : upper)
    throw Error("unknown parameter binding: " + k);
  return xs;
}

// One deterministic interpreter step. Internal steps never change Z;
// a PrimitiveAction leaves Z untouched until apply_observation.
inline StepOutcome step(ExecState& xs) {
  using namespace interp_detail;
  if (xs.done) throw Error("step on a terminal execution");
  const SkillGraph& g = xs.graph();
  const Node* n = g.find(xs.current);
  if (!n) throw Error("current node vanished: " + xs.current);

  if (++xs.internal_steps > xs.internal_budget) throw InternalBudgetExceeded();

  auto advance = [&](const Edge* e) {
    xs.current = e->to;
    xs.entered_via = e->loop_entry;
  };

  auto binding_failure = [&](const std::string& what, const Expr& unsatisfied,
                             std::vector<GroundAtom> witnesses) {
    xs.done = true;
    StepOutcome out;
    out.kind = StepOutcome::Kind::Failure;
    out.diagnosis.node_id = n->id;
    out.diagnosis.condition = unsatisfied ? unsatisfied : ExprNode::constant(Value::boolean(false));
    out.diagnosis.witnesses = std::move(witnesses);
    out.diagnosis.text = what + ": " + serialize(out.diagnosis.condition);
    return out;
  };

  switch (n->kind) {
    case NodeKind::Start: {
      advance(sole_out_edge(g, n->id));
      return {};
    }
    case NodeKind::Spec:
      throw Error("spec node reached during execution: " + n->id);

    case NodeKind::DataOp: {
      try {
        EvalTrace trace;
        Scope env = node_env(*n, xs.scope, xs.state, &trace);
        for (const auto& [name, w] : n->writes_global)
          xs.scope.globals[name] = eval_expression(w.expr, env, xs.state, &trace);
      } catch (const NoMatch& e) {
        // The select body had no witness; the unsatisfied condition is its
        // existential form, ground against the current scope.
        Expr unsat;
        for (const auto& [name, w] : n->writes_global)
          if (w.expr->op == ExprOp::SelectOne)
            unsat = ground_out(ExprNode::select(ExprOp::Exists, w.expr->type_tag, w.expr->binder,
                                                w.expr->kids[0]),
                               interp_detail::node_env(*n, xs.scope, xs.state));
        return binding_failure("binding failed at " + n->id, unsat, {});
      } catch (const Error& e) {
        return binding_failure(std::string("binding error at ") + n->id + " (" + e.what() + ")",
                               nullptr, {});
      }
      advance(sole_out_edge(g, n->id));
      return {};
    }

    case NodeKind::Check: {
      bool truth;
      EvalTrace trace;
      try {
        Scope env = node_env(*n, xs.scope, xs.state, &trace);
        Expr ground = ground_out(n->condition, env);
        truth = eval_condition(n->condition, env, xs.state, &trace);
        xs.last_guard = truth ? ExprNode::negate(ground) : ground;
        xs.last_guard_witnesses = trace.entailed_atoms;
      } catch (const Error& e) {
        return binding_failure(std::string("check error at ") + n->id + " (" + e.what() + ")",
                               nullptr, {});
      }
      advance(branch_edge(g, n->id, truth ? BranchLabel::Yes : BranchLabel::No));
      return {};
    }

    case NodeKind::LoopControl: {
      LoopFrame* frame = nullptr;
      for (auto& f : xs.loop_frames)
        if (f.node_id == n->id) frame = &f;
      try {
        if (xs.entered_via == LoopEntry::Continue && frame) {
          frame->index++;
        } else {
          // Start_Loop (or first arrival): snapshot the item list.
          Scope env = node_env(*n, xs.scope, xs.state);
          Value items = n->loop_source ? eval_expression(n->loop_source, env, xs.state)
                                       : Value::list(ValueKind::Object);
          if (frame) {
            frame->items = items.as_list().items;
            frame->index = 0;
          } else {
            xs.loop_frames.push_back({n->id, items.as_list().items, 0});
            frame = &xs.loop_frames.back();
          }
        }
        if (frame->index < frame->items.size()) {
          Scope env = node_env(*n, xs.scope, xs.state);
          env.locals[n->loop_var] = frame->items[frame->index];
          for (const auto& [name, w] : n->writes_global)
            xs.scope.globals[name] = eval_expression(w.expr, env, xs.state);
          advance(branch_edge(g, n->id, BranchLabel::Body));
        } else {
          for (auto it = xs.loop_frames.begin(); it != xs.loop_frames.end(); ++it)
            if (it->node_id == n->id) { xs.loop_frames.erase(it); break; }
          advance(branch_edge(g, n->id, BranchLabel::Done));
        }
      } catch (const Error& e) {
        return binding_failure(std::string("loop error at ") + n->id + " (" + e.what() + ")",
                               nullptr, {});
      }
      return {};
    }

    case NodeKind::PrimitiveAction: {
      StepOutcome out;
      try {
        Scope env = node_env(*n, xs.scope, xs.state);
        out.kind = StepOutcome::Kind::Action;
        out.action.template_text = n->action_template;
        out.action.node_id = n->id;
        out.action.text = render_template(n->action_template, env);
        for (const auto& slot : template_slots(n->action_template))
          out.action.args.emplace_back(slot, env.get(slot));
      } catch (const Error& e) {
        return binding_failure(std::string("argument error at ") + n->id + " (" + e.what() + ")",
                               nullptr, {});
      }
      xs.emitted_actions++;
      xs.awaiting_observation = true;
      advance(sole_out_edge(g, n->id));
      return out;
    }

    case NodeKind::Success: {
      xs.done = true;
      StepOutcome out;
      out.kind = StepOutcome::Kind::Success;
      return out;
    }

    case NodeKind::Failure: {
      xs.done = true;
      StepOutcome out;
      out.kind = StepOutcome::Kind::Failure;
      out.diagnosis.node_id = n->id;
      out.diagnosis.condition =
          xs.last_guard ? xs.last_guard : ExprNode::constant(Value::boolean(false));
      out.diagnosis.witnesses = xs.last_guard_witnesses;
      std::string tmpl = n->diagnosis_template.empty() ? "skill failed" : n->diagnosis_template;
      out.diagnosis.text = interp_detail::render_template(tmpl, xs.scope) + ": " +
                           serialize(out.diagnosis.condition) + " with " + scope_summary(xs.scope);
      return out;
    }
  }
  throw Error("unhandled node kind");
}

// Perception after interaction: fold the grounded delta into Z. The scope
// is untouched.
inline void apply_observation(ExecState& xs, const FactDelta& delta, const Vocabulary& vocab) {
  if (!xs.awaiting_observation)
    throw Error("apply_observation without a preceding action");
  xs.state = apply_fact_delta(vocab, xs.state, delta);
  xs.awaiting_observation = false;
}

}  // namespace nsi
