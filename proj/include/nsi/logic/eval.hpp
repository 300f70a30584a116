#pragma once

#include <string>
#include <vector>

#include "nsi/logic/ast.hpp"
#include "nsi/logic/scope.hpp"
#include "nsi/logic/state.hpp"

namespace nsi {

// Optional witness collector: positive atom lookups consulted during
// evaluation. Used for routing evidence and failure diagnoses.
struct EvalTrace {
  std::vector<GroundAtom> entailed_atoms;
};

namespace detail {

inline Value eval_node(const Expr& e, Scope& scope, const SymbolicState& state, EvalTrace* trace);

inline bool eval_bool(const Expr& e, Scope& scope, const SymbolicState& state, EvalTrace* trace) {
  return eval_node(e, scope, state, trace).as_bool();
}

inline Value eval_pred(const Expr& e, Scope& scope, const SymbolicState& state, EvalTrace* trace) {
  GroundAtom atom;
  atom.predicate = e->name;
  for (const auto& arg : e->kids) atom.args.push_back(eval_node(arg, scope, state, trace));
  bool truth;
  if (e->pred_type_check) {
    truth = atom.args.size() == 2 &&
            state.in_universe(atom.args[1].as_object(), atom.args[0].as_object());
  } else {
    truth = state.has(atom);
  }
  if (truth && trace) trace->entailed_atoms.push_back(atom);
  return Value::boolean(truth);
}

inline Value eval_select(const Expr& e, Scope& scope, const SymbolicState& state, EvalTrace* trace) {
  std::vector<std::string> domain = state.objects_of(e->type_tag);
  // Binder shadows any outer binding of the same name.
  auto saved = scope.try_get(e->binder);
  std::vector<Value> matches;
  for (const auto& obj : domain) {
    scope.set(e->binder, Value::object(obj));
    bool ok = eval_bool(e->kids[0], scope, state, trace);
    if (ok) {
      matches.push_back(Value::object(obj));
      if (e->op == ExprOp::Exists) break;
    }
  }
  if (saved)
    scope.set(e->binder, *saved);
  else
    scope.locals.erase(e->binder);

  switch (e->op) {
    case ExprOp::Exists:
      return Value::boolean(!matches.empty());
    case ExprOp::SelectOne:
      // Canonical order is lexicographic, so the first match is the
      // deterministic tie-break winner.
      if (matches.empty()) throw NoMatch(serialize(e));
      return matches.front();
    default:
      return Value::list(ValueKind::Object, std::move(matches));
  }
}

inline Value eval_node(const Expr& e, Scope& scope, const SymbolicState& state, EvalTrace* trace) {
  switch (e->op) {
    case ExprOp::Const:
      return e->value;
    case ExprOp::Var:
      return scope.get(e->name);
    case ExprOp::Pred:
      return eval_pred(e, scope, state, trace);
    case ExprOp::Not:
      return Value::boolean(!eval_bool(e->kids[0], scope, state, trace));
    case ExprOp::And:
      return Value::boolean(eval_bool(e->kids[0], scope, state, trace) &&
                            eval_bool(e->kids[1], scope, state, trace));
    case ExprOp::Or:
      return Value::boolean(eval_bool(e->kids[0], scope, state, trace) ||
                            eval_bool(e->kids[1], scope, state, trace));
    case ExprOp::CmpLt:
    case ExprOp::CmpGt:
    case ExprOp::CmpEq: {
      Value a = eval_node(e->kids[0], scope, state, trace);
      Value b = eval_node(e->kids[1], scope, state, trace);
      if (e->op == ExprOp::CmpEq) return Value::boolean(a == b);
      if (e->op == ExprOp::CmpLt) return Value::boolean(a.as_num() < b.as_num());
      return Value::boolean(a.as_num() > b.as_num());
    }
    case ExprOp::Add:
    case ExprOp::Sub:
    case ExprOp::Mul:
    case ExprOp::Div: {
      Rational a = eval_node(e->kids[0], scope, state, trace).as_num();
      Rational b = eval_node(e->kids[1], scope, state, trace).as_num();
      switch (e->op) {
        case ExprOp::Add: return Value::number(a + b);
        case ExprOp::Sub: return Value::number(a - b);
        case ExprOp::Mul: return Value::number(a * b);
        default: return Value::number(a / b);
      }
    }
    case ExprOp::Attr: {
      Value obj = eval_node(e->kids[0], scope, state, trace);
      // Missing attribute reads as zero (closed world for counts).
      return Value::number(state.attribute_or_zero(e->name, obj.as_object()));
    }
    case ExprOp::SelectOne:
    case ExprOp::SelectAll:
    case ExprOp::Exists:
      return eval_select(e, scope, state, trace);
    case ExprOp::SelectIdx: {
      Value list = eval_node(e->kids[0], scope, state, trace);
      Rational idx = eval_node(e->kids[1], scope, state, trace).as_num();
      const auto& l = list.as_list();
      if (!idx.is_integer() || idx.num < 0 ||
          static_cast<std::size_t>(idx.num) >= l.items.size())
        throw IndexOutOfRange(serialize(e) + " with index " + idx.str() + " into " +
                              std::to_string(l.items.size()) + " items");
      return l.items[static_cast<std::size_t>(idx.num)];
    }
  }
  throw Error("eval: unhandled node");
}

}  // namespace detail

// Evaluate an expression. Pure: neither the scope nor the state is changed
// (binder bindings are scoped to the call).
inline Value eval_expression(const Expr& e, const Scope& scope, const SymbolicState& state,
                             EvalTrace* trace = nullptr) {
  Scope working = scope;
  return detail::eval_node(e, working, state, trace);
}

inline bool eval_condition(const Expr& e, const Scope& scope, const SymbolicState& state,
                           EvalTrace* trace = nullptr) {
  return eval_expression(e, scope, state, trace).as_bool();
}

// Substitute scope bindings for free variables, yielding a ground
// expression (used when rendering diagnoses).
inline Expr ground_out(const Expr& e, const Scope& scope) {
  Expr out = e;
  for (const auto& name : free_vars(e)) {
    if (auto v = scope.try_get(name)) out = substitute_var(out, name, ExprNode::constant(*v));
  }
  return out;
}

}  // namespace nsi
