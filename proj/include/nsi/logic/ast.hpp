#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "nsi/logic/value.hpp"
#include "nsi/logic/vocabulary.hpp"

namespace nsi {

// Static expression types. Object/Num/Bool values plus homogeneous lists.
struct ExprType {
  ValueKind kind = ValueKind::Bool;
  ValueKind elem = ValueKind::Object;  // for kind == List

  static ExprType obj() { return {ValueKind::Object, ValueKind::Object}; }
  static ExprType num() { return {ValueKind::Num, ValueKind::Object}; }
  static ExprType boolean() { return {ValueKind::Bool, ValueKind::Object}; }
  static ExprType list_of(ValueKind e) { return {ValueKind::List, e}; }

  bool operator==(const ExprType& o) const {
    return kind == o.kind && (kind != ValueKind::List || elem == o.elem);
  }
  std::string str() const {
    if (kind == ValueKind::List) return std::string("List_") + kind_name(elem);
    return kind_name(kind);
  }
};

enum class ExprOp {
  Const,      // value
  Var,        // name (lowercase local or UPPERCASE global)
  Pred,       // name + object/num args, closed-world boolean
  Not, And, Or,
  CmpLt, CmpGt, CmpEq,
  Add, Sub, Mul, Div,
  Attr,       // numeric attribute lookup
  SelectOne,  // type_tag + binder + boolean body
  SelectAll,
  SelectIdx,  // list + index
  Exists,
};

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

// Immutable AST node. Built once by the parser (or by operators) and shared
// freely; evaluation never mutates.
struct ExprNode {
  ExprOp op;
  ExprType type;

  Value value;             // Const
  std::string name;        // Var, Pred, Attr
  std::string type_tag;    // SelectOne/SelectAll/Exists domain
  std::string binder;      // SelectOne/SelectAll/Exists bound variable
  std::vector<Expr> kids;  // operands / call args / [body] / [list, idx]
  bool pred_type_check = false;  // resolved from the vocabulary at parse time

  static Expr constant(Value v) {
    auto n = std::make_shared<ExprNode>();
    n->op = ExprOp::Const;
    switch (v.kind()) {
      case ValueKind::Object: n->type = ExprType::obj(); break;
      case ValueKind::Num: n->type = ExprType::num(); break;
      case ValueKind::Bool: n->type = ExprType::boolean(); break;
      case ValueKind::List: n->type = ExprType::list_of(v.as_list().elem); break;
    }
    n->value = std::move(v);
    return n;
  }

  static Expr var(std::string name, ExprType t = ExprType::obj()) {
    auto n = std::make_shared<ExprNode>();
    n->op = ExprOp::Var;
    n->type = t;
    n->name = std::move(name);
    return n;
  }

  static Expr pred(std::string name, std::vector<Expr> args, bool type_check = false) {
    auto n = std::make_shared<ExprNode>();
    n->op = ExprOp::Pred;
    n->type = ExprType::boolean();
    n->name = std::move(name);
    n->kids = std::move(args);
    n->pred_type_check = type_check;
    return n;
  }

  static Expr unary(ExprOp op, Expr a, ExprType t) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->type = t;
    n->kids = {std::move(a)};
    return n;
  }

  static Expr binary(ExprOp op, Expr a, Expr b, ExprType t) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->type = t;
    n->kids = {std::move(a), std::move(b)};
    return n;
  }

  static Expr negate(Expr a) { return unary(ExprOp::Not, std::move(a), ExprType::boolean()); }
  static Expr conj(Expr a, Expr b) { return binary(ExprOp::And, std::move(a), std::move(b), ExprType::boolean()); }
  static Expr disj(Expr a, Expr b) { return binary(ExprOp::Or, std::move(a), std::move(b), ExprType::boolean()); }

  static Expr attr(std::string name, Expr arg) {
    auto n = std::make_shared<ExprNode>();
    n->op = ExprOp::Attr;
    n->type = ExprType::num();
    n->name = std::move(name);
    n->kids = {std::move(arg)};
    return n;
  }

  static Expr select(ExprOp op, std::string type_tag, std::string binder, Expr body) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->type = op == ExprOp::SelectAll ? ExprType::list_of(ValueKind::Object)
             : op == ExprOp::Exists   ? ExprType::boolean()
                                      : ExprType::obj();
    n->type_tag = std::move(type_tag);
    n->binder = std::move(binder);
    n->kids = {std::move(body)};
    return n;
  }

  static Expr select_idx(Expr list, Expr idx) {
    auto n = std::make_shared<ExprNode>();
    n->op = ExprOp::SelectIdx;
    n->type.kind = list->type.elem;
    n->kids = {std::move(list), std::move(idx)};
    return n;
  }
};

inline std::size_t ast_size(const Expr& e) {
  std::size_t n = 1;
  for (const auto& k : e->kids) n += ast_size(k);
  return n;
}

// Free variables (binders remove their own name from the body's set).
inline void free_vars_into(const Expr& e, std::set<std::string>& out) {
  if (e->op == ExprOp::Var) {
    out.insert(e->name);
    return;
  }
  if (e->op == ExprOp::SelectOne || e->op == ExprOp::SelectAll || e->op == ExprOp::Exists) {
    std::set<std::string> body;
    free_vars_into(e->kids[0], body);
    body.erase(e->binder);
    out.insert(body.begin(), body.end());
    return;
  }
  for (const auto& k : e->kids) free_vars_into(k, out);
}

inline std::set<std::string> free_vars(const Expr& e) {
  std::set<std::string> out;
  free_vars_into(e, out);
  return out;
}

namespace detail {

inline int precedence(ExprOp op) {
  switch (op) {
    case ExprOp::Or: return 1;
    case ExprOp::And: return 2;
    case ExprOp::Not: return 3;
    case ExprOp::CmpLt: case ExprOp::CmpGt: case ExprOp::CmpEq: return 4;
    case ExprOp::Add: case ExprOp::Sub: return 5;
    case ExprOp::Mul: case ExprOp::Div: return 6;
    default: return 7;
  }
}

inline void serialize_into(const Expr& e, std::string& out, int parent_prec,
                           bool brace_vars = false, const std::set<std::string>* bound = nullptr) {
  int prec = precedence(e->op);
  bool paren = prec < parent_prec;
  std::set<std::string> bound_local;
  if (bound) bound_local = *bound;
  if (e->op == ExprOp::SelectOne || e->op == ExprOp::SelectAll || e->op == ExprOp::Exists)
    bound_local.insert(e->binder);
  const std::set<std::string>* inner_bound = brace_vars ? &bound_local : nullptr;
  if (paren) out += "(";
  switch (e->op) {
    case ExprOp::Const: out += e->value.str(); break;
    case ExprOp::Var:
      // Free variables render as {{name}} placeholders in scaffold text.
      if (brace_vars && (!bound || !bound->count(e->name)))
        out += "{{" + e->name + "}}";
      else
        out += e->name;
      break;
    case ExprOp::Pred:
    case ExprOp::Attr: {
      out += e->name + "(";
      for (std::size_t i = 0; i < e->kids.size(); ++i) {
        if (i) out += ", ";
        serialize_into(e->kids[i], out, 0, brace_vars, inner_bound);
      }
      out += ")";
      break;
    }
    case ExprOp::Not:
      out += "not ";
      serialize_into(e->kids[0], out, prec + 1, brace_vars, inner_bound);
      break;
    case ExprOp::And:
    case ExprOp::Or: {
      serialize_into(e->kids[0], out, prec, brace_vars, inner_bound);
      out += e->op == ExprOp::And ? " and " : " or ";
      serialize_into(e->kids[1], out, prec + 1, brace_vars, inner_bound);
      break;
    }
    case ExprOp::CmpLt: case ExprOp::CmpGt: case ExprOp::CmpEq:
    case ExprOp::Add: case ExprOp::Sub: case ExprOp::Mul: case ExprOp::Div: {
      const char* sym = e->op == ExprOp::CmpLt ? " < "
                        : e->op == ExprOp::CmpGt ? " > "
                        : e->op == ExprOp::CmpEq ? " == "
                        : e->op == ExprOp::Add ? " + "
                        : e->op == ExprOp::Sub ? " - "
                        : e->op == ExprOp::Mul ? " * " : " / ";
      serialize_into(e->kids[0], out, prec, brace_vars, inner_bound);
      out += sym;
      serialize_into(e->kids[1], out, prec + 1, brace_vars, inner_bound);
      break;
    }
    case ExprOp::SelectOne:
    case ExprOp::SelectAll:
    case ExprOp::Exists: {
      out += e->op == ExprOp::SelectOne ? "select_one" : e->op == ExprOp::SelectAll ? "select_all" : "exists";
      out += "('" + e->type_tag + "', lambda " + e->binder + ": ";
      serialize_into(e->kids[0], out, 0, brace_vars, inner_bound);
      out += ")";
      break;
    }
    case ExprOp::SelectIdx: {
      out += "select_idx(";
      serialize_into(e->kids[0], out, 0, brace_vars, inner_bound);
      out += ", ";
      serialize_into(e->kids[1], out, 0, brace_vars, inner_bound);
      out += ")";
      break;
    }
  }
  if (paren) out += ")";
}

}  // namespace detail

// Canonical concrete syntax; parse(serialize(e)) is structurally e.
inline std::string serialize(const Expr& e) {
  std::string out;
  detail::serialize_into(e, out, 0);
  return out;
}

// Scaffold rendering: free variables become {{name}} placeholders.
inline std::string serialize_braced(const Expr& e) {
  std::string out;
  std::set<std::string> bound;
  detail::serialize_into(e, out, 0, true, &bound);
  return out;
}

inline bool expr_equal(const Expr& a, const Expr& b) {
  if (a->op != b->op || !(a->type == b->type)) return false;
  if (a->name != b->name || a->type_tag != b->type_tag || a->binder != b->binder) return false;
  if (a->op == ExprOp::Const && a->value != b->value) return false;
  if (a->kids.size() != b->kids.size()) return false;
  for (std::size_t i = 0; i < a->kids.size(); ++i)
    if (!expr_equal(a->kids[i], b->kids[i])) return false;
  return true;
}

// Replace free occurrences of a variable with another expression.
inline Expr substitute_var(const Expr& e, const std::string& var, const Expr& replacement) {
  if (e->op == ExprOp::Var) return e->name == var ? replacement : e;
  if ((e->op == ExprOp::SelectOne || e->op == ExprOp::SelectAll || e->op == ExprOp::Exists) &&
      e->binder == var)
    return e;  // shadowed
  auto n = std::make_shared<ExprNode>(*e);
  for (auto& k : n->kids) k = substitute_var(k, var, replacement);
  return n;
}

// Replace Object constants equal to `symbol` with a variable reference.
inline Expr lift_constant(const Expr& e, const std::string& symbol, const std::string& var) {
  if (e->op == ExprOp::Const && e->value.kind() == ValueKind::Object &&
      e->value.as_object() == symbol)
    return ExprNode::var(var, ExprType::obj());
  auto n = std::make_shared<ExprNode>(*e);
  for (auto& k : n->kids) k = lift_constant(k, symbol, var);
  return n;
}

}  // namespace nsi
