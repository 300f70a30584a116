#pragma once

// Predicate invention: search for the smallest expression separating the
// states where an action belongs from the states where it does not.
// Search tiers: atoms (ground and scope-lifted), negations, then
// 2-conjunctions. Within a tier candidates are ranked by AST size, then by
// object-constant count (so scope-lifted forms beat ground ones), then by
// canonical text.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "nsi/logic/eval.hpp"
#include "nsi/logic/state.hpp"

namespace nsi {

struct NoSeparator : Error {
  NoSeparator() : Error("no separating predicate within the search depth") {}
};

namespace invent_detail {

inline std::size_t const_leaves(const Expr& e) {
  if (e->op == ExprOp::Const && e->value.kind() == ValueKind::Object) return 1;
  std::size_t n = 0;
  for (const auto& k : e->kids) n += const_leaves(k);
  return n;
}

struct RankedExpr {
  Expr expr;
  std::size_t size;
  std::size_t consts;
  std::string text;

  explicit RankedExpr(Expr e)
      : expr(e), size(ast_size(e)), consts(const_leaves(e)), text(serialize(e)) {}

  bool operator<(const RankedExpr& o) const {
    if (size != o.size) return size < o.size;
    if (consts != o.consts) return consts < o.consts;
    return text < o.text;
  }
};

// Truth vector of an expression over a list of states under a fixed scope.
// Unevaluable candidates (unbound names) are dropped by the caller.
inline bool truth_on(const Expr& e, const Scope& scope, const std::vector<SymbolicState>& states,
                     std::vector<bool>* out) {
  out->clear();
  for (const auto& s : states) {
    try {
      out->push_back(eval_condition(e, scope, s));
    } catch (const Error&) {
      return false;
    }
  }
  return true;
}

}  // namespace invent_detail

// Ground and scope-lifted atom pool over the objects present in the given
// states. Bounded: predicates are at most binary and the object roster is
// desk-scale.
inline std::vector<Expr> separator_atom_pool(const std::vector<SymbolicState>& states,
                                             const Vocabulary& vocab, const Scope& scope) {
  std::set<std::string> objects;
  std::set<std::string> categories;
  for (const auto& s : states)
    for (const auto& [tag, objs] : s.universe) {
      categories.insert(tag);
      for (const auto& o : objs) objects.insert(o);
    }

  // Scope globals with object values, for lifting constants.
  std::vector<std::pair<std::string, std::string>> lifts;  // var name -> object symbol
  for (const auto& [name, val] : scope.globals)
    if (val.kind() == ValueKind::Object) lifts.emplace_back(name, val.as_object());

  std::vector<Expr> pool;
  auto push_with_lifts = [&](const Expr& atom) {
    pool.push_back(atom);
    for (const auto& [var, sym] : lifts) {
      Expr lifted = lift_constant(atom, sym, var);
      if (!expr_equal(lifted, atom)) pool.push_back(lifted);
    }
  };

  for (const auto& [name, schema] : vocab.all()) {
    if (schema.kind != PredicateKind::Boolean) continue;
    if (schema.type_check) {
      for (const auto& o : objects)
        for (const auto& cat : categories)
          push_with_lifts(ExprNode::pred(name,
                                         {ExprNode::constant(Value::object(o)),
                                          ExprNode::constant(Value::object(cat))},
                                         true));
      continue;
    }
    if (schema.args.size() == 1) {
      for (const auto& o : objects)
        push_with_lifts(ExprNode::pred(name, {ExprNode::constant(Value::object(o))}));
    } else if (schema.args.size() == 2 && schema.args[0] == ArgType::Object &&
               schema.args[1] == ArgType::Object) {
      for (const auto& a : objects)
        for (const auto& b : objects)
          push_with_lifts(ExprNode::pred(
              name, {ExprNode::constant(Value::object(a)), ExprNode::constant(Value::object(b))}));
    }
  }
  return pool;
}

// Smallest expression true on every positive state and false on every
// negative one.
inline Expr invent_branch_predicate(const std::vector<SymbolicState>& positives,
                                    const std::vector<SymbolicState>& negatives,
                                    const Vocabulary& vocab, const Scope& scope) {
  using namespace invent_detail;
  if (positives.empty() || negatives.empty())
    throw Error("invent_branch_predicate needs nonempty positive and negative sets");

  std::vector<SymbolicState> all = positives;
  all.insert(all.end(), negatives.begin(), negatives.end());

  struct Cand {
    RankedExpr ranked;
    std::vector<bool> pos_truth;
    std::vector<bool> neg_truth;
  };
  std::vector<Cand> atoms;
  for (const auto& atom : separator_atom_pool(all, vocab, scope)) {
    Cand c{RankedExpr(atom), {}, {}};
    if (!truth_on(atom, scope, positives, &c.pos_truth)) continue;
    if (!truth_on(atom, scope, negatives, &c.neg_truth)) continue;
    atoms.push_back(std::move(c));
  }

  auto all_true = [](const std::vector<bool>& v) {
    for (bool b : v)
      if (!b) return false;
    return true;
  };
  auto all_false = [](const std::vector<bool>& v) {
    for (bool b : v)
      if (b) return false;
    return true;
  };

  // Tier 1: plain atoms.
  std::vector<RankedExpr> tier;
  for (const auto& c : atoms)
    if (all_true(c.pos_truth) && all_false(c.neg_truth)) tier.push_back(c.ranked);
  if (!tier.empty()) return std::min_element(tier.begin(), tier.end())->expr;

  // Tier 2: negations.
  tier.clear();
  for (const auto& c : atoms)
    if (all_false(c.pos_truth) && all_true(c.neg_truth))
      tier.push_back(RankedExpr(ExprNode::negate(c.ranked.expr)));
  if (!tier.empty()) return std::min_element(tier.begin(), tier.end())->expr;

  // Tier 3: 2-conjunctions of literals true on all positives.
  struct Literal {
    RankedExpr ranked;
    std::vector<bool> neg_truth;
  };
  std::vector<Literal> literals;
  for (const auto& c : atoms) {
    if (all_true(c.pos_truth)) literals.push_back({c.ranked, c.neg_truth});
    if (all_false(c.pos_truth)) {
      std::vector<bool> flipped = c.neg_truth;
      flipped.flip();
      literals.push_back({RankedExpr(ExprNode::negate(c.ranked.expr)), flipped});
    }
  }
  tier.clear();
  for (std::size_t i = 0; i < literals.size(); ++i)
    for (std::size_t j = i + 1; j < literals.size(); ++j) {
      bool separates = true;
      for (std::size_t n = 0; n < negatives.size() && separates; ++n)
        separates = !(literals[i].neg_truth[n] && literals[j].neg_truth[n]);
      if (!separates) continue;
      Expr a = literals[i].ranked.expr, b = literals[j].ranked.expr;
      if (literals[j].ranked < literals[i].ranked) std::swap(a, b);
      tier.push_back(RankedExpr(ExprNode::conj(a, b)));
    }
  if (!tier.empty()) return std::min_element(tier.begin(), tier.end())->expr;

  throw NoSeparator();
}

}  // namespace nsi
