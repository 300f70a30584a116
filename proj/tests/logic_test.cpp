#include <catch2/catch_amalgamated.hpp>

#include "nsi/logic/eval.hpp"
#include "nsi/logic/parser.hpp"
#include "support/expr_gen.hpp"

using namespace nsi;
using nsi::testsupport::ExprGen;
using nsi::testsupport::Rng;
using nsi::testsupport::random_state;
using nsi::testsupport::tiny_vocab;

namespace {

GroundAtom atom2(const std::string& p, const std::string& a, const std::string& b) {
  return {p, {Value::object(a), Value::object(b)}};
}
GroundAtom atom1(const std::string& p, const std::string& a) { return {p, {Value::object(a)}}; }

SymbolicState fridge_state() {
  SymbolicState s;
  s.register_object("Receptacle", "fridge_1");
  s.register_object("Receptacle", "dresser_1");
  s.register_object("Item", "apple_1");
  s.register_object("Item", "mug_1");
  s.register_object("apple", "apple_1");
  s.atoms.insert(atom2("contains", "fridge_1", "apple_1"));
  s.atoms.insert(atom1("is_open", "fridge_1"));
  return s;
}

}  // namespace

TEST_CASE("parse produces typed predicate applications") {
  auto vocab = tiny_vocab();
  Expr e = parse_expression("contains(fridge_1, apple_1)", vocab);
  REQUIRE(e->op == ExprOp::Pred);
  REQUIRE(e->name == "contains");
  REQUIRE(e->kids.size() == 2);
  REQUIRE(e->kids[0]->op == ExprOp::Const);
  REQUIRE(e->kids[0]->value.as_object() == "fridge_1");
  REQUIRE(e->kids[1]->value.as_object() == "apple_1");
}

TEST_CASE("parse defers unbound variable checks to evaluation") {
  auto vocab = tiny_vocab();
  Expr e = parse_expression("not is_open(x)", vocab);
  REQUIRE(e->op == ExprOp::Not);
  REQUIRE(e->kids[0]->op == ExprOp::Pred);
  REQUIRE(e->kids[0]->kids[0]->op == ExprOp::Var);
  Scope empty;
  REQUIRE_THROWS_AS(eval_expression(e, empty, fridge_state()), UnboundVariable);
}

TEST_CASE("parse select_one with lambda binder") {
  auto vocab = tiny_vocab();
  Expr e = parse_expression("select_one('Receptacle', lambda x: is_closed(x) and locates(x))", vocab);
  REQUIRE(e->op == ExprOp::SelectOne);
  REQUIRE(e->type_tag == "Receptacle");
  REQUIRE(e->binder == "x");
  REQUIRE(e->kids[0]->op == ExprOp::And);
}

TEST_CASE("parse accepts implicit binder form") {
  auto vocab = tiny_vocab();
  Expr a = parse_expression("select_all('Item', is_type(x, 'apple'))", vocab);
  Expr b = parse_expression("select_all('Item', lambda x: is_type(x, 'apple'))", vocab);
  REQUIRE(expr_equal(a, b));
}

TEST_CASE("parse errors carry positions and names") {
  auto vocab = tiny_vocab();
  REQUIRE_THROWS_AS(parse_expression("is_open(", vocab), SyntaxError);
  REQUIRE_THROWS_AS(parse_expression("no_such_pred(a_1)", vocab), UnknownPredicate);
  REQUIRE_THROWS_AS(parse_expression("is_open(count(a_1))", vocab), TypeMismatch);
  REQUIRE_THROWS_AS(parse_expression("is_open(a_1) and count(a_1)", vocab), TypeMismatch);
}

TEST_CASE("eval predicate membership and closed world") {
  auto vocab = tiny_vocab();
  auto s = fridge_state();
  Scope scope;
  REQUIRE(eval_condition(parse_expression("contains(fridge_1, apple_1)", vocab), scope, s));
  REQUIRE_FALSE(eval_condition(parse_expression("contains(dresser_1, apple_1)", vocab), scope, s));
  REQUIRE_FALSE(eval_condition(parse_expression("is_closed(fridge_1)", vocab), scope, s));
}

TEST_CASE("eval select_one with a scope-bound global") {
  auto vocab = tiny_vocab();
  auto s = fridge_state();
  Scope scope;
  scope.set("LOC", Value::object("fridge_1"));
  Expr e = parse_expression("select_one('Item', lambda x: is_type(x, 'apple') and contains(LOC, x))", vocab);
  REQUIRE(eval_expression(e, scope, s).as_object() == "apple_1");
}

TEST_CASE("eval select_one over empty match throws NoMatch") {
  auto vocab = tiny_vocab();
  auto s = fridge_state();
  Scope scope;
  Expr e = parse_expression("select_one('Item', lambda x: holding(x))", vocab);
  REQUIRE_THROWS_AS(eval_expression(e, scope, s), NoMatch);
}

TEST_CASE("select_all returns the closed receptacles in canonical order") {
  auto vocab = tiny_vocab();
  SymbolicState s;
  for (int i = 1; i <= 5; ++i) s.register_object("Receptacle", "rec_" + std::to_string(i));
  s.atoms.insert(atom1("is_closed", "rec_4"));
  s.atoms.insert(atom1("is_closed", "rec_2"));
  Scope scope;
  Expr e = parse_expression("select_all('Receptacle', lambda x: is_closed(x))", vocab);
  Value v = eval_expression(e, scope, s);
  REQUIRE(v.as_list().items.size() == 2);
  REQUIRE(v.as_list().items[0].as_object() == "rec_2");
  REQUIRE(v.as_list().items[1].as_object() == "rec_4");
}

TEST_CASE("arithmetic is exact and guards division by zero") {
  auto vocab = tiny_vocab();
  Scope scope;
  SymbolicState s;
  REQUIRE(eval_expression(parse_expression("(1 + 2) * 3", vocab), scope, s).as_num() == Rational(9));
  REQUIRE(eval_expression(parse_expression("1 / 3 + 1 / 6", vocab), scope, s).as_num() == Rational(1, 2));
  REQUIRE_THROWS_AS(eval_expression(parse_expression("1 / 0", vocab), scope, s), DivisionByZero);
}

TEST_CASE("entails matches atoms and agrees with eval on random atoms") {
  auto vocab = tiny_vocab();
  SymbolicState s;
  s.register_object("Item", "mug_1");
  s.atoms.insert(atom1("holding", "mug_1"));
  REQUIRE(entails(vocab, s, atom1("holding", "mug_1")));
  REQUIRE_FALSE(entails(vocab, SymbolicState{}, atom1("is_open", "fridge_1")));
  REQUIRE_THROWS_AS(entails(vocab, s, atom1("no_such", "mug_1")), UnknownPredicate);

  Rng rng(41);
  auto st = random_state(rng, vocab);
  std::vector<std::string> objs;
  for (const auto& [t, os] : st.universe)
    for (const auto& o : os) objs.push_back(o);
  std::vector<std::string> unary = {"is_open", "is_closed", "locates", "reachable", "holding"};
  for (int i = 0; i < 100; ++i) {
    GroundAtom a;
    if (rng.chance(60)) {
      a = atom1(rng.pick(unary), rng.pick(objs));
    } else {
      a = atom2("contains", rng.pick(objs), rng.pick(objs));
    }
    Expr pe = parse_expression(a.str(), vocab);
    Scope scope;
    REQUIRE(entails(vocab, st, a) == eval_expression(pe, scope, st).as_bool());
  }
}

TEST_CASE("apply_fact_delta implements set difference then union") {
  auto vocab = tiny_vocab();
  SymbolicState s;
  s.register_object("Receptacle", "dresser_1");
  s.register_object("Item", "mug_1");
  s.atoms.insert(atom2("contains", "dresser_1", "mug_1"));
  FactDelta d;
  d.add_facts.push_back(atom1("holding", "mug_1"));
  d.remove_facts.push_back(atom2("contains", "dresser_1", "mug_1"));
  auto out = apply_fact_delta(vocab, s, d);
  REQUIRE(out.atoms.size() == 1);
  REQUIRE(out.has(atom1("holding", "mug_1")));

  auto same = apply_fact_delta(vocab, s, FactDelta{});
  REQUIRE(same.atoms == s.atoms);

  // Round trip when adds were absent and removes were present.
  FactDelta inverse;
  inverse.add_facts = d.remove_facts;
  inverse.remove_facts = d.add_facts;
  auto back = apply_fact_delta(vocab, out, inverse);
  REQUIRE(back.atoms == s.atoms);
}

TEST_CASE("removing an absent atom is a flagged no-op") {
  auto vocab = tiny_vocab();
  FactDelta d;
  d.remove_facts.push_back(atom1("is_open", "fridge_1"));
  auto r = apply_fact_delta_checked(vocab, SymbolicState{}, d);
  REQUIRE(r.state.atoms.empty());
  REQUIRE(r.missing_removals.size() == 1);
}

TEST_CASE("new objects in add_facts are registered in the universe") {
  auto vocab = tiny_vocab();
  FactDelta d;
  d.add_facts.push_back(atom1("reachable", "sofa_1"));
  auto out = apply_fact_delta(vocab, SymbolicState{}, d, "Receptacle");
  REQUIRE(out.in_universe("Receptacle", "sofa_1"));
}

TEST_CASE("property: parse/serialize round trip on generated expressions") {
  auto vocab = tiny_vocab();
  Rng rng(7);
  ExprGen gen(rng, vocab);
  for (int i = 0; i < 300; ++i) {
    Expr e = gen.boolean(rng.range(1, 5));
    std::string text = serialize(e);
    INFO(text);
    Expr back = parse_expression(text, vocab);
    REQUIRE(expr_equal(e, back));
    REQUIRE(serialize(back) == text);
  }
}

TEST_CASE("property: evaluation is pure") {
  auto vocab = tiny_vocab();
  Rng rng(11);
  ExprGen gen(rng, vocab);
  for (int i = 0; i < 50; ++i) {
    auto s = random_state(rng, vocab);
    auto before_atoms = s.atoms;
    Scope scope;
    scope.set("TARGET", Value::object("item_1"));
    auto scope_digest = scope.digest();
    Expr e = gen.boolean(rng.range(1, 4));
    try {
      eval_expression(e, scope, s);
    } catch (const Error&) {
    }
    REQUIRE(s.atoms == before_atoms);
    REQUIRE(scope.digest() == scope_digest);
  }
}

TEST_CASE("property: adding atoms never falsifies positive-literal expressions") {
  auto vocab = tiny_vocab();
  Rng rng(13);
  for (int i = 0; i < 60; ++i) {
    auto s = random_state(rng, vocab);
    // Positive-literal-only expression: conjunction/disjunction of atoms.
    std::vector<std::string> objs;
    for (const auto& [t, os] : s.universe)
      for (const auto& o : os) objs.push_back(o);
    Expr e = ExprNode::pred("is_open", {ExprNode::constant(Value::object(rng.pick(objs)))});
    for (int j = 0; j < 3; ++j) {
      Expr more = ExprNode::pred("reachable", {ExprNode::constant(Value::object(rng.pick(objs)))});
      e = rng.chance(50) ? ExprNode::conj(e, more) : ExprNode::disj(e, more);
    }
    Scope scope;
    bool before = eval_condition(e, scope, s);
    if (!before) continue;
    auto s2 = s;
    s2.atoms.insert(atom1("is_open", rng.pick(objs)));
    s2.atoms.insert(atom1("reachable", rng.pick(objs)));
    REQUIRE(eval_condition(e, scope, s2));
  }
}

TEST_CASE("property: select_all equals brute-force filter; select_one is its minimum") {
  auto vocab = tiny_vocab();
  Rng rng(17);
  ExprGen gen(rng, vocab);
  for (int i = 0; i < 100; ++i) {
    auto s = random_state(rng, vocab);
    Expr all = gen.select_all(rng.range(1, 3));
    Scope scope;
    Value got = eval_expression(all, scope, s);
    // Brute force: iterate the typed universe directly and filter.
    std::vector<std::string> expect;
    for (const auto& obj : s.objects_of(all->type_tag)) {
      Scope inner;
      inner.set(all->binder, Value::object(obj));
      if (eval_condition(all->kids[0], inner, s)) expect.push_back(obj);
    }
    REQUIRE(got.as_list().items.size() == expect.size());
    for (std::size_t k = 0; k < expect.size(); ++k)
      REQUIRE(got.as_list().items[k].as_object() == expect[k]);

    Expr one = ExprNode::select(ExprOp::SelectOne, all->type_tag, all->binder, all->kids[0]);
    if (!expect.empty()) {
      Value v1 = eval_expression(one, scope, s);
      Value v2 = eval_expression(one, scope, s);
      REQUIRE(v1.as_object() == expect.front());
      REQUIRE(v1 == v2);
    } else {
      REQUIRE_THROWS_AS(eval_expression(one, scope, s), NoMatch);
    }
  }
}

TEST_CASE("attribute sync keeps counts single valued") {
  Vocabulary v;
  v.boolean_with_num("inventory").attribute("count", "inventory");
  SymbolicState s;
  s.register_object("Item", "stick");
  FactDelta d1;
  d1.add_facts.push_back({"inventory", {Value::object("stick"), Value::number(Rational(2))}});
  s = apply_fact_delta(v, s, d1);
  REQUIRE(s.attribute_or_zero("count", "stick") == Rational(2));
  FactDelta d2;
  d2.add_facts.push_back({"inventory", {Value::object("stick"), Value::number(Rational(5))}});
  s = apply_fact_delta(v, s, d2);
  REQUIRE(s.attribute_or_zero("count", "stick") == Rational(5));
  int count_atoms = 0;
  for (const auto& a : s.atoms)
    if (a.predicate == "inventory") ++count_atoms;
  REQUIRE(count_atoms == 1);
}
