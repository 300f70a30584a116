#include <catch2/catch_amalgamated.hpp>

#include "nsi/interp/episode.hpp"
#include "nsi/interp/exec.hpp"
#include "support/graph_gen.hpp"
#include "support/scripted_world.hpp"

using namespace nsi;
using namespace nsi::testsupport;

namespace {

SkillSchema wrap(SkillGraph g, std::string name = "test_skill") {
  SkillSchema s;
  s.name = std::move(name);
  s.sub_goal = s.name;
  s.graph = std::move(g);
  return s;
}

SkillSchema empty_body_skill() {
  GraphBuilder b;
  b.chain({"START", "SUCCESS_END"});
  return wrap(b.g, "noop");
}

GroundAtom atom1(const std::string& p, const std::string& a) { return {p, {Value::object(a)}}; }

}  // namespace

TEST_CASE("init seeds typed parameters as globals") {
  auto vocab = tiny_vocab();
  GraphBuilder b;
  b.action("A_GOTO", "go to {{goto_rec}}", {{"goto_rec", ExprNode::var("TARGET_REC")}});
  b.chain({"START", "A_GOTO", "SUCCESS_END"});
  b.g.params.push_back({"TARGET_REC", "ReceptacleName"});
  SkillSchema s = wrap(b.g);

  SECTION("lowercase binding keys normalize to the parameter name") {
    ExecState xs = init_execution(s, {{"target_rec", Value::object("fridge_1")}}, SymbolicState{});
    REQUIRE(xs.scope.globals.at("TARGET_REC").as_object() == "fridge_1");
  }
  SECTION("missing parameter is an error") {
    REQUIRE_THROWS_AS(init_execution(s, {}, SymbolicState{}), MissingParam);
  }
  SECTION("two params, one missing") {
    s.graph.params.push_back({"EXTRA", "ItemName"});
    REQUIRE_THROWS_AS(init_execution(s, {{"TARGET_REC", Value::object("fridge_1")}}, SymbolicState{}),
                      MissingParam);
  }
  SECTION("wrong kind is a type mismatch") {
    REQUIRE_THROWS_AS(init_execution(s, {{"TARGET_REC", Value::number(Rational(1))}}, SymbolicState{}),
                      TypeMismatch);
  }
  SECTION("a docstring binder self-binds a missing parameter") {
    SymbolicState z;
    z.register_object("Receptacle", "sink_1");
    z.atoms.insert(atom1("reachable", "sink_1"));
    s.docstring.param_binders["TARGET_REC"] =
        parse_expression("select_one('Receptacle', lambda x: reachable(x))", tiny_vocab());
    ExecState xs = init_execution(s, {}, z);
    REQUIRE(xs.scope.globals.at("TARGET_REC").as_object() == "sink_1");
  }
}

TEST_CASE("empty-body skill reaches success in two steps") {
  SkillSchema s = empty_body_skill();
  ExecState xs = init_execution(s, {}, SymbolicState{});
  auto o1 = step(xs);
  REQUIRE(o1.kind == StepOutcome::Kind::Internal);
  auto o2 = step(xs);
  REQUIRE(o2.kind == StepOutcome::Kind::Success);
  REQUIRE(xs.done);
}

TEST_CASE("check follows Yes when the atom is present") {
  auto vocab = tiny_vocab();
  GraphBuilder b;
  b.check("C_CLOSED", parse_expression("is_closed(fridge_1)", vocab));
  b.action("A_OPEN", "open {{open_rec}}", {{"open_rec", obj_const("fridge_1")}});
  b.chain({"START", "C_CLOSED"});
  b.edge("C_CLOSED", "A_OPEN", BranchLabel::Yes);
  b.edge("C_CLOSED", "SUCCESS_END", BranchLabel::No);
  b.edge("A_OPEN", "SUCCESS_END");
  SkillSchema s = wrap(b.g);

  SymbolicState z;
  z.register_object("Receptacle", "fridge_1");
  z.atoms.insert(atom1("is_closed", "fridge_1"));

  ExecState xs = init_execution(s, {}, z);
  step(xs);  // START
  auto o = step(xs);
  REQUIRE(o.kind == StepOutcome::Kind::Internal);
  REQUIRE(xs.current == "A_OPEN");

  // Same graph, open fridge: the No edge.
  SymbolicState z2;
  z2.register_object("Receptacle", "fridge_1");
  ExecState xs2 = init_execution(s, {}, z2);
  step(xs2);
  step(xs2);
  REQUIRE(xs2.current == "SUCCESS_END");
}

TEST_CASE("primitive action resolves its arguments from scope") {
  auto vocab = tiny_vocab();
  GraphBuilder b;
  b.action("A_OPEN", "open {{open_rec}}", {{"open_rec", ExprNode::var("OPEN_REC")}});
  b.chain({"START", "A_OPEN", "SUCCESS_END"});
  b.g.params.push_back({"OPEN_REC", "ReceptacleName"});
  SkillSchema s = wrap(b.g);

  ExecState xs = init_execution(s, {{"OPEN_REC", Value::object("fridge_1")}}, SymbolicState{});
  step(xs);
  auto o = step(xs);
  REQUIRE(o.kind == StepOutcome::Kind::Action);
  REQUIRE(o.action.text == "open fridge_1");
  REQUIRE(o.action.args.size() == 1);
  REQUIRE(o.action.args[0].second.as_object() == "fridge_1");
}

TEST_CASE("select_one over an empty match becomes a failure with a diagnosis") {
  auto vocab = tiny_vocab();
  GraphBuilder b;
  Node& d = b.node("D_BIND", NodeKind::DataOp);
  d.writes_global["TARGET_ITEM"] = {
      "ItemName", parse_expression("select_one('Item', lambda x: is_type(x, 'apple'))", vocab)};
  b.g.declared_globals["TARGET_ITEM"] = "ItemName";
  b.action("A_TAKE", "take {{take_item}} from {{from_rec}}",
           {{"take_item", ExprNode::var("TARGET_ITEM")}, {"from_rec", obj_const("fridge_1")}});
  b.chain({"START", "D_BIND", "A_TAKE", "SUCCESS_END"});
  SkillSchema s = wrap(b.g);

  SymbolicState z;  // no apples anywhere
  z.register_object("Item", "mug_1");
  ExecState xs = init_execution(s, {}, z);
  step(xs);
  auto o = step(xs);
  REQUIRE(o.kind == StepOutcome::Kind::Failure);
  REQUIRE(o.diagnosis.node_id == "D_BIND");
  // The unsatisfied condition is the existential form, false in terminal Z.
  Scope empty;
  REQUIRE_FALSE(eval_condition(o.diagnosis.condition, empty, xs.state));
  REQUIRE(o.diagnosis.text.find("exists") != std::string::npos);
}

TEST_CASE("apply_observation folds the delta and leaves scope alone") {
  auto vocab = tiny_vocab();
  GraphBuilder b;
  b.action("A_OPEN", "open {{open_rec}}", {{"open_rec", obj_const("fridge_1")}});
  b.chain({"START", "A_OPEN", "SUCCESS_END"});
  SkillSchema s = wrap(b.g);

  SymbolicState z;
  z.register_object("Receptacle", "fridge_1");
  z.atoms.insert(atom1("is_closed", "fridge_1"));

  ExecState xs = init_execution(s, {}, z);
  step(xs);
  auto o = step(xs);
  REQUIRE(o.kind == StepOutcome::Kind::Action);
  auto scope_before = xs.scope.digest();

  FactDelta d;
  d.add_facts.push_back(atom1("is_open", "fridge_1"));
  d.remove_facts.push_back(atom1("is_closed", "fridge_1"));
  apply_observation(xs, d, vocab);
  REQUIRE(xs.state.has(atom1("is_open", "fridge_1")));
  REQUIRE_FALSE(xs.state.has(atom1("is_closed", "fridge_1")));
  REQUIRE(xs.scope.digest() == scope_before);

  // Out-of-turn observation is a contract violation.
  REQUIRE_THROWS_AS(apply_observation(xs, FactDelta{}, vocab), Error);
}

namespace {

// Loop over a constant list visiting one action per element.
SkillSchema loop_skill(const std::vector<std::string>& items) {
  GraphBuilder b;
  Node& l = b.node("LOOP_RECS", NodeKind::LoopControl);
  l.loop_var = "rec_i";
  std::vector<Value> vals;
  for (const auto& i : items) vals.push_back(Value::object(i));
  l.loop_source = ExprNode::constant(Value::list(ValueKind::Object, vals));
  l.writes_global["CURRENT_RECEPTACLE"] = {"ReceptacleName", ExprNode::var("rec_i", ExprType::obj())};
  b.g.declared_globals["CURRENT_RECEPTACLE"] = "ReceptacleName";
  b.action("A_GOTO", "go to {{goto_rec}}", {{"goto_rec", ExprNode::var("CURRENT_RECEPTACLE")}});
  b.edge("START", "LOOP_RECS", BranchLabel::None, LoopEntry::Start);
  b.edge("LOOP_RECS", "A_GOTO", BranchLabel::Body);
  b.edge("LOOP_RECS", "SUCCESS_END", BranchLabel::Done);
  b.edge("A_GOTO", "LOOP_RECS", BranchLabel::None, LoopEntry::Continue);
  return wrap(b.g, "loop_skill");
}

}  // namespace

TEST_CASE("loop visits the body once per element, in order") {
  auto vocab = tiny_vocab();
  SkillSchema s = loop_skill({"drawer_1", "drawer_2", "drawer_3"});
  SymbolicState z;
  for (int i = 1; i <= 3; ++i) z.register_object("Receptacle", "drawer_" + std::to_string(i));

  ScriptedWorld w(z, vocab);
  for (int i = 1; i <= 3; ++i) w.script("go to drawer_" + std::to_string(i), {});
  EpisodeLog log = run_episode(s, {}, w, 10);
  REQUIRE(log.succeeded());
  REQUIRE(log_actions(log) ==
          std::vector<std::string>{"go to drawer_1", "go to drawer_2", "go to drawer_3"});

  // Empty list takes the done edge immediately.
  SkillSchema s0 = loop_skill({});
  ScriptedWorld w0(z, vocab);
  EpisodeLog log0 = run_episode(s0, {}, w0, 10);
  REQUIRE(log0.succeeded());
  REQUIRE(log_actions(log0).empty());
}

TEST_CASE("linear three-action skill succeeds in exactly three physical actions") {
  auto vocab = tiny_vocab();
  SkillGraph g = linear_graph(3);
  SkillSchema s = wrap(g, "chain3");
  SymbolicState z;
  for (int i = 1; i <= 3; ++i) z.register_object("Receptacle", "rec_" + std::to_string(i));
  ScriptedWorld w(z, vocab);
  for (int i = 1; i <= 3; ++i) w.script("go to rec_" + std::to_string(i), {});
  EpisodeLog log = run_episode(s, {}, w, 10);
  REQUIRE(log.succeeded());
  REQUIRE(log.physical_actions == 3);
}

TEST_CASE("budget zero with at least one action fails with a budget diagnosis") {
  auto vocab = tiny_vocab();
  SkillSchema s = wrap(linear_graph(1), "chain1");
  SymbolicState z;
  z.register_object("Receptacle", "rec_1");
  ScriptedWorld w(z, vocab);
  w.script("go to rec_1", {});
  EpisodeLog log = run_episode(s, {}, w, 0);
  REQUIRE_FALSE(log.succeeded());
  REQUIRE(log.final_diagnosis.text.find("budget") != std::string::npos);
}

TEST_CASE("failed world action surfaces the action precondition as diagnosis") {
  auto vocab = tiny_vocab();
  SkillSchema s = wrap(linear_graph(1), "chain1");
  SymbolicState z;
  z.register_object("Receptacle", "rec_1");
  ScriptedWorld w(z, vocab);  // nothing scripted: the action bounces
  EpisodeLog log = run_episode(s, {}, w, 5);
  REQUIRE_FALSE(log.succeeded());
  REQUIRE(log.final_diagnosis.text.find("no effect") != std::string::npos);
}

TEST_CASE("internal steps never change the state digest") {
  auto vocab = tiny_vocab();
  SkillSchema s = loop_skill({"drawer_1", "drawer_2"});
  SymbolicState z;
  z.register_object("Receptacle", "drawer_1");
  z.register_object("Receptacle", "drawer_2");
  ScriptedWorld w(z, vocab);
  w.script("go to drawer_1", {});
  w.script("go to drawer_2", {});
  EpisodeLog log = run_episode(s, {}, w, 10);
  REQUIRE(log.succeeded());
  std::uint64_t prev = 0;
  bool have_prev = false;
  for (const auto& r : log.records) {
    if (have_prev && r.outcome == "internal") REQUIRE(r.state_digest == prev);
    prev = r.state_digest;
    have_prev = r.outcome == "internal" || r.outcome == "action";
  }
}

TEST_CASE("identical runs produce byte-identical logs") {
  auto vocab = tiny_vocab();
  Rng rng(31);
  int checked = 0;
  for (int i = 0; i < 40 && checked < 25; ++i) {
    SkillGraph g = random_graph(rng, vocab, 7);
    if (!validates_clean(g)) continue;
    ++checked;
    SkillSchema s = wrap(g, "rand");
    SymbolicState z = random_state(rng, vocab);
    auto run_once = [&]() {
      ScriptedWorld w(z, vocab);
      for (int r = 1; r <= 4; ++r) w.script("go to rec_" + std::to_string(r), {});
      return run_episode(s, {}, w, 16).to_jsonl();
    };
    REQUIRE(run_once() == run_once());
  }
  REQUIRE(checked >= 20);
}

TEST_CASE("start_loop re-entry resets enumeration") {
  auto vocab = tiny_vocab();
  // Loop body runs twice through a check that re-starts the loop once.
  GraphBuilder b;
  Node& l = b.node("LOOP_RECS", NodeKind::LoopControl);
  l.loop_var = "rec_i";
  l.loop_source = ExprNode::constant(
      Value::list(ValueKind::Object, {Value::object("drawer_1"), Value::object("drawer_2")}));
  l.writes_global["CURRENT_RECEPTACLE"] = {"ReceptacleName", ExprNode::var("rec_i", ExprType::obj())};
  b.g.declared_globals["CURRENT_RECEPTACLE"] = "ReceptacleName";
  b.action("A_GOTO", "go to {{goto_rec}}", {{"goto_rec", ExprNode::var("CURRENT_RECEPTACLE")}});
  b.check("C_RESTART", parse_expression("not is_open(drawer_1)", vocab));
  b.edge("START", "LOOP_RECS", BranchLabel::None, LoopEntry::Start);
  b.edge("LOOP_RECS", "A_GOTO", BranchLabel::Body);
  b.edge("LOOP_RECS", "SUCCESS_END", BranchLabel::Done);
  b.edge("A_GOTO", "C_RESTART");
  b.edge("C_RESTART", "LOOP_RECS", BranchLabel::Yes, LoopEntry::Start);
  b.edge("C_RESTART", "LOOP_RECS", BranchLabel::No, LoopEntry::Continue);
  SkillSchema s = wrap(b.g, "restart_loop");

  SymbolicState z;
  z.register_object("Receptacle", "drawer_1");
  z.register_object("Receptacle", "drawer_2");
  ScriptedWorld w(z, vocab);
  FactDelta opens;
  opens.add_facts.push_back(atom1("is_open", "drawer_1"));
  // First visit leaves the guard up (restart), the second tears it down.
  w.script_sequence("go to drawer_1", {FactDelta{}, opens});
  w.script("go to drawer_2", {});
  EpisodeLog log = run_episode(s, {}, w, 10);
  REQUIRE(log.succeeded());
  // Pass one visits drawer_1 and restarts; pass two enumerates fully.
  REQUIRE(log_actions(log) ==
          std::vector<std::string>{"go to drawer_1", "go to drawer_1", "go to drawer_2"});
}
