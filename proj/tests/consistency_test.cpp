#include <catch2/catch_amalgamated.hpp>

#include "nsi/consistency/replay.hpp"
#include "nsi/induction/bootstrap.hpp"
#include "nsi/world/tasks.hpp"
#include "support/consistency_oracle.hpp"
#include "support/graph_gen.hpp"

using namespace nsi;
using namespace nsi::testsupport;

namespace {

struct Fixture {
  Trace trace;
  Segment segment;
  SkillSchema bootstrap;
  const SubGoalSpec* sub_goal;
  const Vocabulary& vocab = household_vocabulary();

  explicit Fixture(bool fridge_closed) {
    trace = household_expert_demonstrate(make_fridge_scenario(fridge_closed),
                                         fridge_closed ? "closed" : "open");
    segment = trace.segments.at(0);
    sub_goal = &SubGoalRegistry::household().require(segment.sub_goal);
    bootstrap = bootstrap_linear_skill(trace, segment, *sub_goal);
  }
};

// The hand-built guarded retrieval skill: skip the go-to when already
// there, open only when closed, take only while the apple is inside.
SkillSchema guarded_fridge_skill(const Vocabulary& vocab) {
  GraphBuilder b;
  b.check("C_GO", parse_expression("not locates(fridge_1)", vocab));
  b.action("A_GOTO", "go to {{goto_rec}}", {{"goto_rec", obj_const("fridge_1")}});
  b.check("C_OPEN", parse_expression("is_closed(fridge_1)", vocab));
  b.action("A_OPEN", "open {{open_rec}}", {{"open_rec", obj_const("fridge_1")}});
  b.check("C_TAKE", parse_expression("contains(fridge_1, apple_1)", vocab));
  Node& take = b.node("A_TAKE", NodeKind::PrimitiveAction);
  take.action_template = "take {{take_item}} from {{from_rec}}";
  take.local_in["take_item"] = {"ItemName", obj_const("apple_1")};
  take.local_in["from_rec"] = {"ReceptacleName", obj_const("fridge_1")};

  b.edge("START", "C_GO");
  b.edge("C_GO", "A_GOTO", BranchLabel::Yes);
  b.edge("C_GO", "C_OPEN", BranchLabel::No);
  b.edge("A_GOTO", "C_OPEN");
  b.edge("C_OPEN", "A_OPEN", BranchLabel::Yes);
  b.edge("C_OPEN", "C_TAKE", BranchLabel::No);
  b.edge("A_OPEN", "C_TAKE");
  b.edge("C_TAKE", "A_TAKE", BranchLabel::Yes);
  b.edge("C_TAKE", "SUCCESS_END", BranchLabel::No);
  b.edge("A_TAKE", "SUCCESS_END");

  SkillSchema s;
  s.name = "guarded_fridge_retrieve";
  s.sub_goal = "retrieve_item_of_type";
  s.graph = b.g;
  s.graph.params.push_back({"TARGET_ITEM_TYPE", "ItemType"});
  const auto& sg = SubGoalRegistry::household().require("retrieve_item_of_type");
  s.docstring.start_conditions = sg.start_conditions;
  s.docstring.success_conditions = sg.success_conditions;
  REQUIRE(validates_clean(s.graph));
  return s;
}

}  // namespace

TEST_CASE("bootstrap skill is consistent at the segment start with identity alignment") {
  Fixture f(true);
  Theta theta{{"TARGET_ITEM_TYPE", Value::object("apple")}};
  auto v = check_consistent(f.trace, f.segment, f.bootstrap, theta, f.segment.start, f.vocab,
                            f.sub_goal->success_conditions);
  REQUIRE(v.consistent());
  REQUIRE(v.alignment.pairs.size() == f.segment.end - f.segment.start);
  for (std::size_t i = 0; i < v.alignment.pairs.size(); ++i) {
    REQUIRE(v.alignment.pairs[i].second == f.segment.start + i);
    if (i) REQUIRE(v.alignment.pairs[i].second == v.alignment.pairs[i - 1].second + 1);
  }
}

TEST_CASE("bootstrap at start+1 diverges") {
  Fixture f(true);
  Theta theta{{"TARGET_ITEM_TYPE", Value::object("apple")}};
  auto v = check_consistent(f.trace, f.segment, f.bootstrap, theta, f.segment.start + 1, f.vocab,
                            f.sub_goal->success_conditions);
  REQUIRE_FALSE(v.consistent());
  REQUIRE((v.kind == ConsistencyVerdict::Kind::Mismatch ||
           v.kind == ConsistencyVerdict::Kind::IncompleteSuffix));
  if (v.kind == ConsistencyVerdict::Kind::Mismatch) {
    REQUIRE(v.expected == f.trace.steps[f.segment.start + 1].action);
    REQUIRE(v.got == f.trace.steps[f.segment.start].action);
  }
}

TEST_CASE("branchy skill skips the open branch on the open-fridge trace") {
  Fixture open_f(false);
  SkillSchema skill = guarded_fridge_skill(open_f.vocab);
  Theta theta{{"TARGET_ITEM_TYPE", Value::object("apple")}};
  auto v = check_consistent(open_f.trace, open_f.segment, skill, theta, open_f.segment.start,
                            open_f.vocab, open_f.sub_goal->success_conditions);
  REQUIRE(v.consistent());
}

TEST_CASE("guarded skill fully covers both fridge variants") {
  for (bool closed : {false, true}) {
    Fixture f(closed);
    SkillSchema skill = guarded_fridge_skill(f.vocab);
    auto region =
        consistency_region(f.trace, f.segment, skill, f.vocab, f.sub_goal->success_conditions);
    INFO((closed ? "closed" : "open"));
    REQUIRE(region.size() == f.segment.end - f.segment.start + 1);
  }
}

TEST_CASE("bootstrap region is exactly the segment start") {
  Fixture f(true);
  auto region = consistency_region(f.trace, f.segment, f.bootstrap, f.vocab,
                                   f.sub_goal->success_conditions);
  REQUIRE(region.size() == 1);
  REQUIRE(region.covers(f.segment.start));
  // The witnessing theta is the first candidate: the annotated binding.
  REQUIRE(region.covered.at(f.segment.start).at("TARGET_ITEM_TYPE").as_object() == "apple");
}

TEST_CASE("empty-body skill covers only the trivial suffix") {
  Fixture f(true);
  GraphBuilder b;
  b.chain({"START", "SUCCESS_END"});
  SkillSchema empty;
  empty.name = "noop";
  empty.sub_goal = f.segment.sub_goal;
  empty.graph = b.g;
  empty.graph.params = f.sub_goal->params;
  auto region =
      consistency_region(f.trace, f.segment, empty, f.vocab, f.sub_goal->success_conditions);
  // Success conditions (holding the apple) hold only at the segment end.
  REQUIRE(region.size() == 1);
  REQUIRE(region.covers(f.segment.end));
}

TEST_CASE("postcondition failure is its own verdict") {
  Fixture f(true);
  GraphBuilder b;
  b.chain({"START", "SUCCESS_END"});
  SkillSchema empty;
  empty.sub_goal = f.segment.sub_goal;
  empty.graph = b.g;
  empty.graph.params = f.sub_goal->params;
  Theta theta{{"TARGET_ITEM_TYPE", Value::object("apple")}};
  // At the segment start nothing is held, so success conditions fail.
  auto v = check_consistent(f.trace, f.segment, empty, theta, f.segment.start, f.vocab,
                            f.sub_goal->success_conditions);
  // The skill consumed no actions, so the suffix is incomplete.
  REQUIRE(v.kind == ConsistencyVerdict::Kind::IncompleteSuffix);
  auto v2 = check_consistent(f.trace, f.segment, empty, theta, f.segment.end, f.vocab,
                             {parse_expression("is_cleaned(apple_1)", f.vocab)});
  REQUIRE(v2.kind == ConsistencyVerdict::Kind::PostconditionUnmet);
}

TEST_CASE("replay never mutates the trace") {
  Fixture f(true);
  std::string before = trace_to_jsonl(f.trace);
  consistency_region(f.trace, f.segment, f.bootstrap, f.vocab, f.sub_goal->success_conditions);
  REQUIRE(trace_to_jsonl(f.trace) == before);
}

TEST_CASE("objective: lambda zero gives raw coverage; a bare node costs lambda") {
  Fixture f(true);
  std::vector<SegmentRef> dataset{{&f.trace, &f.segment}};
  auto s0 = induction_objective(f.bootstrap, dataset, f.vocab, f.sub_goal->success_conditions,
                                Rational(0));
  REQUIRE(s0.value == Rational(static_cast<std::int64_t>(s0.coverage)));

  auto s1 = induction_objective(f.bootstrap, dataset, f.vocab, f.sub_goal->success_conditions,
                                Rational(1, 10));
  SkillSchema padded = f.bootstrap;
  Node orphan;
  orphan.id = "A_NOP";
  orphan.kind = NodeKind::PrimitiveAction;
  orphan.action_template = "look";
  padded.graph.nodes.emplace(orphan.id, orphan);
  auto s2 = induction_objective(padded, dataset, f.vocab, f.sub_goal->success_conditions,
                                Rational(1, 10));
  REQUIRE(s2.coverage == s1.coverage);
  REQUIRE(s2.value == s1.value - Rational(1, 10));
}

TEST_CASE("oracle equivalence on golden traces and desk-scale skills") {
  const auto& registry = SubGoalRegistry::household();
  const Vocabulary& vocab = household_vocabulary();
  std::vector<std::pair<Trace, SkillSchema>> cases;

  for (bool closed : {false, true}) {
    Fixture f(closed);
    cases.emplace_back(f.trace, f.bootstrap);
    cases.emplace_back(f.trace, guarded_fridge_skill(vocab));
  }
  for (const auto& family : {"pick_and_place", "pick_clean_then_place", "look_at_obj_in_light"}) {
    for (auto& t : generate_demonstrations("household", family, 2, 31)) {
      for (const auto& seg : t.segments) {
        const auto& sg = registry.require(seg.sub_goal);
        cases.emplace_back(t, bootstrap_linear_skill(t, seg, sg));
      }
    }
  }

  for (const auto& [trace, skill] : cases) {
    for (const auto& seg : trace.segments) {
      if (seg.sub_goal != skill.sub_goal) continue;
      const auto& sg = registry.require(seg.sub_goal);
      auto region = consistency_region(trace, seg, skill, vocab, sg.success_conditions);
      auto oracle = oracle_region(trace, seg, skill, vocab, sg.success_conditions);
      std::set<std::size_t> got;
      for (const auto& [h, t] : region.covered) got.insert(h);
      INFO(skill.name << " on " << trace.id << " segment " << seg.sub_goal);
      REQUIRE(got == oracle);
    }
  }
}

TEST_CASE("feasibility dominance is a plain per-trace set comparison") {
  Fixture f(true);
  SkillSchema guarded = guarded_fridge_skill(f.vocab);
  auto r_boot = consistency_region(f.trace, f.segment, f.bootstrap, f.vocab,
                                   f.sub_goal->success_conditions);
  auto r_guarded =
      consistency_region(f.trace, f.segment, guarded, f.vocab, f.sub_goal->success_conditions);
  REQUIRE(r_guarded.superset_of(r_boot));
  REQUIRE_FALSE(r_boot.superset_of(r_guarded));
}
