#pragma once

// Linear bootstrap: transcribe a trace segment into Start -> one
// PrimitiveAction per expert action (constant arguments) -> Success. The
// failure terminal exists as a runtime landing pad only. Consistent at the
// segment start by construction.

#include <string>

#include "nsi/graph/validate.hpp"
#include "nsi/world/actions.hpp"
#include "nsi/world/subgoals.hpp"
#include "nsi/world/trace.hpp"

namespace nsi {

struct EmptySegment : Error {
  EmptySegment() : Error("segment has no actions") {}
};

inline SkillSchema bootstrap_linear_skill(const Trace& trace, const Segment& segment,
                                          const SubGoalSpec& sub_goal) {
  if (segment.start >= segment.end) throw EmptySegment();
  const auto& templates = action_templates_for(trace.domain);

  SkillSchema skill;
  skill.sub_goal = sub_goal.name;
  skill.name = sub_goal.name + "_from_" + trace.id;
  skill.docstring.description = sub_goal.description;
  skill.docstring.start_conditions = sub_goal.start_conditions;
  skill.docstring.success_conditions = sub_goal.success_conditions;

  SkillGraph& g = skill.graph;
  g.params = sub_goal.params;
  g.start = "START";
  Node start;
  start.id = "START";
  start.kind = NodeKind::Start;
  g.nodes.emplace("START", start);
  Node success;
  success.id = "SUCCESS_END";
  success.kind = NodeKind::Success;
  g.nodes.emplace("SUCCESS_END", success);
  Node failure;
  failure.id = "FAILURE_END";
  failure.kind = NodeKind::Failure;
  failure.diagnosis_template = sub_goal.name + " failed";
  g.nodes.emplace("FAILURE_END", failure);

  std::string prev = "START";
  for (std::size_t i = segment.start; i < segment.end; ++i) {
    const std::string& text = trace.steps[i].action;
    auto matched = match_action(text, templates);
    if (!matched) throw Error("expert action does not fit the action grammar: " + text);
    Node n;
    n.kind = NodeKind::PrimitiveAction;
    n.action_template = matched->info->template_text;
    for (std::size_t s = 0; s < matched->info->slots.size(); ++s) {
      const auto& [slot, tag] = matched->info->slots[s];
      n.local_in[slot] = {tag, ExprNode::constant(Value::object(matched->values[s]))};
    }
    std::string verb = matched->info->template_text.substr(0, matched->info->template_text.find(' '));
    std::string base = "A_" + to_upper_ident(verb) + "_" + std::to_string(i - segment.start + 1);
    n.id = g.fresh_id(base);
    g.nodes.emplace(n.id, n);
    g.edges.push_back({prev, n.id, BranchLabel::None, LoopEntry::None, false});
    prev = n.id;
  }
  g.edges.push_back({prev, "SUCCESS_END", BranchLabel::None, LoopEntry::None, false});
  require_valid(g);
  return skill;
}

}  // namespace nsi
