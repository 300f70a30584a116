#pragma once

#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsi/interp/exec.hpp"
#include "nsi/world/iface.hpp"

namespace nsi {

struct EpisodeRecord {
  std::size_t t = 0;
  std::string node;
  std::string outcome;  // internal | action | success | failure
  std::string action;
  std::string diagnosis;
  std::uint64_t scope_digest = 0;
  std::uint64_t state_digest = 0;
};

struct EpisodeLog {
  std::vector<EpisodeRecord> records;
  std::string terminal;  // success | failure
  Diagnosis final_diagnosis;
  std::size_t physical_actions = 0;
  std::set<std::string> visited_nodes;

  bool succeeded() const { return terminal == "success"; }

  // Line-delimited structured export with stable field names.
  std::string to_jsonl() const {
    std::ostringstream out;
    for (const auto& r : records) {
      nlohmann::json j;
      j["t"] = r.t;
      j["node"] = r.node;
      j["outcome"] = r.outcome;
      j["action"] = r.action;
      j["diagnosis"] = r.diagnosis;
      j["scope_digest"] = r.scope_digest;
      j["state_digest"] = r.state_digest;
      out << j.dump() << "\n";
    }
    nlohmann::json tail;
    tail["terminal"] = terminal;
    tail["physical_actions"] = physical_actions;
    out << tail.dump() << "\n";
    return out.str();
  }
};

// The action sequence a log emitted, for replay-equivalence comparisons.
inline std::vector<std::string> log_actions(const EpisodeLog& log) {
  std::vector<std::string> out;
  for (const auto& r : log.records)
    if (r.outcome == "action") out.push_back(r.action);
  return out;
}

// Drive a skill against a live world: step until terminal or the physical
// action budget runs out. Every emitted action goes through the world and
// the grounder before execution resumes. A failed world action becomes a
// skill Failure carrying the action's precondition as the unsatisfied
// condition, so reflective recovery has something to work with.
inline EpisodeLog run_episode(const SkillSchema& skill, const std::map<std::string, Value>& bindings,
                              WorldInterface& world, std::size_t budget,
                              GrounderFn grounder = oracle_grounder()) {
  EpisodeLog log;
  const Vocabulary& vocab = world.vocabulary();

  ExecState xs;
  try {
    xs = init_execution(skill, bindings, world.initial_state());
  } catch (const Error& e) {
    log.terminal = "failure";
    log.final_diagnosis.text = std::string("initialization failed: ") + e.what();
    log.final_diagnosis.condition = ExprNode::constant(Value::boolean(false));
    return log;
  }
  xs.internal_budget = 64 * (1 + budget);

  auto record = [&](const std::string& outcome, const std::string& action,
                    const std::string& diagnosis) {
    log.records.push_back({log.records.size(), xs.current, outcome, action, diagnosis,
                           xs.scope.digest(), xs.state.digest()});
  };

  auto fail_with = [&](Diagnosis d) {
    log.terminal = "failure";
    log.final_diagnosis = std::move(d);
    record("failure", "", log.final_diagnosis.text);
  };

  while (true) {
    log.visited_nodes.insert(xs.current);
    std::string at = xs.current;
    StepOutcome out;
    try {
      out = step(xs);
    } catch (const InternalBudgetExceeded&) {
      Diagnosis d;
      d.node_id = at;
      d.condition = ExprNode::constant(Value::boolean(false));
      d.text = "internal step budget exceeded at " + at;
      fail_with(d);
      return log;
    }

    switch (out.kind) {
      case StepOutcome::Kind::Internal: {
        log.records.push_back({log.records.size(), at, "internal", "", "", xs.scope.digest(),
                               xs.state.digest()});
        break;
      }
      case StepOutcome::Kind::Action: {
        if (log.physical_actions >= budget) {
          Diagnosis d;
          d.node_id = out.action.node_id;
          d.condition = ExprNode::constant(Value::boolean(false));
          d.text = "physical action budget exceeded before '" + out.action.text + "'";
          fail_with(d);
          return log;
        }
        Expr precondition;
        try {
          precondition = world.action_precondition(out.action.text);
        } catch (const Error&) {
          precondition = ExprNode::constant(Value::boolean(false));
        }
        ActionResult r;
        try {
          r = world.perform(out.action.text);
        } catch (const Error& e) {
          // Environment errors are recorded, not thrown.
          Diagnosis d;
          d.node_id = out.action.node_id;
          d.condition = ExprNode::constant(Value::boolean(false));
          d.text = std::string("environment error on '") + out.action.text + "': " + e.what();
          fail_with(d);
          return log;
        }
        log.physical_actions++;
        log.records.push_back({log.records.size(), out.action.node_id, "action", out.action.text,
                               "", xs.scope.digest(), xs.state.digest()});
        FactDelta delta = grounder(xs.state, out.action.text, r);
        apply_observation(xs, delta, vocab);
        if (!r.success) {
          Diagnosis d;
          d.node_id = out.action.node_id;
          d.condition = precondition;
          d.text = "action '" + out.action.text + "' had no effect: " + serialize(precondition) +
                   " with " + scope_summary(xs.scope);
          fail_with(d);
          return log;
        }
        break;
      }
      case StepOutcome::Kind::Success: {
        // The terminal claims success; hold it to the docstring contract.
        bool post_ok = true;
        Expr failed_cond;
        for (const auto& c : skill.docstring.success_conditions) {
          try {
            if (!eval_condition(c, xs.scope, xs.state)) {
              post_ok = false;
              failed_cond = ground_out(c, xs.scope);
              break;
            }
          } catch (const Error&) {
            post_ok = false;
            failed_cond = ground_out(c, xs.scope);
            break;
          }
        }
        if (!post_ok) {
          Diagnosis d;
          d.node_id = at;
          d.condition = failed_cond;
          d.text = "success conditions unsatisfied: " + serialize(failed_cond) + " with " +
                   scope_summary(xs.scope);
          fail_with(d);
          return log;
        }
        log.terminal = "success";
        record("success", "", "");
        return log;
      }
      case StepOutcome::Kind::Failure: {
        fail_with(out.diagnosis);
        return log;
      }
    }
  }
}

}  // namespace nsi
