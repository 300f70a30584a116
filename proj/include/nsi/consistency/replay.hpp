#pragma once

// Empirical programmatic consistency: replay a skill against a recorded
// trace segment (no live environment), synchronizing emitted actions with
// the expert's and folding the recorded deltas back into Z.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nsi/interp/exec.hpp"
#include "nsi/world/subgoals.hpp"
#include "nsi/world/trace.hpp"

namespace nsi {

struct CandidateExplosion : Error {
  explicit CandidateExplosion(std::size_t n)
      : Error("theta candidate count " + std::to_string(n) + " exceeds the cap") {}
};

using Theta = std::map<std::string, Value>;

inline std::string theta_str(const Theta& t) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : t) {
    if (!first) out += ", ";
    first = false;
    out += k + "=" + (v.kind() == ValueKind::Object ? v.as_object() : v.str());
  }
  return out + "}";
}

// Monotone alignment: program step k of each emitted action paired with
// the expert action index it consumed.
struct AlignmentMap {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

struct ConsistencyVerdict {
  enum class Kind { Consistent, Mismatch, IncompleteSuffix, PostconditionUnmet };
  Kind kind = Kind::IncompleteSuffix;
  AlignmentMap alignment;       // Consistent
  Theta theta;                  // Consistent: the binding used
  std::size_t divergence_step = 0;  // Mismatch: program step k
  std::string expected;         // Mismatch: expert action (empty: emission past segment end)
  std::string got;              // Mismatch: emitted action
  std::string detail;

  bool consistent() const { return kind == Kind::Consistent; }
};

// Synchronized-replay observations for the conflict analysis in induction:
// where each action fired and what the world looked like.
struct ReplayProbe {
  struct ActionRecord {
    std::string node_id;
    Scope scope_before;
    SymbolicState state_before;
    std::string action;
  };
  std::vector<ActionRecord> actions;
  std::string divergent_node;        // node that emitted the mismatching action
  Scope divergence_scope;
  SymbolicState divergence_state;
  std::string next_expert_action;    // what the expert did instead ("" if none left)
  bool have_divergence = false;
};

// Eq.-style consistency check at start index h: every emitted action must
// equal the next unconsumed expert action; internal steps consume nothing;
// the skill must reach Success exactly at the segment end with the
// sub-goal's success conditions entailed in the synchronized final state.
inline ConsistencyVerdict check_consistent(const Trace& trace, const Segment& segment,
                                           const SkillSchema& skill, const Theta& theta,
                                           std::size_t h, const Vocabulary& vocab,
                                           const std::vector<Expr>& success_conditions,
                                           ReplayProbe* probe = nullptr) {
  ConsistencyVerdict v;
  v.theta = theta;
  if (h < segment.start || h > segment.end) {
    v.detail = "h outside segment";
    return v;
  }

  ExecState xs;
  try {
    xs = init_execution(skill, theta, trace_state_at(trace, vocab, h));
  } catch (const Error& e) {
    v.detail = std::string("initialization: ") + e.what();
    return v;
  }
  xs.internal_budget = 64 * (1 + (segment.end - h));

  std::size_t expert_idx = h;
  std::size_t k = 0;
  while (true) {
    std::string at = xs.current;
    StepOutcome out;
    try {
      out = step(xs);
    } catch (const InternalBudgetExceeded&) {
      v.detail = "internal budget exhausted";
      return v;
    } catch (const Error& e) {
      v.detail = std::string("engine: ") + e.what();
      return v;
    }
    ++k;
    switch (out.kind) {
      case StepOutcome::Kind::Internal:
        continue;
      case StepOutcome::Kind::Action: {
        if (expert_idx >= segment.end) {
          v.kind = ConsistencyVerdict::Kind::Mismatch;
          v.divergence_step = k;
          v.expected = "";
          v.got = out.action.text;
          if (probe) {
            probe->have_divergence = true;
            probe->divergent_node = out.action.node_id;
            probe->divergence_scope = xs.scope;
            probe->divergence_state = xs.state;
            probe->next_expert_action = "";
          }
          return v;
        }
        const std::string& expert_action = trace.steps[expert_idx].action;
        if (out.action.text != expert_action) {
          v.kind = ConsistencyVerdict::Kind::Mismatch;
          v.divergence_step = k;
          v.expected = expert_action;
          v.got = out.action.text;
          if (probe) {
            probe->have_divergence = true;
            probe->divergent_node = out.action.node_id;
            probe->divergence_scope = xs.scope;
            probe->divergence_state = xs.state;
            probe->next_expert_action = expert_action;
          }
          return v;
        }
        if (probe) probe->actions.push_back({out.action.node_id, xs.scope, xs.state, out.action.text});
        v.alignment.pairs.emplace_back(k, expert_idx);
        try {
          apply_observation(xs, trace.steps[expert_idx].delta, vocab);
        } catch (const Error& e) {
          v.detail = std::string("delta: ") + e.what();
          return v;
        }
        ++expert_idx;
        continue;
      }
      case StepOutcome::Kind::Success: {
        if (expert_idx != segment.end) {
          v.detail = "success before the segment end; expert actions remain";
          return v;
        }
        Scope scope;
        for (const auto& [name, val] : theta) scope.globals[to_upper_ident(name)] = val;
        for (const auto& c : success_conditions) {
          bool ok = false;
          try {
            ok = eval_condition(c, scope, xs.state);
          } catch (const Error&) {
            ok = false;
          }
          if (!ok) {
            v.kind = ConsistencyVerdict::Kind::PostconditionUnmet;
            v.detail = serialize(c);
            return v;
          }
        }
        v.kind = ConsistencyVerdict::Kind::Consistent;
        return v;
      }
      case StepOutcome::Kind::Failure: {
        v.detail = "skill failure: " + out.diagnosis.text;
        if (probe && !probe->have_divergence) {
          probe->have_divergence = true;
          probe->divergent_node = out.diagnosis.node_id;
          probe->divergence_scope = xs.scope;
          probe->divergence_state = xs.state;
          probe->next_expert_action =
              expert_idx < segment.end ? trace.steps[expert_idx].action : "";
        }
        return v;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Theta candidate enumeration

inline std::string param_universe_tag(const std::string& type_tag) {
  if (type_tag == "ItemName") return "Item";
  if (type_tag == "ReceptacleName") return "Receptacle";
  if (type_tag == "ItemType") return "ItemType";
  if (type_tag == "ReceptacleType") return "ReceptacleType";
  return "";  // lists and exotic tags: annotated bindings only
}

inline constexpr std::size_t kThetaCandidateCap = 1000;

// Candidate bindings per Eq. 2's existential: the annotated segment value
// first, then universe objects of the parameter's type in canonical order.
inline std::vector<Theta> theta_candidates(const SkillSchema& skill, const Trace& trace,
                                           const Segment& segment, const Vocabulary& vocab,
                                           std::size_t h) {
  SymbolicState z = trace_state_at(trace, vocab, h);
  std::vector<std::vector<std::pair<std::string, Value>>> per_param;
  for (const auto& p : skill.graph.params) {
    std::vector<std::pair<std::string, Value>> options;
    auto annotated = segment.bindings.find(p.name);
    if (annotated == segment.bindings.end()) {
      // Accept sub-goal binding names case-insensitively.
      for (const auto& [k, val] : segment.bindings)
        if (to_upper_ident(k) == p.name) annotated = segment.bindings.find(k);
    }
    if (annotated != segment.bindings.end()) options.emplace_back(p.name, annotated->second);
    std::string tag = param_universe_tag(p.type_tag);
    if (!tag.empty()) {
      for (const auto& obj : z.objects_of(tag)) {
        Value val = Value::object(obj);
        bool dup = false;
        for (const auto& [n, existing] : options) dup |= existing == val;
        if (!dup) options.emplace_back(p.name, val);
      }
    }
    // A parameter with no candidates is left out; init_execution derives
    // it through its docstring binder, or fails the replay.
    per_param.push_back(std::move(options));
  }

  std::vector<Theta> combos{{}};
  for (const auto& options : per_param) {
    if (options.empty()) continue;  // init_execution will self-bind or fail
    std::vector<Theta> next;
    for (const auto& base : combos) {
      for (const auto& [name, val] : options) {
        Theta t = base;
        t[name] = val;
        next.push_back(std::move(t));
        if (next.size() > kThetaCandidateCap) throw CandidateExplosion(next.size());
      }
    }
    combos = std::move(next);
  }
  return combos;
}

// ---------------------------------------------------------------------------
// Regions and the induction objective

struct ConsistencyRegion {
  std::map<std::size_t, Theta> covered;  // h -> first witnessing theta

  bool covers(std::size_t h) const { return covered.count(h) > 0; }
  std::size_t size() const { return covered.size(); }

  bool superset_of(const ConsistencyRegion& o) const {
    for (const auto& [h, t] : o.covered)
      if (!covered.count(h)) return false;
    return true;
  }
};

inline ConsistencyRegion consistency_region(const Trace& trace, const Segment& segment,
                                            const SkillSchema& skill, const Vocabulary& vocab,
                                            const std::vector<Expr>& success_conditions) {
  ConsistencyRegion region;
  for (std::size_t h = segment.start; h <= segment.end; ++h) {
    for (const auto& theta : theta_candidates(skill, trace, segment, vocab, h)) {
      ConsistencyVerdict v =
          check_consistent(trace, segment, skill, theta, h, vocab, success_conditions);
      if (v.consistent()) {
        region.covered.emplace(h, theta);
        break;
      }
    }
  }
  return region;
}

struct ObjectiveScore {
  std::size_t coverage = 0;
  std::size_t complexity = 0;
  Rational lambda{1, 10};
  Rational value{0};

  static ObjectiveScore compute(std::size_t coverage, std::size_t complexity, Rational lambda) {
    ObjectiveScore s;
    s.coverage = coverage;
    s.complexity = complexity;
    s.lambda = lambda;
    s.value = Rational(static_cast<std::int64_t>(coverage)) -
              lambda * Rational(static_cast<std::int64_t>(complexity));
    return s;
  }
};

// One (trace, segment) demonstration of a sub-goal.
struct SegmentRef {
  const Trace* trace = nullptr;
  const Segment* segment = nullptr;
};

inline ObjectiveScore induction_objective(const SkillSchema& skill,
                                          const std::vector<SegmentRef>& dataset,
                                          const Vocabulary& vocab,
                                          const std::vector<Expr>& success_conditions,
                                          Rational lambda) {
  std::size_t coverage = 0;
  for (const auto& ref : dataset)
    coverage += consistency_region(*ref.trace, *ref.segment, skill, vocab, success_conditions).size();
  return ObjectiveScore::compute(coverage, graph_complexity(skill.graph), lambda);
}

}  // namespace nsi
