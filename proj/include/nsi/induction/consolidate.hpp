#pragma once

// Progressive consolidation: Stage 1 specializes a skill to one trace via
// a consistency-check-and-refine loop; Stage 2 greedily merges the local
// experts under feasibility dominance and the MDL objective; a final
// compression pass folds and lifts at constant coverage.

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nsi/induction/bootstrap.hpp"
#include "nsi/induction/context.hpp"
#include "nsi/induction/lifting.hpp"
#include "nsi/induction/operators.hpp"

namespace nsi {

// Where the current skill and the demonstration part ways: the uncovered
// index, the divergence point, and the state evidence for predicate
// search.
struct ConflictContext {
  std::size_t uncovered_h = 0;
  std::size_t expert_index = 0;  // trace step the expert performs next
  ConsistencyVerdict verdict;
  Theta theta;
  std::string divergent_node;
  std::string expected_action;  // empty when the expert is already done
  std::string got_action;
  Scope scope;
  std::vector<SymbolicState> positives;  // divergent node acted correctly here
  std::vector<SymbolicState> negatives;  // the state at divergence
  bool separable = true;
};

namespace consolidate_detail {

// Replay one covered index and harvest per-node pre-action states plus the
// final synchronized state.
struct CoveredObservations {
  std::map<std::string, std::vector<SymbolicState>> node_states;
  std::vector<SymbolicState> final_states;
};

inline void observe_covered(const SegmentRef& ref, const SkillSchema& skill,
                            const ConsistencyRegion& region, const InductionContext& ctx,
                            CoveredObservations* out) {
  for (const auto& [h, theta] : region.covered) {
    ReplayProbe probe;
    auto v = check_consistent(*ref.trace, *ref.segment, skill, theta, h, *ctx.vocab,
                              ctx.sub_goal->success_conditions, &probe);
    if (!v.consistent()) continue;
    for (const auto& rec : probe.actions) out->node_states[rec.node_id].push_back(rec.state_before);
    // Final synchronized state: replay the tail deltas onto Z_h.
    SymbolicState z = trace_state_at(*ref.trace, *ctx.vocab, ref.segment->end);
    out->final_states.push_back(z);
  }
}

inline std::string render_node_action(const Node& n, const Scope& scope,
                                      const SymbolicState& state) {
  try {
    Scope env = interp_detail::node_env(n, scope, state);
    return interp_detail::render_template(n.action_template, env);
  } catch (const Error&) {
    return "";
  }
}

// Action nodes reachable from `from`, breadth-first and deterministic.
inline std::vector<std::string> downstream_nodes(const SkillGraph& g, const std::string& from) {
  std::vector<std::string> order;
  std::set<std::string> seen{from};
  std::vector<std::string> queue{from};
  std::size_t qi = 0;
  while (qi < queue.size()) {
    std::string id = queue[qi++];
    order.push_back(id);
    for (const auto* e : g.out_edges(id))
      if (seen.insert(e->to).second) queue.push_back(e->to);
  }
  return order;
}

}  // namespace consolidate_detail

// Build the conflict picture at one uncovered index. Determinism: the
// analyzed theta is the first candidate (the annotated binding). Positive
// evidence comes from covered replays across the whole dataset; `regions`
// is aligned with ctx.dataset.
inline ConflictContext analyze_conflict(const SegmentRef& ref, const SkillSchema& skill,
                                        const std::vector<ConsistencyRegion>& regions,
                                        std::size_t h, const InductionContext& ctx) {
  ConflictContext cc;
  cc.uncovered_h = h;
  auto thetas = theta_candidates(skill, *ref.trace, *ref.segment, *ctx.vocab, h);
  cc.theta = thetas.empty() ? Theta{} : thetas.front();

  ReplayProbe probe;
  cc.verdict = check_consistent(*ref.trace, *ref.segment, skill, cc.theta, h, *ctx.vocab,
                                ctx.sub_goal->success_conditions, &probe);
  cc.expert_index = h + cc.verdict.alignment.pairs.size();
  cc.expected_action =
      cc.expert_index < ref.segment->end ? ref.trace->steps[cc.expert_index].action : "";
  cc.got_action = cc.verdict.got;
  if (probe.have_divergence) {
    cc.divergent_node = probe.divergent_node;
    cc.scope = probe.divergence_scope;
    cc.negatives.push_back(probe.divergence_state);
  } else {
    // Early success / terminal issues: treat the success terminal itself
    // as the divergence point.
    cc.divergent_node = consolidate_detail::downstream_nodes(skill.graph, skill.graph.start).back();
    for (const auto& [id, n] : skill.graph.nodes)
      if (n.kind == NodeKind::Success) cc.divergent_node = id;
    Scope scope;
    for (const auto& [k, v] : cc.theta) scope.globals[to_upper_ident(k)] = v;
    cc.scope = scope;
    cc.negatives.push_back(trace_state_at(*ref.trace, *ctx.vocab, h));
  }

  consolidate_detail::CoveredObservations obs;
  for (std::size_t i = 0; i < ctx.dataset.size() && i < regions.size(); ++i)
    consolidate_detail::observe_covered(ctx.dataset[i], skill, regions[i], ctx, &obs);
  const Node* dn = skill.graph.find(cc.divergent_node);
  if (dn && dn->kind == NodeKind::Success)
    cc.positives = obs.final_states;
  else if (dn)
    cc.positives = obs.node_states[cc.divergent_node];

  std::set<std::uint64_t> neg_digests;
  for (const auto& s : cc.negatives) neg_digests.insert(s.digest());
  std::vector<SymbolicState> kept;
  for (const auto& s : cc.positives) {
    if (neg_digests.count(s.digest())) {
      cc.separable = false;
      continue;
    }
    kept.push_back(s);
  }
  cc.positives = std::move(kept);
  return cc;
}

// Proposes candidate refinements for a conflict, most specific first.
class SynthesizerProvider {
 public:
  virtual ~SynthesizerProvider() = default;
  virtual std::vector<std::pair<std::string, SkillSchema>> propose(
      const ConflictContext& cc, const SkillSchema& current, const InductionContext& ctx,
      const SkillSchema* donor) = 0;
};

// Deterministic operator search standing in for an external synthesizer.
class BuiltinSynthesizer : public SynthesizerProvider {
 public:
  std::vector<std::pair<std::string, SkillSchema>> propose(const ConflictContext& cc,
                                                           const SkillSchema& current,
                                                           const InductionContext& ctx,
                                                           const SkillSchema* donor) override {
    std::vector<std::pair<std::string, SkillSchema>> out;
    if (donor) propose_crossover(cc, current, ctx, *donor, &out);
    propose_branch(cc, current, ctx, &out);
    for (auto& s : lift_candidates(current, ctx)) out.emplace_back("lift_variables", std::move(s));
    for (auto& s : fold_loop_candidates(current, ctx.universe_hint))
      out.emplace_back("fold_loops", std::move(s));
    return out;
  }

 private:
  static Expr try_invent(const std::vector<SymbolicState>& pos,
                         const std::vector<SymbolicState>& neg, const InductionContext& ctx,
                         const Scope& scope) {
    if (pos.empty() || neg.empty()) return nullptr;
    try {
      return invent_branch_predicate(pos, neg, *ctx.vocab, scope);
    } catch (const Error&) {
      return nullptr;
    }
  }

  void propose_branch(const ConflictContext& cc, const SkillSchema& current,
                      const InductionContext& ctx,
                      std::vector<std::pair<std::string, SkillSchema>>* out) {
    using namespace consolidate_detail;
    if (!cc.separable || cc.divergent_node.empty()) return;
    const Node* dn = current.graph.find(cc.divergent_node);
    if (!dn) return;

    // Skip guard: the expert's next action matches a later node, so the
    // stretch in between should run only when the invented guard holds.
    if (!cc.expected_action.empty() || dn->kind != NodeKind::Success) {
      std::string target;
      for (const auto& id : downstream_nodes(current.graph, cc.divergent_node)) {
        if (id == cc.divergent_node) continue;
        const Node& n = current.graph.nodes.at(id);
        if (cc.expected_action.empty()) {
          if (n.kind == NodeKind::Success) { target = id; break; }
        } else if (n.kind == NodeKind::PrimitiveAction &&
                   render_node_action(n, cc.scope, cc.negatives.front()) == cc.expected_action) {
          target = id;
          break;
        }
      }
      if (!target.empty()) {
        // Execute-the-stretch condition: true where the node acted, false
        // at the divergence state.
        if (Expr guard = try_invent(cc.positives, cc.negatives, ctx, cc.scope)) {
          try {
            out->emplace_back("invent_branch",
                              insert_skip_guard(current, cc.divergent_node, target, guard));
          } catch (const Error&) {
          }
        }
      }
    }

    // Splice: the expert performs extra actions before realigning with the
    // divergent node's own action (or the success terminal).
    if (!cc.expected_action.empty()) {
      const SegmentRef* ref = nullptr;
      for (const auto& r : ctx.dataset)
        if (cc.expert_index >= r.segment->start && cc.expert_index < r.segment->end &&
            cc.uncovered_h >= r.segment->start && cc.uncovered_h <= r.segment->end)
          ref = &r;
      if (!ref) return;
      std::string realign = dn->kind == NodeKind::Success
                                ? ""
                                : render_node_action(*dn, cc.scope, cc.negatives.front());
      std::size_t j = cc.expert_index;
      std::size_t end = ref->segment->end;
      std::size_t stop = end;
      if (dn->kind != NodeKind::Success) {
        stop = end + 1;
        for (std::size_t k = cc.expert_index; k < end; ++k)
          if (ref->trace->steps[k].action == realign) { stop = k; break; }
        if (stop > end) return;  // never realigns
      }
      std::vector<std::string> texts;
      for (std::size_t k = j; k < stop; ++k) texts.push_back(ref->trace->steps[k].action);
      if (texts.empty()) return;
      if (Expr guard = try_invent(cc.negatives, cc.positives, ctx, cc.scope)) {
        try {
          out->emplace_back("invent_branch",
                            insert_guarded_chain(current, cc.divergent_node, texts, guard,
                                                 ctx.domain));
        } catch (const Error&) {
        }
      }
    }
  }

  void propose_crossover(const ConflictContext& cc, const SkillSchema& current,
                         const InductionContext& ctx, const SkillSchema& donor,
                         std::vector<std::pair<std::string, SkillSchema>>* out) {
    using namespace consolidate_detail;
    if (!cc.separable || cc.expected_action.empty() || cc.divergent_node.empty()) return;
    const SegmentRef* ref = nullptr;
    for (const auto& r : ctx.dataset)
      if (cc.expert_index >= r.segment->start && cc.expert_index < r.segment->end) ref = &r;
    if (!ref) return;

    // Map expert indices to donor nodes by replaying the donor from its
    // segment start.
    ReplayProbe probe;
    auto thetas = theta_candidates(donor, *ref->trace, *ref->segment, *ctx.vocab,
                                   ref->segment->start);
    if (thetas.empty()) return;
    auto v = check_consistent(*ref->trace, *ref->segment, donor, thetas.front(),
                              ref->segment->start, *ctx.vocab, ctx.sub_goal->success_conditions,
                              &probe);
    if (!v.consistent()) return;
    std::size_t offset = cc.expert_index - ref->segment->start;
    if (offset >= probe.actions.size()) return;

    const Node* dn = current.graph.find(cc.divergent_node);
    std::string realign =
        dn && dn->kind != NodeKind::Success ? render_node_action(*dn, cc.scope, cc.negatives.front())
                                            : "";
    GraftSpec spec;
    spec.attach_before = cc.divergent_node;
    for (std::size_t k = offset; k < probe.actions.size(); ++k) {
      if (!realign.empty() && probe.actions[k].action == realign) break;
      spec.donor_ids.push_back(probe.actions[k].node_id);
    }
    if (spec.donor_ids.empty()) return;
    spec.guard = try_invent(cc.negatives, cc.positives, ctx, cc.scope);
    if (!spec.guard) return;
    try {
      out->emplace_back("crossover", crossover_graft(current, donor, spec));
    } catch (const Error&) {
    }
  }
};

// ---------------------------------------------------------------------------
// Stage 1: intra-trajectory consolidation

struct IntraReport {
  std::vector<std::string> accepted_ops;
  std::vector<std::size_t> unfixable;
};

inline std::pair<SkillSchema, IntraReport> consolidate_intra(const SegmentRef& ref,
                                                             SkillSchema skill,
                                                             SynthesizerProvider& provider,
                                                             const InductionContext& full_ctx,
                                                             std::size_t budget = 0) {
  InductionContext ctx = full_ctx;
  ctx.dataset = {ref};
  std::size_t len = ref.segment->end - ref.segment->start;
  if (budget == 0) budget = len + 1;

  IntraReport report;
  std::set<std::size_t> unfixable;
  for (std::size_t iter = 0; iter < budget; ++iter) {
    ConsistencyRegion region = ctx.region_of(skill, ref);
    std::size_t h = ref.segment->end + 1;
    for (std::size_t cand = ref.segment->start; cand <= ref.segment->end; ++cand)
      if (!region.covers(cand) && !unfixable.count(cand)) { h = cand; break; }
    if (h > ref.segment->end) break;

    ConflictContext cc = analyze_conflict(ref, skill, {region}, h, ctx);
    bool accepted = false;
    for (auto& [op, edit] : provider.propose(cc, skill, ctx, nullptr)) {
      ConsistencyRegion r2 = ctx.region_of(edit, ref);
      if (r2.superset_of(region) && r2.size() > region.size()) {
        skill = std::move(edit);
        report.accepted_ops.push_back(op);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      unfixable.insert(h);
      report.unfixable.push_back(h);
    }
  }
  return {std::move(skill), std::move(report)};
}

// ---------------------------------------------------------------------------
// Stage 2: inter-trajectory merging

struct LocalExpert {
  SkillSchema skill;
  std::size_t source_index = 0;  // into the dataset
  ConsistencyRegion source_region;
};

struct MergeIteration {
  std::string op;
  ObjectiveScore score;
  std::vector<std::size_t> region_sizes;
  bool dominance_ok = true;
};

struct InterReport {
  std::vector<MergeIteration> iterations;
  ObjectiveScore final_score;
  std::vector<std::size_t> final_region_sizes;
};

inline std::pair<SkillSchema, InterReport> consolidate_inter(std::vector<LocalExpert> experts,
                                                             SynthesizerProvider& provider,
                                                             const InductionContext& ctx,
                                                             std::size_t max_iters = 0) {
  if (experts.empty()) throw Error("consolidate_inter needs at least one expert");
  if (max_iters == 0) max_iters = 2 * experts.size();

  // Seed: largest source coverage, then lowest complexity, then name.
  const LocalExpert* seed = &experts.front();
  for (const auto& e : experts) {
    std::size_t cov_e = e.source_region.size(), cov_s = seed->source_region.size();
    std::size_t cx_e = graph_complexity(e.skill.graph), cx_s = graph_complexity(seed->skill.graph);
    if (cov_e > cov_s ||
        (cov_e == cov_s && (cx_e < cx_s || (cx_e == cx_s && e.skill.name < seed->skill.name))))
      seed = &e;
  }
  SkillSchema glb = seed->skill;
  InterReport report;

  auto score_of = [&](const SkillSchema& s, const std::vector<ConsistencyRegion>& regions) {
    return ObjectiveScore::compute(InductionContext::total_coverage(regions),
                                   graph_complexity(s.graph), ctx.lambda);
  };

  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    std::vector<ConsistencyRegion> regions = ctx.regions_of(glb);
    ObjectiveScore incumbent = score_of(glb, regions);

    // Hardest constraint: the least-covered trace.
    std::size_t hard = ctx.dataset.size();
    double worst = 2.0;
    for (std::size_t i = 0; i < ctx.dataset.size(); ++i) {
      std::size_t len = ctx.dataset[i].segment->end - ctx.dataset[i].segment->start + 1;
      double ratio = static_cast<double>(regions[i].size()) / static_cast<double>(len);
      if (ratio < worst - 1e-12) {
        worst = ratio;
        hard = i;
      }
    }
    if (hard == ctx.dataset.size() || worst >= 1.0 - 1e-12) break;

    const SegmentRef& ref = ctx.dataset[hard];
    std::size_t h = ref.segment->end + 1;
    for (std::size_t cand = ref.segment->start; cand <= ref.segment->end; ++cand)
      if (!regions[hard].covers(cand)) { h = cand; break; }
    if (h > ref.segment->end) break;

    const SkillSchema* donor = nullptr;
    for (const auto& e : experts)
      if (e.source_index == hard) donor = &e.skill;

    ConflictContext cc = analyze_conflict(ref, glb, regions, h, ctx);
    bool accepted = false;
    for (auto& [op, cand] : provider.propose(cc, glb, ctx, donor)) {
      std::vector<ConsistencyRegion> cregions = ctx.regions_of(cand);
      bool dominated = true;
      for (std::size_t i = 0; i < regions.size(); ++i)
        dominated = dominated && cregions[i].superset_of(regions[i]);
      if (!dominated) continue;
      std::size_t total_old = InductionContext::total_coverage(regions);
      std::size_t total_new = InductionContext::total_coverage(cregions);
      bool strict_gain = total_new > total_old;
      bool mdl_win = total_new == total_old &&
                     graph_complexity(cand.graph) < graph_complexity(glb.graph);
      if (!strict_gain && !mdl_win) continue;
      ObjectiveScore next = score_of(cand, cregions);
      if (next.value < incumbent.value) continue;  // objective must not decrease
      MergeIteration mi;
      mi.op = op;
      mi.score = next;
      for (const auto& r : cregions) mi.region_sizes.push_back(r.size());
      report.iterations.push_back(mi);
      glb = std::move(cand);
      accepted = true;
      break;
    }
    if (!accepted) break;
  }

  auto final_regions = ctx.regions_of(glb);
  report.final_score = score_of(glb, final_regions);
  for (const auto& r : final_regions) report.final_region_sizes.push_back(r.size());
  return {std::move(glb), std::move(report)};
}

// MDL compression: folds and lifts accepted only while every per-trace
// region is preserved and complexity strictly drops.
inline SkillSchema compress_skill(SkillSchema skill, const InductionContext& ctx,
                                  std::vector<std::string>* ops = nullptr) {
  for (int guard = 0; guard < 8; ++guard) {
    auto regions = ctx.regions_of(skill);
    std::vector<std::pair<std::string, SkillSchema>> candidates;
    for (auto& s : fold_loop_candidates(skill, ctx.universe_hint))
      candidates.emplace_back("fold_loops", std::move(s));
    for (auto& s : lift_candidates(skill, ctx)) candidates.emplace_back("lift_variables", std::move(s));
    bool accepted = false;
    for (auto& [op, cand] : candidates) {
      if (graph_complexity(cand.graph) >= graph_complexity(skill.graph)) continue;
      auto cregions = ctx.regions_of(cand);
      bool preserved = true;
      for (std::size_t i = 0; i < regions.size(); ++i)
        preserved = preserved && cregions[i].superset_of(regions[i]);
      if (!preserved) continue;
      skill = std::move(cand);
      if (ops) ops->push_back(op);
      accepted = true;
      break;
    }
    if (!accepted) break;
  }
  return skill;
}

// ---------------------------------------------------------------------------
// The full pipeline: segments -> bootstraps -> Stage 1 -> Stage 2 ->
// compression.

struct InductionReport {
  std::vector<std::string> stage1_ops;
  InterReport stage2;
  std::vector<std::string> compress_ops;
  std::vector<std::size_t> final_region_sizes;
  ObjectiveScore final_score;
};

inline std::pair<SkillSchema, InductionReport> induce_skill(const InductionContext& ctx,
                                                            SynthesizerProvider* provider = nullptr) {
  if (ctx.dataset.empty()) throw Error("induce_skill: empty dataset");
  BuiltinSynthesizer builtin;
  SynthesizerProvider& prov = provider ? *provider : builtin;
  InductionReport report;

  std::vector<LocalExpert> experts;
  for (std::size_t i = 0; i < ctx.dataset.size(); ++i) {
    const SegmentRef& ref = ctx.dataset[i];
    SkillSchema boot = bootstrap_linear_skill(*ref.trace, *ref.segment, *ctx.sub_goal);
    auto [expert, intra] = consolidate_intra(ref, std::move(boot), prov, ctx);
    for (const auto& op : intra.accepted_ops) report.stage1_ops.push_back(op);
    LocalExpert le;
    le.skill = std::move(expert);
    le.skill.name = ctx.sub_goal->name + "_expert_" + std::to_string(i);
    le.source_index = i;
    le.source_region = ctx.region_of(le.skill, ref);
    experts.push_back(std::move(le));
  }

  auto [glb, inter] = consolidate_inter(std::move(experts), prov, ctx);
  report.stage2 = std::move(inter);

  glb = compress_skill(std::move(glb), ctx, &report.compress_ops);

  glb.name = ctx.sub_goal->name;
  glb.sub_goal = ctx.sub_goal->name;
  glb.docstring.description = ctx.sub_goal->description;
  glb.docstring.start_conditions = ctx.sub_goal->start_conditions;
  glb.docstring.success_conditions = ctx.sub_goal->success_conditions;
  require_valid(glb.graph);

  auto final_regions = ctx.regions_of(glb);
  for (const auto& r : final_regions) report.final_region_sizes.push_back(r.size());
  report.final_score = ObjectiveScore::compute(InductionContext::total_coverage(final_regions),
                                               graph_complexity(glb.graph), ctx.lambda);
  return {std::move(glb), std::move(report)};
}

}  // namespace nsi
