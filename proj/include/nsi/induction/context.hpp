#pragma once

#include <string>
#include <vector>

#include "nsi/consistency/replay.hpp"
#include "nsi/world/subgoals.hpp"

namespace nsi {

// Everything the operators need to evaluate a candidate: the sub-goal's
// demonstration dataset, its contract, and the MDL weight.
struct InductionContext {
  std::string domain;
  const Vocabulary* vocab = nullptr;
  const SubGoalSpec* sub_goal = nullptr;
  std::vector<SegmentRef> dataset;
  Rational lambda{1, 10};
  const SymbolicState* universe_hint = nullptr;

  ConsistencyRegion region_of(const SkillSchema& skill, const SegmentRef& ref) const {
    return consistency_region(*ref.trace, *ref.segment, skill, *vocab,
                              sub_goal->success_conditions);
  }

  std::vector<ConsistencyRegion> regions_of(const SkillSchema& skill) const {
    std::vector<ConsistencyRegion> out;
    for (const auto& ref : dataset) out.push_back(region_of(skill, ref));
    return out;
  }

  static std::size_t total_coverage(const std::vector<ConsistencyRegion>& regions) {
    std::size_t n = 0;
    for (const auto& r : regions) n += r.size();
    return n;
  }
};

}  // namespace nsi
