#pragma once

#include <functional>
#include <string>

#include "nsi/logic/ast.hpp"
#include "nsi/logic/state.hpp"
#include "nsi/logic/vocabulary.hpp"

namespace nsi {

struct UnknownAction : Error {
  explicit UnknownAction(const std::string& a) : Error("unknown action: " + a) {}
};

// One environment transition. Failed-but-known actions return
// success=false with the sentinel observation and an empty raw event.
struct ActionResult {
  std::string observation;
  bool success = false;
  FactDelta raw_event;  // machine-readable effect, consumed by the oracle grounder
};

class WorldInterface {
 public:
  virtual ~WorldInterface() = default;
  virtual ActionResult perform(const std::string& action_text) = 0;
  // Universe plus the initially perceivable facts (the first look around).
  virtual SymbolicState initial_state() const = 0;
  virtual const Vocabulary& vocabulary() const = 0;
  // Ground precondition of an action in the current world, for diagnoses.
  virtual Expr action_precondition(const std::string& action_text) const = 0;
};

// ground(previous facts, action, observation) -> FactDelta
using GrounderFn =
    std::function<FactDelta(const SymbolicState&, const std::string&, const ActionResult&)>;

// The built-in oracle reads the world's raw event and keeps only facts
// newly entailed or falsified relative to what the agent already tracks.
inline GrounderFn oracle_grounder() {
  return [](const SymbolicState& prev, const std::string&, const ActionResult& r) {
    FactDelta out;
    for (const auto& a : r.raw_event.add_facts)
      if (!prev.has(a)) out.add_facts.push_back(a);
    for (const auto& a : r.raw_event.remove_facts)
      if (prev.has(a)) out.remove_facts.push_back(a);
    return out;
  };
}

}  // namespace nsi
