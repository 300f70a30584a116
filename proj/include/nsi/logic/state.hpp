#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "nsi/logic/value.hpp"
#include "nsi/logic/vocabulary.hpp"

namespace nsi {

// A predicate applied to concrete arguments: contains(fridge_1, apple_1).
struct GroundAtom {
  std::string predicate;
  std::vector<Value> args;

  std::string str() const {
    std::string out = predicate + "(";
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) out += ", ";
      // Bare symbols inside atoms keep the prompt-schema rendering.
      out += args[i].kind() == ValueKind::Object ? args[i].as_object() : args[i].str();
    }
    return out + ")";
  }

  bool operator==(const GroundAtom& o) const { return predicate == o.predicate && args == o.args; }
  bool operator<(const GroundAtom& o) const {
    if (predicate != o.predicate) return predicate < o.predicate;
    return str() < o.str();
  }
};

struct FactDelta {
  std::vector<GroundAtom> add_facts;
  std::vector<GroundAtom> remove_facts;

  bool empty() const { return add_facts.empty() && remove_facts.empty(); }
};

// The symbolic state Z: ground atoms under the closed-world assumption,
// numeric attributes, and the typed object universe. Immutable by
// convention: apply_fact_delta returns a new state.
struct SymbolicState {
  std::set<GroundAtom> atoms;
  std::map<std::pair<std::string, std::string>, Rational> attributes;  // (attr, object) -> value
  std::map<std::string, std::set<std::string>> universe;               // type tag -> object symbols

  bool has(const GroundAtom& a) const { return atoms.count(a) > 0; }

  bool in_universe(const std::string& type_tag, const std::string& object) const {
    auto it = universe.find(type_tag);
    return it != universe.end() && it->second.count(object) > 0;
  }

  // Objects of one type tag in canonical (lexicographic) order.
  std::vector<std::string> objects_of(const std::string& type_tag) const {
    auto it = universe.find(type_tag);
    if (it == universe.end()) return {};
    return {it->second.begin(), it->second.end()};
  }

  void register_object(const std::string& type_tag, const std::string& object) {
    universe[type_tag].insert(object);
  }

  Rational attribute_or_zero(const std::string& name, const std::string& object) const {
    auto it = attributes.find({name, object});
    return it == attributes.end() ? Rational(0) : it->second;
  }

  // Stable content digest; internal interpreter steps must preserve it.
  std::uint64_t digest() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const std::string& s) {
      for (unsigned char c : s) { h ^= c; h *= 1099511628211ull; }
      h ^= 0x1f; h *= 1099511628211ull;
    };
    for (const auto& a : atoms) mix(a.str());
    for (const auto& [k, v] : attributes) mix(k.first + ":" + k.second + "=" + v.str());
    for (const auto& [t, objs] : universe) {
      mix("#" + t);
      for (const auto& o : objs) mix(o);
    }
    return h;
  }
};

// True iff the atom is present (closed world). Type-check predicates are
// resolved against the universe so they agree with expression evaluation.
inline bool entails(const Vocabulary& vocab, const SymbolicState& state, const GroundAtom& atom) {
  const PredicateSchema& schema = vocab.require(atom.predicate);
  if (schema.type_check) {
    if (atom.args.size() != 2) return false;
    return state.in_universe(atom.args[1].as_object(), atom.args[0].as_object());
  }
  return state.has(atom);
}

struct ApplyResult {
  SymbolicState state;
  // Removals of absent atoms are legal no-ops but get flagged.
  std::vector<GroundAtom> missing_removals;
};

// (atoms \ remove_facts) ∪ add_facts. New objects are auto-registered.
// Atoms of a predicate that feeds a synced numeric attribute keep the
// single-valued invariant: adding inventory(x, n) clears inventory(x, m).
inline ApplyResult apply_fact_delta_checked(const Vocabulary& vocab, const SymbolicState& state,
                                            const FactDelta& delta,
                                            const std::string& default_type_for_new = "Object") {
  ApplyResult r{state, {}};
  // Map predicate -> attribute it feeds.
  std::map<std::string, std::string> feeds;
  for (const auto& [name, s] : vocab.all())
    if (!s.synced_from.empty()) feeds[s.synced_from] = name;

  for (const auto& a : delta.remove_facts) {
    vocab.require(a.predicate);
    if (!r.state.atoms.erase(a)) r.missing_removals.push_back(a);
    auto feeder = feeds.find(a.predicate);
    if (feeder != feeds.end() && a.args.size() == 2 && a.args[0].kind() == ValueKind::Object)
      r.state.attributes.erase({feeder->second, a.args[0].as_object()});
  }

  for (const auto& a : delta.add_facts) {
    const PredicateSchema& schema = vocab.require(a.predicate);
    if (a.args.size() != schema.args.size())
      throw TypeMismatch("arity " + std::to_string(schema.args.size()),
                         a.predicate + "/" + std::to_string(a.args.size()));
    auto feeder = feeds.find(a.predicate);
    if (feeder != feeds.end() && a.args.size() == 2 && a.args[1].kind() == ValueKind::Num) {
      const std::string& obj = a.args[0].as_object();
      // Drop any previous count atom for the same object.
      for (auto it = r.state.atoms.begin(); it != r.state.atoms.end();) {
        if (it->predicate == a.predicate && !it->args.empty() && it->args[0] == a.args[0])
          it = r.state.atoms.erase(it);
        else
          ++it;
      }
      r.state.attributes[{feeder->second, obj}] = a.args[1].as_num();
    }
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      if (a.args[i].kind() == ValueKind::Object && schema.args[i] == ArgType::Object) {
        const std::string& obj = a.args[i].as_object();
        bool known = false;
        for (const auto& [t, objs] : r.state.universe)
          if (objs.count(obj)) { known = true; break; }
        if (!known) r.state.register_object(default_type_for_new, obj);
      }
    }
    r.state.atoms.insert(a);
  }
  return r;
}

inline SymbolicState apply_fact_delta(const Vocabulary& vocab, const SymbolicState& state,
                                      const FactDelta& delta,
                                      const std::string& default_type_for_new = "Object") {
  return apply_fact_delta_checked(vocab, state, delta, default_type_for_new).state;
}

}  // namespace nsi
