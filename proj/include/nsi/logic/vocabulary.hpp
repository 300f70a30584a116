#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nsi/logic/errors.hpp"
#include "nsi/logic/value.hpp"

namespace nsi {

enum class ArgType { Object, Num };

enum class PredicateKind { Boolean, NumericAttribute };

struct PredicateSchema {
  std::string name;
  std::vector<ArgType> args;
  PredicateKind kind = PredicateKind::Boolean;
  // Type-check predicates (is_type and friends) are resolved against the
  // typed universe instead of stored atoms; closed world still applies.
  bool type_check = false;
  // For numeric attributes synced from a unary-numeric predicate, the name
  // of that predicate (count <= inventory). Empty otherwise.
  std::string synced_from;
};

// A domain's predicate vocabulary. Names are unique; boolean predicates
// have arity >= 1, numeric attributes are unary.
class Vocabulary {
 public:
  Vocabulary& add(PredicateSchema schema) {
    if (schema.args.empty()) throw Error("predicate " + schema.name + " must have arity >= 1");
    if (schema.kind == PredicateKind::NumericAttribute && schema.args.size() != 1)
      throw Error("numeric attribute " + schema.name + " must be unary");
    if (schemas_.count(schema.name)) throw Error("duplicate predicate: " + schema.name);
    schemas_.emplace(schema.name, std::move(schema));
    return *this;
  }

  Vocabulary& boolean(const std::string& name, std::size_t arity) {
    std::vector<ArgType> args(arity, ArgType::Object);
    return add({name, std::move(args), PredicateKind::Boolean, false, {}});
  }

  Vocabulary& boolean_with_num(const std::string& name) {
    return add({name, {ArgType::Object, ArgType::Num}, PredicateKind::Boolean, false, {}});
  }

  Vocabulary& type_check(const std::string& name) {
    return add({name, {ArgType::Object, ArgType::Object}, PredicateKind::Boolean, true, {}});
  }

  Vocabulary& attribute(const std::string& name, const std::string& synced_from = {}) {
    return add({name, {ArgType::Object}, PredicateKind::NumericAttribute, false, synced_from});
  }

  const PredicateSchema* find(const std::string& name) const {
    auto it = schemas_.find(name);
    return it == schemas_.end() ? nullptr : &it->second;
  }

  const PredicateSchema& require(const std::string& name) const {
    if (auto* s = find(name)) return *s;
    throw UnknownPredicate(name);
  }

  bool empty() const { return schemas_.empty(); }
  const std::map<std::string, PredicateSchema>& all() const { return schemas_; }

 private:
  std::map<std::string, PredicateSchema> schemas_;
};

}  // namespace nsi
