#pragma once

#include <map>
#include <optional>
#include <string>

#include "nsi/logic/errors.hpp"
#include "nsi/logic/value.hpp"

namespace nsi {

// The skill-internal variable store C. Globals carry UPPERCASE names
// (invocation parameters live here too), locals carry lowercase names;
// the casing rule keeps the two namespaces disjoint.
struct Scope {
  std::map<std::string, Value> globals;
  std::map<std::string, Value> locals;

  void set(const std::string& name, Value v) {
    if (is_upper_ident(name))
      globals[name] = std::move(v);
    else
      locals[name] = std::move(v);
  }

  std::optional<Value> try_get(const std::string& name) const {
    const auto& m = is_upper_ident(name) ? globals : locals;
    auto it = m.find(name);
    if (it == m.end()) return std::nullopt;
    return it->second;
  }

  Value get(const std::string& name) const {
    if (auto v = try_get(name)) return *v;
    throw UnboundVariable(name);
  }

  std::uint64_t digest() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const std::string& s) {
      for (unsigned char c : s) { h ^= c; h *= 1099511628211ull; }
      h ^= 0x1f; h *= 1099511628211ull;
    };
    for (const auto& [k, v] : globals) mix(k + "=" + v.str());
    for (const auto& [k, v] : locals) mix(k + "=" + v.str());
    return h;
  }
};

}  // namespace nsi
