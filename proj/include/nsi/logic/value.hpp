#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "nsi/logic/errors.hpp"

namespace nsi {

// Exact rational. Counts and comparisons in the crafting domain must be
// exact, so there is no floating point anywhere in the logic layer.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;  // always > 0 after normalize()

  Rational() = default;
  Rational(std::int64_t n) : num(n), den(1) {}  // NOLINT: implicit on purpose
  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }

  void normalize() {
    if (den == 0) throw DivisionByZero();
    if (den < 0) { num = -num; den = -den; }
    std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) { num /= g; den /= g; }
    if (num == 0) den = 1;
  }

  bool is_integer() const { return den == 1; }

  friend Rational operator+(Rational a, Rational b) { return {a.num * b.den + b.num * a.den, a.den * b.den}; }
  friend Rational operator-(Rational a, Rational b) { return {a.num * b.den - b.num * a.den, a.den * b.den}; }
  friend Rational operator*(Rational a, Rational b) { return {a.num * b.num, a.den * b.den}; }
  friend Rational operator/(Rational a, Rational b) {
    if (b.num == 0) throw DivisionByZero();
    return {a.num * b.den, a.den * b.num};
  }
  friend bool operator==(Rational a, Rational b) { return a.num == b.num && a.den == b.den; }
  friend bool operator<(Rational a, Rational b) { return a.num * b.den < b.num * a.den; }
  friend bool operator>(Rational a, Rational b) { return b < a; }

  std::string str() const {
    return is_integer() ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
  }
};

enum class ValueKind { Object, Num, Bool, List };

inline const char* kind_name(ValueKind k) {
  switch (k) {
    case ValueKind::Object: return "Object";
    case ValueKind::Num: return "Num";
    case ValueKind::Bool: return "Bool";
    case ValueKind::List: return "List";
  }
  return "?";
}

// A domain value: an object symbol, an exact number, a boolean, or a
// homogeneous list. Object symbols are lowercase snake_case identifiers,
// optionally with a numeric suffix (fridge_1). Values are immutable in
// practice: the engine always copies, never mutates in place.
class Value {
 public:
  struct List {
    ValueKind elem;  // element kind, meaningful even when empty
    std::vector<Value> items;
    bool operator==(const List& o) const { return elem == o.elem && items == o.items; }
  };

  Value() : v_(false) {}
  static Value object(std::string symbol) { Value x; x.v_ = Obj{std::move(symbol)}; return x; }
  static Value number(Rational r) { Value x; x.v_ = r; return x; }
  static Value boolean(bool b) { Value x; x.v_ = b; return x; }
  static Value list(ValueKind elem, std::vector<Value> items = {}) {
    Value x;
    x.v_ = List{elem, std::move(items)};
    return x;
  }

  ValueKind kind() const {
    if (std::holds_alternative<Obj>(v_)) return ValueKind::Object;
    if (std::holds_alternative<Rational>(v_)) return ValueKind::Num;
    if (std::holds_alternative<bool>(v_)) return ValueKind::Bool;
    return ValueKind::List;
  }

  const std::string& as_object() const { return expect<Obj>("Object").symbol; }
  Rational as_num() const { return expect<Rational>("Num"); }
  bool as_bool() const { return expect<bool>("Bool"); }
  const List& as_list() const { return expect<List>("List"); }

  bool operator==(const Value& o) const { return v_ == o.v_; }
  bool operator!=(const Value& o) const { return !(v_ == o.v_); }

  // Canonical rendering, parseable by the DSL parser for Object/Num/Bool.
  std::string str() const {
    switch (kind()) {
      case ValueKind::Object: return "'" + as_object() + "'";
      case ValueKind::Num: return as_num().str();
      case ValueKind::Bool: return as_bool() ? "true" : "false";
      case ValueKind::List: {
        std::string out = "[";
        const auto& l = as_list();
        for (std::size_t i = 0; i < l.items.size(); ++i) {
          if (i) out += ", ";
          out += l.items[i].str();
        }
        return out + "]";
      }
    }
    return "?";
  }

 private:
  struct Obj {
    std::string symbol;
    bool operator==(const Obj& o) const { return symbol == o.symbol; }
  };

  template <class T>
  const T& expect(const char* want) const {
    if (auto* p = std::get_if<T>(&v_)) return *p;
    throw TypeMismatch(want, kind_name(kind()));
  }

  std::variant<Obj, Rational, bool, List> v_;
};

inline bool is_object_symbol(const std::string& s) {
  if (s.empty() || !(s[0] >= 'a' && s[0] <= 'z')) return false;
  for (char c : s)
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_')) return false;
  return true;
}

// Identifiers ending in _<digits> denote object literals in the concrete
// syntax (fridge_1); everything else lowercase is a variable reference.
inline bool has_numeric_suffix(const std::string& s) {
  auto us = s.rfind('_');
  if (us == std::string::npos || us + 1 >= s.size()) return false;
  for (std::size_t i = us + 1; i < s.size(); ++i)
    if (!(s[i] >= '0' && s[i] <= '9')) return false;
  return true;
}

inline bool is_upper_ident(const std::string& s) {
  if (s.empty() || !(s[0] >= 'A' && s[0] <= 'Z')) return false;
  for (char c : s)
    if (!((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_')) return false;
  return true;
}

inline std::string to_upper_ident(std::string s) {
  for (char& c : s)
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  return s;
}

}  // namespace nsi
