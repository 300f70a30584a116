#pragma once

#include <stdexcept>
#include <string>

namespace nsi {

// Base for all engine errors. Message text is already formatted.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct SyntaxError : Error {
  std::size_t position;
  SyntaxError(const std::string& msg, std::size_t pos)
      : Error(msg + " (at offset " + std::to_string(pos) + ")"), position(pos) {}
};

struct UnknownPredicate : Error {
  std::string name;
  explicit UnknownPredicate(const std::string& n)
      : Error("unknown predicate: " + n), name(n) {}
};

struct TypeMismatch : Error {
  TypeMismatch(const std::string& expected, const std::string& found)
      : Error("type mismatch: expected " + expected + ", found " + found) {}
};

struct UnboundVariable : Error {
  std::string name;
  explicit UnboundVariable(const std::string& n)
      : Error("unbound variable: " + n), name(n) {}
};

// select_one over an empty match set.
struct NoMatch : Error {
  explicit NoMatch(const std::string& what_) : Error("no match: " + what_) {}
};

struct IndexOutOfRange : Error {
  explicit IndexOutOfRange(const std::string& what_) : Error("index out of range: " + what_) {}
};

struct DivisionByZero : Error {
  DivisionByZero() : Error("division by zero") {}
};

}  // namespace nsi
