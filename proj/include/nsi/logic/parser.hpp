#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include "nsi/logic/ast.hpp"
#include "nsi/logic/errors.hpp"
#include "nsi/logic/vocabulary.hpp"

namespace nsi {

// Recursive-descent parser for the condition / variable-binding language.
//
// Concrete syntax: infix and/or/not, comparisons (< > ==), arithmetic,
// call syntax pred(args), select_one('Type', lambda v: body), select_all,
// exists, select_idx(list, i), list literals [a, b].
//
// Identifier rules: 'quoted' is always an object symbol; a bare lowercase
// identifier ending in _<digits> (fridge_1) is an object literal; anything
// else bare is a variable (binder-bound names always win). UPPERCASE names
// are global references.
class ExprParser {
 public:
  ExprParser(std::string text, const Vocabulary& vocab)
      : text_(std::move(text)), vocab_(vocab) {
    if (vocab_.empty()) throw Error("parse_expression: vocabulary is empty");
  }

  Expr parse() {
    Expr e = parse_or();
    skip_ws();
    if (pos_ != text_.size()) throw SyntaxError("trailing input", pos_);
    return e;
  }

 private:
  std::string text_;
  const Vocabulary& vocab_;
  std::size_t pos_ = 0;
  std::vector<std::string> binders_;

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(const std::string& tok) {
    skip_ws();
    if (text_.compare(pos_, tok.size(), tok) == 0) {
      // Keyword tokens must not run into a longer identifier.
      if (std::isalpha(static_cast<unsigned char>(tok[0]))) {
        std::size_t after = pos_ + tok.size();
        if (after < text_.size() &&
            (std::isalnum(static_cast<unsigned char>(text_[after])) || text_[after] == '_'))
          return false;
      }
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  void expect_tok(const std::string& tok) {
    if (!eat(tok)) throw SyntaxError("expected '" + tok + "'", pos_);
  }

  std::optional<std::string> try_ident() {
    skip_ws();
    std::size_t start = pos_;
    if (start >= text_.size()) return std::nullopt;
    char c = text_[start];
    if (!(std::isalpha(static_cast<unsigned char>(c)) || c == '_')) return std::nullopt;
    std::size_t end = start;
    while (end < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_'))
      ++end;
    pos_ = end;
    return text_.substr(start, end - start);
  }

  Expr parse_or() {
    Expr e = parse_and();
    while (eat("or")) {
      require_bool(e);
      Expr rhs = parse_and();
      require_bool(rhs);
      e = ExprNode::disj(e, rhs);
    }
    return e;
  }

  Expr parse_and() {
    Expr e = parse_not();
    while (eat("and")) {
      require_bool(e);
      Expr rhs = parse_not();
      require_bool(rhs);
      e = ExprNode::conj(e, rhs);
    }
    return e;
  }

  Expr parse_not() {
    if (eat("not")) {
      Expr e = parse_not();
      require_bool(e);
      return ExprNode::negate(e);
    }
    return parse_cmp();
  }

  Expr parse_cmp() {
    Expr lhs = parse_add();
    skip_ws();
    ExprOp op;
    if (eat("==")) op = ExprOp::CmpEq;
    else if (eat("<")) op = ExprOp::CmpLt;
    else if (eat(">")) op = ExprOp::CmpGt;
    else return lhs;
    Expr rhs = parse_add();
    if (op == ExprOp::CmpEq) {
      coerce_var(lhs, rhs->type);
      coerce_var(rhs, lhs->type);
      if (!(lhs->type == rhs->type)) throw TypeMismatch(lhs->type.str(), rhs->type.str());
    } else {
      coerce_var(lhs, ExprType::num());
      coerce_var(rhs, ExprType::num());
      require_num(lhs);
      require_num(rhs);
    }
    return ExprNode::binary(op, lhs, rhs, ExprType::boolean());
  }

  Expr parse_add() {
    Expr e = parse_mul();
    for (;;) {
      skip_ws();
      ExprOp op;
      if (eat("+")) op = ExprOp::Add;
      else if (peek_minus()) { expect_tok("-"); op = ExprOp::Sub; }
      else break;
      Expr rhs = parse_mul();
      coerce_var(e, ExprType::num());
      coerce_var(rhs, ExprType::num());
      require_num(e);
      require_num(rhs);
      e = ExprNode::binary(op, e, rhs, ExprType::num());
    }
    return e;
  }

  bool peek_minus() {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == '-';
  }

  Expr parse_mul() {
    Expr e = parse_primary();
    for (;;) {
      skip_ws();
      ExprOp op;
      if (eat("*")) op = ExprOp::Mul;
      else if (eat("/")) op = ExprOp::Div;
      else break;
      Expr rhs = parse_primary();
      coerce_var(e, ExprType::num());
      coerce_var(rhs, ExprType::num());
      require_num(e);
      require_num(rhs);
      e = ExprNode::binary(op, e, rhs, ExprType::num());
    }
    return e;
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw SyntaxError("unexpected end of input", pos_);
    char c = text_[pos_];

    if (c == '(') {
      ++pos_;
      Expr e = parse_or();
      expect_tok(")");
      return e;
    }
    if (c == '[') return parse_list_literal();
    if (c == '\'') return ExprNode::constant(Value::object(parse_quoted()));
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-') return parse_number();

    std::size_t at = pos_;
    auto ident = try_ident();
    if (!ident) throw SyntaxError("unexpected character", pos_);

    if (*ident == "true") return ExprNode::constant(Value::boolean(true));
    if (*ident == "false") return ExprNode::constant(Value::boolean(false));
    if (*ident == "select_one" || *ident == "select_all" || *ident == "exists")
      return parse_select(*ident, at);
    if (*ident == "select_idx") return parse_select_idx(at);

    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '(') return parse_call(*ident, at);
    return name_ref(*ident);
  }

  std::string parse_quoted() {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != '\'') throw SyntaxError("expected quoted symbol", pos_);
    std::size_t end = text_.find('\'', pos_ + 1);
    if (end == std::string::npos) throw SyntaxError("unterminated quote", pos_);
    std::string sym = text_.substr(pos_ + 1, end - pos_ - 1);
    pos_ = end + 1;
    if (sym.empty()) throw SyntaxError("empty symbol", pos_);
    return sym;
  }

  Expr parse_number() {
    skip_ws();
    std::size_t start = pos_;
    if (pos_ < text_.size() && text_[pos_] == '-') ++pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start || (text_[start] == '-' && pos_ == start + 1))
      throw SyntaxError("expected number", start);
    std::int64_t n = std::stoll(text_.substr(start, pos_ - start));
    return ExprNode::constant(Value::number(Rational(n)));
  }

  Expr parse_list_literal() {
    expect_tok("[");
    std::vector<Value> items;
    skip_ws();
    if (!eat("]")) {
      do {
        Expr e = parse_or();
        if (e->op != ExprOp::Const)
          throw SyntaxError("list literals may contain only constants", pos_);
        items.push_back(e->value);
      } while (eat(","));
      expect_tok("]");
    }
    ValueKind elem = items.empty() ? ValueKind::Object : items[0].kind();
    for (const auto& v : items)
      if (v.kind() != elem) throw TypeMismatch(kind_name(elem), kind_name(v.kind()));
    return ExprNode::constant(Value::list(elem, std::move(items)));
  }

  Expr parse_select(const std::string& which, std::size_t at) {
    expect_tok("(");
    std::string tag = parse_quoted();
    expect_tok(",");
    std::string binder = "x";
    if (eat("lambda")) {
      auto b = try_ident();
      if (!b) throw SyntaxError("expected binder name after lambda", pos_);
      binder = *b;
      expect_tok(":");
    }
    binders_.push_back(binder);
    Expr body = parse_or();
    binders_.pop_back();
    require_bool(body);
    expect_tok(")");
    ExprOp op = which == "select_one" ? ExprOp::SelectOne
                : which == "select_all" ? ExprOp::SelectAll
                                        : ExprOp::Exists;
    (void)at;
    return ExprNode::select(op, tag, binder, body);
  }

  Expr parse_select_idx(std::size_t at) {
    expect_tok("(");
    Expr list = parse_or();
    coerce_var(list, ExprType::list_of(ValueKind::Object));
    if (list->type.kind != ValueKind::List)
      throw TypeMismatch("List", list->type.str());
    expect_tok(",");
    Expr idx = parse_or();
    coerce_var(idx, ExprType::num());
    require_num(idx);
    expect_tok(")");
    (void)at;
    return ExprNode::select_idx(list, idx);
  }

  Expr parse_call(const std::string& name, std::size_t at) {
    const PredicateSchema* schema = vocab_.find(name);
    if (!schema) throw UnknownPredicate(name);
    expect_tok("(");
    std::vector<Expr> args;
    skip_ws();
    if (!eat(")")) {
      do {
        args.push_back(parse_or());
      } while (eat(","));
      expect_tok(")");
    }
    if (args.size() != schema->args.size())
      throw SyntaxError(name + " expects " + std::to_string(schema->args.size()) + " args, got " +
                            std::to_string(args.size()),
                        at);
    for (std::size_t i = 0; i < args.size(); ++i) {
      ExprType want = schema->args[i] == ArgType::Object ? ExprType::obj() : ExprType::num();
      coerce_var(args[i], want);
      if (!(args[i]->type == want)) throw TypeMismatch(want.str(), args[i]->type.str());
    }
    if (schema->kind == PredicateKind::NumericAttribute) return ExprNode::attr(name, args[0]);
    return ExprNode::pred(name, std::move(args), schema->type_check);
  }

  // Bare identifier: binder-bound name, object literal, or variable.
  Expr name_ref(const std::string& ident) {
    for (auto it = binders_.rbegin(); it != binders_.rend(); ++it)
      if (*it == ident) return ExprNode::var(ident, ExprType::obj());
    if (is_object_symbol(ident) && has_numeric_suffix(ident))
      return ExprNode::constant(Value::object(ident));
    return ExprNode::var(ident, ExprType::obj());
  }

  // A fresh variable's type defaults to Object; let a typed context narrow it.
  void coerce_var(Expr& e, ExprType want) {
    if (e->op == ExprOp::Var && e->type == ExprType::obj() && !(want == ExprType::obj())) {
      e = ExprNode::var(e->name, want);
    }
  }

  void require_bool(const Expr& e) {
    if (e->type.kind != ValueKind::Bool) throw TypeMismatch("Bool", e->type.str());
  }
  void require_num(const Expr& e) {
    if (e->type.kind != ValueKind::Num) throw TypeMismatch("Num", e->type.str());
  }
};

// Parse a single expression against a predicate vocabulary.
inline Expr parse_expression(const std::string& text, const Vocabulary& vocab) {
  return ExprParser(text, vocab).parse();
}

}  // namespace nsi
