#pragma once

#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cftwin::expr {

// Grammar (loosest binding first):
//   ternary := or_eq ('?' ternary ':' ternary)?
//   or_eq   := bor (('==' | '!=') bor)*
//   bor     := band ('|' band)*
//   band    := bxor ('&' bxor)*
//   bxor    := add ('^' add)*
//   add     := mul (('+' | '-') mul)*
//   mul     := unary ('*' unary)*
//   unary   := '!' unary | primary
//   primary := INT | IDENT | ('min' | 'max') '(' ternary ',' ternary ')' | '(' ternary ')'
// Identifiers are [A-Za-z_][A-Za-z0-9_]* optionally followed by primes (A').

enum class Op { Literal, Var, Not, Mul, Add, Sub, Xor, And, Or, Eq, Ne, Min, Max, Cond };

struct Node {
  Op op = Op::Literal;
  long long value = 0;  // Literal
  std::string name;     // Var
  std::vector<std::unique_ptr<Node>> args;

  bool operator==(const Node& other) const;
};

class Expression {
 public:
  Expression() = default;
  Expression(const Expression& other);
  Expression& operator=(const Expression& other);
  Expression(Expression&&) noexcept = default;
  Expression& operator=(Expression&&) noexcept = default;

  const Node& root() const { return *root_; }
  const std::string& source() const { return source_; }
  std::set<std::string> free_vars() const;

  long long evaluate(const std::map<std::string, long long, std::less<>>& env) const;

  /// Structural equality of the syntax trees (source text is ignored).
  bool same_tree(const Expression& other) const { return *root_ == *other.root_; }

  friend Expression parse(std::string_view source);
  friend Expression rename(const Expression& e, const std::map<std::string, std::string>& names);

 private:
  std::unique_ptr<Node> root_;
  std::string source_;
};

/// Throws SyntaxError with the byte offset of the first problem.
Expression parse(std::string_view source);

/// Minimal-parenthesis rendering; parse(to_string(e)) reproduces e's tree.
std::string to_string(const Expression& e);

/// Replaces variable names; the result's source is the re-rendered text.
Expression rename(const Expression& e, const std::map<std::string, std::string>& names);

struct Parent {
  std::string name;
  std::span<const int> domain;
};

/// Tabulates `e` over every parent combination (last parent varies fastest)
/// and returns, per row, the index of the result within `out_domain`.
/// Throws Error(Validation) for free variables that are not parents and
/// Error(Domain) for results outside `out_domain`, naming the input row.
std::vector<int> compile(const Expression& e, std::span<const Parent> parents,
                         std::span<const int> out_domain);

}  // namespace cftwin::expr
