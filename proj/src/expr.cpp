#include "cftwin/expr.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

#include "cftwin/error.hpp"

namespace cftwin::expr {

bool Node::operator==(const Node& other) const {
  if (op != other.op || value != other.value || name != other.name) return false;
  if (args.size() != other.args.size()) return false;
  for (std::size_t i = 0; i < args.size(); ++i)
    if (!(*args[i] == *other.args[i])) return false;
  return true;
}

namespace {

std::unique_ptr<Node> clone(const Node& n) {
  auto out = std::make_unique<Node>();
  out->op = n.op;
  out->value = n.value;
  out->name = n.name;
  for (const auto& a : n.args) out->args.push_back(clone(*a));
  return out;
}

enum class Tok { Int, Ident, Punct, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t offset;
};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      out.push_back({Tok::Int, std::string(src.substr(start, i - start)), start});
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_'))
        ++i;
      while (i < src.size() && src[i] == '\'') ++i;
      out.push_back({Tok::Ident, std::string(src.substr(start, i - start)), start});
      continue;
    }
    if ((c == '=' || c == '!') && i + 1 < src.size() && src[i + 1] == '=') {
      out.push_back({Tok::Punct, std::string(src.substr(start, 2)), start});
      i += 2;
      continue;
    }
    static constexpr std::string_view kSingle = "!*+-^&|?:(),";
    if (kSingle.find(c) != std::string_view::npos) {
      out.push_back({Tok::Punct, std::string(1, c), start});
      ++i;
      continue;
    }
    throw SyntaxError(start, std::string("unknown token '") + c + "'");
  }
  out.push_back({Tok::End, "", src.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : tokens_(lex(src)) {}

  std::unique_ptr<Node> parse_all() {
    auto e = ternary();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    return e;
  }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;

  const Token& peek() const { return tokens_[pos_]; }
  [[noreturn]] void fail(const std::string& what) const { throw SyntaxError(peek().offset, what); }

  bool accept(std::string_view punct) {
    if (peek().kind == Tok::Punct && peek().text == punct) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(std::string_view punct) {
    if (!accept(punct)) {
      if (peek().kind == Tok::End) fail("expected '" + std::string(punct) + "' but input ended");
      fail("expected '" + std::string(punct) + "' but found '" + peek().text + "'");
    }
  }

  static std::unique_ptr<Node> make(Op op, std::unique_ptr<Node> a, std::unique_ptr<Node> b) {
    auto n = std::make_unique<Node>();
    n->op = op;
    n->args.push_back(std::move(a));
    n->args.push_back(std::move(b));
    return n;
  }

  template <class Next>
  std::unique_ptr<Node> left_assoc(Next next, std::initializer_list<std::pair<const char*, Op>> ops) {
    auto lhs = (this->*next)();
    for (;;) {
      bool matched = false;
      for (auto [text, op] : ops) {
        if (accept(text)) {
          lhs = make(op, std::move(lhs), (this->*next)());
          matched = true;
          break;
        }
      }
      if (!matched) return lhs;
    }
  }

  std::unique_ptr<Node> ternary() {
    auto cond = eq();
    if (!accept("?")) return cond;
    auto then_branch = ternary();
    expect(":");
    auto else_branch = ternary();
    auto n = std::make_unique<Node>();
    n->op = Op::Cond;
    n->args.push_back(std::move(cond));
    n->args.push_back(std::move(then_branch));
    n->args.push_back(std::move(else_branch));
    return n;
  }
  std::unique_ptr<Node> eq() { return left_assoc(&Parser::bor, {{"==", Op::Eq}, {"!=", Op::Ne}}); }
  std::unique_ptr<Node> bor() { return left_assoc(&Parser::band, {{"|", Op::Or}}); }
  std::unique_ptr<Node> band() { return left_assoc(&Parser::bxor, {{"&", Op::And}}); }
  std::unique_ptr<Node> bxor() { return left_assoc(&Parser::add, {{"^", Op::Xor}}); }
  std::unique_ptr<Node> add() { return left_assoc(&Parser::mul, {{"+", Op::Add}, {"-", Op::Sub}}); }
  std::unique_ptr<Node> mul() { return left_assoc(&Parser::unary, {{"*", Op::Mul}}); }

  std::unique_ptr<Node> unary() {
    if (accept("!")) {
      auto n = std::make_unique<Node>();
      n->op = Op::Not;
      n->args.push_back(unary());
      return n;
    }
    return primary();
  }

  std::unique_ptr<Node> primary() {
    const Token tok = peek();
    if (tok.kind == Tok::Int) {
      ++pos_;
      auto n = std::make_unique<Node>();
      n->op = Op::Literal;
      try {
        n->value = std::stoll(tok.text);
      } catch (const std::out_of_range&) {
        throw SyntaxError(tok.offset, "integer literal out of range");
      }
      return n;
    }
    if (tok.kind == Tok::Ident) {
      ++pos_;
      if ((tok.text == "min" || tok.text == "max") && accept("(")) {
        auto a = ternary();
        expect(",");
        auto b = ternary();
        expect(")");
        return make(tok.text == "min" ? Op::Min : Op::Max, std::move(a), std::move(b));
      }
      auto n = std::make_unique<Node>();
      n->op = Op::Var;
      n->name = tok.text;
      return n;
    }
    if (accept("(")) {
      auto inner = ternary();
      expect(")");
      return inner;
    }
    if (tok.kind == Tok::End) fail("unexpected end of input");
    fail("unexpected '" + tok.text + "'");
  }
};

int precedence(Op op) {
  switch (op) {
    case Op::Cond: return 1;
    case Op::Eq:
    case Op::Ne: return 2;
    case Op::Or: return 3;
    case Op::And: return 4;
    case Op::Xor: return 5;
    case Op::Add:
    case Op::Sub: return 6;
    case Op::Mul: return 7;
    case Op::Not: return 8;
    default: return 9;
  }
}

const char* symbol(Op op) {
  switch (op) {
    case Op::Mul: return " * ";
    case Op::Add: return " + ";
    case Op::Sub: return " - ";
    case Op::Xor: return " ^ ";
    case Op::And: return " & ";
    case Op::Or: return " | ";
    case Op::Eq: return " == ";
    case Op::Ne: return " != ";
    default: return "?";
  }
}

void render(const Node& n, std::string& out);

void render_child(const Node& child, bool parens, std::string& out) {
  if (parens) out += '(';
  render(child, out);
  if (parens) out += ')';
}

void render(const Node& n, std::string& out) {
  switch (n.op) {
    case Op::Literal: out += std::to_string(n.value); return;
    case Op::Var: out += n.name; return;
    case Op::Not:
      out += '!';
      render_child(*n.args[0], precedence(n.args[0]->op) < precedence(Op::Not), out);
      return;
    case Op::Min:
    case Op::Max:
      out += n.op == Op::Min ? "min(" : "max(";
      render(*n.args[0], out);
      out += ", ";
      render(*n.args[1], out);
      out += ')';
      return;
    case Op::Cond:
      render_child(*n.args[0], n.args[0]->op == Op::Cond, out);
      out += " ? ";
      render(*n.args[1], out);
      out += " : ";
      render(*n.args[2], out);
      return;
    default: {
      const int p = precedence(n.op);
      render_child(*n.args[0], precedence(n.args[0]->op) < p, out);
      out += symbol(n.op);
      render_child(*n.args[1], precedence(n.args[1]->op) <= p, out);
      return;
    }
  }
}

void collect(const Node& n, std::set<std::string>& out) {
  if (n.op == Op::Var) out.insert(n.name);
  for (const auto& a : n.args) collect(*a, out);
}

long long eval(const Node& n, const std::map<std::string, long long, std::less<>>& env) {
  auto arg = [&](std::size_t i) { return eval(*n.args[i], env); };
  switch (n.op) {
    case Op::Literal: return n.value;
    case Op::Var: {
      auto it = env.find(n.name);
      if (it == env.end()) throw Error(ErrorKind::Lookup, "unbound variable '" + n.name + "'");
      return it->second;
    }
    case Op::Not: return arg(0) == 0 ? 1 : 0;
    case Op::Mul: return arg(0) * arg(1);
    case Op::Add: return arg(0) + arg(1);
    case Op::Sub: return arg(0) - arg(1);
    case Op::Xor: return arg(0) ^ arg(1);
    case Op::And: return arg(0) & arg(1);
    case Op::Or: return arg(0) | arg(1);
    case Op::Eq: return arg(0) == arg(1) ? 1 : 0;
    case Op::Ne: return arg(0) != arg(1) ? 1 : 0;
    case Op::Min: return std::min(arg(0), arg(1));
    case Op::Max: return std::max(arg(0), arg(1));
    case Op::Cond: return arg(0) != 0 ? arg(1) : arg(2);
  }
  return 0;
}

void rename_in(Node& n, const std::map<std::string, std::string>& names) {
  if (n.op == Op::Var) {
    auto it = names.find(n.name);
    if (it != names.end()) n.name = it->second;
  }
  for (auto& a : n.args) rename_in(*a, names);
}

}  // namespace

Expression::Expression(const Expression& other)
    : root_(other.root_ ? clone(*other.root_) : nullptr), source_(other.source_) {}

Expression& Expression::operator=(const Expression& other) {
  if (this != &other) {
    root_ = other.root_ ? clone(*other.root_) : nullptr;
    source_ = other.source_;
  }
  return *this;
}

std::set<std::string> Expression::free_vars() const {
  std::set<std::string> out;
  collect(*root_, out);
  return out;
}

long long Expression::evaluate(const std::map<std::string, long long, std::less<>>& env) const {
  return eval(*root_, env);
}

Expression parse(std::string_view source) {
  Expression e;
  e.root_ = Parser(source).parse_all();
  e.source_ = std::string(source);
  return e;
}

std::string to_string(const Expression& e) {
  std::string out;
  render(e.root(), out);
  return out;
}

Expression rename(const Expression& e, const std::map<std::string, std::string>& names) {
  Expression out(e);
  rename_in(*out.root_, names);
  out.source_ = to_string(out);
  return out;
}

std::vector<int> compile(const Expression& e, std::span<const Parent> parents,
                         std::span<const int> out_domain) {
  for (const auto& v : e.free_vars()) {
    bool found = std::any_of(parents.begin(), parents.end(),
                             [&](const Parent& p) { return p.name == v; });
    if (!found)
      throw Error(ErrorKind::Validation,
                  "expression '" + e.source() + "' uses '" + v + "' which is not a declared parent");
  }
  std::size_t rows = 1;
  for (const auto& p : parents) {
    if (p.domain.empty()) throw Error(ErrorKind::Validation, "parent '" + p.name + "' has an empty domain");
    rows *= p.domain.size();
  }

  std::vector<int> table(rows);
  std::vector<std::size_t> digit(parents.size(), 0);
  std::map<std::string, long long, std::less<>> env;
  for (std::size_t row = 0; row < rows; ++row) {
    for (std::size_t k = 0; k < parents.size(); ++k) env[parents[k].name] = parents[k].domain[digit[k]];
    const long long result = e.evaluate(env);
    auto it = std::find(out_domain.begin(), out_domain.end(), result);
    if (it == out_domain.end()) {
      std::string at = "(";
      for (std::size_t k = 0; k < parents.size(); ++k) {
        if (k) at += ", ";
        at += parents[k].name + "=" + std::to_string(parents[k].domain[digit[k]]);
      }
      at += ")";
      throw Error(ErrorKind::Domain, "expression '" + e.source() + "' yields " +
                                         std::to_string(result) + " outside the output domain at " + at);
    }
    table[row] = static_cast<int>(it - out_domain.begin());
    for (std::size_t k = parents.size(); k-- > 0;) {
      if (++digit[k] < parents[k].domain.size()) break;
      digit[k] = 0;
    }
  }
  return table;
}

}  // namespace cftwin::expr
