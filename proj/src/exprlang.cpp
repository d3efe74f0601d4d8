#include "piconsensus/exprlang.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace piconsensus {

namespace {

struct Token {
  enum class Kind { Number, Name, Op, LParen, RParen, End };
  Kind kind;
  std::size_t pos;
  std::string_view text;
  double number = 0.0;
};

constexpr std::array<std::pair<std::string_view, ExprFunction>, 6> kFunctions{{
    {"sin", ExprFunction::Sin},
    {"cos", ExprFunction::Cos},
    {"tan", ExprFunction::Tan},
    {"exp", ExprFunction::Exp},
    {"sqrt", ExprFunction::Sqrt},
    {"abs", ExprFunction::Abs},
}};

std::string_view function_name(ExprFunction f) {
  for (const auto& [name, fn] : kFunctions) {
    if (fn == f) return name;
  }
  return "?";
}

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    const unsigned char c = static_cast<unsigned char>(src[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (std::isdigit(c) || c == '.') {
      // digits [. digits] [e [+-] digits]
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      if (i < src.size() && src[i] == '.') {
        ++i;
        while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      }
      if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < src.size() && (src[j] == '+' || src[j] == '-')) ++j;
        if (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
          i = j;
        } else {
          throw ExprError(ExprErrorKind::Lexical, "malformed exponent in number", start);
        }
      }
      const std::string_view text = src.substr(start, i - start);
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
      if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ExprError(ExprErrorKind::Lexical, "malformed number '" + std::string(text) + "'",
                        start);
      }
      out.push_back({Token::Kind::Number, start, text, value});
    } else if (std::isalpha(c) || c == '_') {
      while (i < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) {
        ++i;
      }
      out.push_back({Token::Kind::Name, start, src.substr(start, i - start)});
    } else if (c == '+' || c == '-' || c == '*' || c == '/' || c == '^') {
      out.push_back({Token::Kind::Op, start, src.substr(start, 1)});
      ++i;
    } else if (c == '(') {
      out.push_back({Token::Kind::LParen, start, src.substr(start, 1)});
      ++i;
    } else if (c == ')') {
      out.push_back({Token::Kind::RParen, start, src.substr(start, 1)});
      ++i;
    } else {
      throw ExprError(ExprErrorKind::Lexical,
                      std::string("unexpected character '") + src[i] + "'", start);
    }
  }
  out.push_back({Token::Kind::End, src.size(), {}});
  return out;
}

}  // namespace

class ExprParser {
 public:
  ExprParser(std::string_view src, std::vector<std::string> vars) : tokens_(tokenize(src)) {
    expr_.variables_ = std::move(vars);
    expr_.source_ = std::string(src);
  }

  Expr run() {
    if (tokens_.front().kind == Token::Kind::End) {
      throw ExprError(ExprErrorKind::Syntax, "empty expression", 0);
    }
    parse_expr();
    if (peek().kind != Token::Kind::End) {
      throw ExprError(ExprErrorKind::Syntax,
                      "unexpected '" + std::string(peek().text) + "' after expression",
                      peek().pos);
    }
    return std::move(expr_);
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& take() { return tokens_[pos_++]; }
  bool at_op(char op) const {
    return peek().kind == Token::Kind::Op && peek().text.front() == op;
  }

  std::int32_t emit(ExprNode node) {
    expr_.nodes_.push_back(node);
    return static_cast<std::int32_t>(expr_.nodes_.size() - 1);
  }

  std::int32_t parse_expr() {
    std::int32_t lhs = parse_term();
    while (at_op('+') || at_op('-')) {
      const auto kind = take().text.front() == '+' ? ExprNode::Kind::Add : ExprNode::Kind::Sub;
      const std::int32_t rhs = parse_term();
      lhs = emit({.kind = kind, .lhs = lhs, .rhs = rhs});
    }
    return lhs;
  }

  std::int32_t parse_term() {
    std::int32_t lhs = parse_unary();
    while (at_op('*') || at_op('/')) {
      const auto kind = take().text.front() == '*' ? ExprNode::Kind::Mul : ExprNode::Kind::Div;
      const std::int32_t rhs = parse_unary();
      lhs = emit({.kind = kind, .lhs = lhs, .rhs = rhs});
    }
    return lhs;
  }

  std::int32_t parse_unary() {
    if (at_op('-')) {
      take();
      const std::int32_t operand = parse_unary();
      return emit({.kind = ExprNode::Kind::Negate, .lhs = operand});
    }
    if (at_op('+')) {
      take();
      return parse_unary();
    }
    return parse_power();
  }

  std::int32_t parse_power() {
    const std::int32_t base = parse_primary();
    if (at_op('^')) {
      take();
      const std::int32_t exponent = parse_unary();
      return emit({.kind = ExprNode::Kind::Pow, .lhs = base, .rhs = exponent});
    }
    return base;
  }

  std::int32_t parse_primary() {
    const Token& tok = take();
    switch (tok.kind) {
      case Token::Kind::Number:
        return emit({.kind = ExprNode::Kind::Number, .value = tok.number});
      case Token::Kind::LParen: {
        const std::int32_t inner = parse_expr();
        expect_rparen(tok.pos);
        return inner;
      }
      case Token::Kind::Name:
        return parse_name(tok);
      case Token::Kind::End:
        throw ExprError(ExprErrorKind::Syntax, "unexpected end of expression", tok.pos);
      default:
        throw ExprError(ExprErrorKind::Syntax, "unexpected '" + std::string(tok.text) + "'",
                        tok.pos);
    }
  }

  std::int32_t parse_name(const Token& tok) {
    if (peek().kind == Token::Kind::LParen) {
      const auto it = std::find_if(kFunctions.begin(), kFunctions.end(),
                                   [&](const auto& f) { return f.first == tok.text; });
      if (it == kFunctions.end()) {
        throw ExprError(ExprErrorKind::UnknownFunction,
                        "unknown function '" + std::string(tok.text) + "'", tok.pos);
      }
      const std::size_t open = take().pos;
      const std::int32_t arg = parse_expr();
      expect_rparen(open);
      return emit({.kind = ExprNode::Kind::Call, .function = it->second, .lhs = arg});
    }
    const auto& vars = expr_.variables_;
    const auto it = std::find(vars.begin(), vars.end(), tok.text);
    if (it != vars.end()) {
      return emit({.kind = ExprNode::Kind::Variable,
                   .slot = static_cast<std::uint32_t>(it - vars.begin())});
    }
    if (tok.text == "pi") return emit({.kind = ExprNode::Kind::Pi});
    throw ExprError(ExprErrorKind::UnknownIdentifier,
                    "unknown identifier '" + std::string(tok.text) + "'", tok.pos);
  }

  void expect_rparen(std::size_t open_pos) {
    if (peek().kind != Token::Kind::RParen) {
      throw ExprError(ExprErrorKind::Syntax,
                      "missing ')' for '(' at offset " + std::to_string(open_pos), peek().pos);
    }
    take();
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  Expr expr_;
};

Expr Expr::parse(std::string_view source, std::vector<std::string> variables) {
  return ExprParser(source, std::move(variables)).run();
}

namespace {

double eval_node(const std::vector<ExprNode>& nodes, std::int32_t idx,
                 std::span<const double> values) {
  const ExprNode& n = nodes[static_cast<std::size_t>(idx)];
  switch (n.kind) {
    case ExprNode::Kind::Number:
      return n.value;
    case ExprNode::Kind::Variable:
      return values[n.slot];
    case ExprNode::Kind::Pi:
      return std::numbers::pi;
    case ExprNode::Kind::Negate:
      return -eval_node(nodes, n.lhs, values);
    case ExprNode::Kind::Add:
      return eval_node(nodes, n.lhs, values) + eval_node(nodes, n.rhs, values);
    case ExprNode::Kind::Sub:
      return eval_node(nodes, n.lhs, values) - eval_node(nodes, n.rhs, values);
    case ExprNode::Kind::Mul:
      return eval_node(nodes, n.lhs, values) * eval_node(nodes, n.rhs, values);
    case ExprNode::Kind::Div:
      return eval_node(nodes, n.lhs, values) / eval_node(nodes, n.rhs, values);
    case ExprNode::Kind::Pow:
      return std::pow(eval_node(nodes, n.lhs, values), eval_node(nodes, n.rhs, values));
    case ExprNode::Kind::Call: {
      const double a = eval_node(nodes, n.lhs, values);
      switch (n.function) {
        case ExprFunction::Sin: return std::sin(a);
        case ExprFunction::Cos: return std::cos(a);
        case ExprFunction::Tan: return std::tan(a);
        case ExprFunction::Exp: return std::exp(a);
        case ExprFunction::Sqrt: return std::sqrt(a);
        case ExprFunction::Abs: return std::abs(a);
      }
    }
  }
  return std::nan("");
}

void render(const std::vector<ExprNode>& nodes, const std::vector<std::string>& vars,
            std::int32_t idx, std::string& out) {
  const ExprNode& n = nodes[static_cast<std::size_t>(idx)];
  auto binary = [&](const char* op) {
    out += '(';
    render(nodes, vars, n.lhs, out);
    out += op;
    render(nodes, vars, n.rhs, out);
    out += ')';
  };
  switch (n.kind) {
    case ExprNode::Kind::Number: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      out += buf;
      break;
    }
    case ExprNode::Kind::Variable: out += vars[n.slot]; break;
    case ExprNode::Kind::Pi: out += "pi"; break;
    case ExprNode::Kind::Negate:
      out += "(-";
      render(nodes, vars, n.lhs, out);
      out += ')';
      break;
    case ExprNode::Kind::Add: binary(" + "); break;
    case ExprNode::Kind::Sub: binary(" - "); break;
    case ExprNode::Kind::Mul: binary(" * "); break;
    case ExprNode::Kind::Div: binary(" / "); break;
    case ExprNode::Kind::Pow: binary(" ^ "); break;
    case ExprNode::Kind::Call:
      out += function_name(n.function);
      out += '(';
      render(nodes, vars, n.lhs, out);
      out += ')';
      break;
  }
}

}  // namespace

double Expr::evaluate(std::span<const double> values) const {
  if (values.size() < variables_.size()) {
    throw ExprError(ExprErrorKind::UnboundVariable,
                    "expected " + std::to_string(variables_.size()) + " variable values, got " +
                        std::to_string(values.size()));
  }
  return eval_node(nodes_, static_cast<std::int32_t>(nodes_.size() - 1), values);
}

double Expr::evaluate(const std::map<std::string, double>& bindings) const {
  std::vector<double> values(variables_.size(), 0.0);
  for (std::uint32_t k = 0; k < variables_.size(); ++k) {
    const auto it = bindings.find(variables_[k]);
    if (it != bindings.end()) {
      values[k] = it->second;
    } else if (uses(k)) {
      throw ExprError(ExprErrorKind::UnboundVariable,
                      "variable '" + variables_[k] + "' is not bound");
    }
  }
  return evaluate(std::span<const double>(values));
}

bool Expr::uses(std::uint32_t slot) const {
  return std::any_of(nodes_.begin(), nodes_.end(), [slot](const ExprNode& n) {
    return n.kind == ExprNode::Kind::Variable && n.slot == slot;
  });
}

std::string Expr::to_string() const {
  std::string out;
  render(nodes_, variables_, static_cast<std::int32_t>(nodes_.size() - 1), out);
  return out;
}

}  // namespace piconsensus
