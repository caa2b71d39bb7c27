// Copyright 2026 The Nexus Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nexus/toy.hpp"

#include <cctype>
#include <charconv>
#include <map>
#include <utility>

namespace nexus::toy {

std::string strip_comments(std::string_view text) {
  std::string out(text);
  std::size_t i = 0;
  int block_depth = 0;
  bool in_line = false;
  while (i < out.size()) {
    if (block_depth > 0) {
      if (out.compare(i, 2, "/-") == 0) {
        ++block_depth;
        out[i] = ' ';
        out[i + 1] = ' ';
        i += 2;
      } else if (out.compare(i, 2, "-/") == 0) {
        --block_depth;
        out[i] = ' ';
        out[i + 1] = ' ';
        i += 2;
      } else {
        if (out[i] != '\n') out[i] = ' ';
        ++i;
      }
    } else if (in_line) {
      if (out[i] == '\n') {
        in_line = false;
      } else {
        out[i] = ' ';
      }
      ++i;
    } else if (out.compare(i, 2, "/-") == 0) {
      block_depth = 1;
      out[i] = ' ';
      out[i + 1] = ' ';
      i += 2;
    } else if (out.compare(i, 2, "--") == 0) {
      in_line = true;
      out[i] = ' ';
      out[i + 1] = ' ';
      i += 2;
    } else {
      ++i;
    }
  }
  if (block_depth > 0) {
    // Report at the end of the text; the opener's position is long gone.
    int line = 1;
    for (char c : out) {
      if (c == '\n') ++line;
    }
    throw ParseFailure{line, 1, "unterminated block comment"};
  }
  return out;
}

namespace {

// --------------------------------------------------------------------------
// Tokenizer
// --------------------------------------------------------------------------

struct Token {
  enum class Kind { kIdent, kInt, kSymbol, kEnd };
  Kind kind = Kind::kEnd;
  std::string text;
  int line = 1;
  int col = 1;
};

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++col;
      ++i;
      continue;
    }
    Token token;
    token.line = line;
    token.col = col;
    if (is_ident_start(c)) {
      std::size_t end = i;
      while (end < text.size() && is_ident_char(text[end])) ++end;
      token.kind = Token::Kind::kIdent;
      token.text = std::string(text.substr(i, end - i));
      col += static_cast<int>(end - i);
      i = end;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t end = i;
      while (end < text.size() &&
             std::isdigit(static_cast<unsigned char>(text[end]))) {
        ++end;
      }
      token.kind = Token::Kind::kInt;
      token.text = std::string(text.substr(i, end - i));
      col += static_cast<int>(end - i);
      i = end;
    } else if (c == ':' && i + 1 < text.size() && text[i + 1] == '=') {
      token.kind = Token::Kind::kSymbol;
      token.text = ":=";
      col += 2;
      i += 2;
    } else if (c == ':' || c == '=' || c == '+' || c == '-' || c == '*' ||
               c == '(' || c == ')') {
      token.kind = Token::Kind::kSymbol;
      token.text = std::string(1, c);
      ++col;
      ++i;
    } else if (text.compare(i, 3, "⊢") == 0) {
      // The turnstile appears in goal renderings; treat it as a symbol.
      token.kind = Token::Kind::kSymbol;
      token.text = "⊢";
      ++col;
      i += 3;
    } else {
      throw ParseFailure{line, col,
                         std::string("unexpected character '") + c + "'"};
    }
    tokens.push_back(std::move(token));
  }
  Token end;
  end.kind = Token::Kind::kEnd;
  end.line = line;
  end.col = col;
  tokens.push_back(std::move(end));
  return tokens;
}

// --------------------------------------------------------------------------
// Parser
// --------------------------------------------------------------------------

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  const Token& peek() const { return tokens_[pos_]; }

  bool at_end() const { return peek().kind == Token::Kind::kEnd; }

  Token take() { return tokens_[pos_++]; }

  bool accept_symbol(std::string_view symbol) {
    if (peek().kind == Token::Kind::kSymbol && peek().text == symbol) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect_symbol(std::string_view symbol) {
    if (!accept_symbol(symbol)) {
      fail("expected '" + std::string(symbol) + "'");
    }
  }

  std::string expect_ident(std::string_view what) {
    if (peek().kind != Token::Kind::kIdent) {
      fail("expected " + std::string(what));
    }
    return take().text;
  }

  [[noreturn]] void fail(std::string message) const {
    const Token& token = peek();
    if (token.kind != Token::Kind::kEnd) {
      message += ", found '" + token.text + "'";
    } else {
      message += ", found end of input";
    }
    throw ParseFailure{token.line, token.col, std::move(message)};
  }

  ExprPtr parse_expr() {
    ExprPtr left = parse_term();
    for (;;) {
      if (accept_symbol("+")) {
        left = binary(Expr::Op::kAdd, left, parse_term());
      } else if (accept_symbol("-")) {
        left = binary(Expr::Op::kSub, left, parse_term());
      } else {
        return left;
      }
    }
  }

 private:
  ExprPtr parse_term() {
    ExprPtr left = parse_factor();
    while (accept_symbol("*")) {
      left = binary(Expr::Op::kMul, left, parse_factor());
    }
    return left;
  }

  ExprPtr parse_factor() {
    if (accept_symbol("-")) {
      auto node = std::make_shared<Expr>();
      node->op = Expr::Op::kNeg;
      node->lhs = parse_factor();
      return node;
    }
    if (accept_symbol("(")) {
      ExprPtr inner = parse_expr();
      expect_symbol(")");
      return inner;
    }
    if (peek().kind == Token::Kind::kInt) {
      Token token = take();
      auto node = std::make_shared<Expr>();
      node->op = Expr::Op::kLiteral;
      std::int64_t value = 0;
      const auto result = std::from_chars(
          token.text.data(), token.text.data() + token.text.size(), value);
      if (result.ec != std::errc() ||
          result.ptr != token.text.data() + token.text.size()) {
        throw ParseFailure{token.line, token.col,
                           "integer literal out of range"};
      }
      node->value = value;
      return node;
    }
    fail("expected an expression");
  }

  static ExprPtr binary(Expr::Op op, ExprPtr lhs, ExprPtr rhs) {
    auto node = std::make_shared<Expr>();
    node->op = op;
    node->lhs = std::move(lhs);
    node->rhs = std::move(rhs);
    return node;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

int precedence(Expr::Op op) {
  switch (op) {
    case Expr::Op::kAdd:
    case Expr::Op::kSub:
      return 1;
    case Expr::Op::kMul:
      return 2;
    case Expr::Op::kNeg:
      return 3;
    case Expr::Op::kLiteral:
      return 4;
  }
  return 4;
}

void render_into(const Expr& expr, std::string& out) {
  switch (expr.op) {
    case Expr::Op::kLiteral:
      out += std::to_string(expr.value);
      return;
    case Expr::Op::kNeg: {
      std::string child;
      render_into(*expr.lhs, child);
      // Parenthesize binary children, and anything opening with '-' so the
      // output never contains "--" (which would lex as a comment).
      const bool parens =
          precedence(expr.lhs->op) < precedence(Expr::Op::kNeg) ||
          (!child.empty() && child.front() == '-');
      out += '-';
      if (parens) {
        out += '(';
        out += child;
        out += ')';
      } else {
        out += child;
      }
      return;
    }
    case Expr::Op::kAdd:
    case Expr::Op::kSub:
    case Expr::Op::kMul: {
      const int prec = precedence(expr.op);
      std::string left;
      render_into(*expr.lhs, left);
      if (precedence(expr.lhs->op) < prec) {
        out += '(';
        out += left;
        out += ')';
      } else {
        out += left;
      }
      out += expr.op == Expr::Op::kAdd ? '+'
             : expr.op == Expr::Op::kSub ? '-'
                                         : '*';
      std::string right;
      render_into(*expr.rhs, right);
      // Right children of equal precedence need parentheses to preserve
      // left associativity; a '-' right after a '-' would lex as a comment.
      const bool parens =
          precedence(expr.rhs->op) <= prec ||
          (expr.op == Expr::Op::kSub && !right.empty() &&
           right.front() == '-');
      if (parens) {
        out += '(';
        out += right;
        out += ')';
      } else {
        out += right;
      }
      return;
    }
  }
}

std::optional<std::int64_t> checked_neg(std::int64_t a) {
  if (a == INT64_MIN) return std::nullopt;
  return -a;
}

std::string format_location(int line, int col) {
  return std::to_string(line) + ":" + std::to_string(col);
}

}  // namespace

bool expr_equal(const Expr& a, const Expr& b) {
  if (a.op != b.op) return false;
  switch (a.op) {
    case Expr::Op::kLiteral:
      return a.value == b.value;
    case Expr::Op::kNeg:
      return expr_equal(*a.lhs, *b.lhs);
    case Expr::Op::kAdd:
    case Expr::Op::kSub:
    case Expr::Op::kMul:
      return expr_equal(*a.lhs, *b.lhs) && expr_equal(*a.rhs, *b.rhs);
  }
  return false;
}

std::string render_expr(const Expr& expr) {
  std::string out;
  render_into(expr, out);
  return out;
}

int op_count(const Expr& expr) {
  switch (expr.op) {
    case Expr::Op::kLiteral:
      return 0;
    case Expr::Op::kNeg:
      return 1 + op_count(*expr.lhs);
    case Expr::Op::kAdd:
    case Expr::Op::kSub:
    case Expr::Op::kMul:
      return 1 + op_count(*expr.lhs) + op_count(*expr.rhs);
  }
  return 0;
}

std::optional<std::int64_t> eval_expr(const Expr& expr) {
  switch (expr.op) {
    case Expr::Op::kLiteral:
      return expr.value;
    case Expr::Op::kNeg: {
      const auto a = eval_expr(*expr.lhs);
      if (!a) return std::nullopt;
      return checked_neg(*a);
    }
    case Expr::Op::kAdd:
    case Expr::Op::kSub:
    case Expr::Op::kMul: {
      const auto a = eval_expr(*expr.lhs);
      const auto b = eval_expr(*expr.rhs);
      if (!a || !b) return std::nullopt;
      std::int64_t result = 0;
      bool overflow = false;
      switch (expr.op) {
        case Expr::Op::kAdd:
          overflow = __builtin_add_overflow(*a, *b, &result);
          break;
        case Expr::Op::kSub:
          overflow = __builtin_sub_overflow(*a, *b, &result);
          break;
        default:
          overflow = __builtin_mul_overflow(*a, *b, &result);
          break;
      }
      if (overflow) return std::nullopt;
      return result;
    }
  }
  return std::nullopt;
}

ParsedFile parse_file(std::string_view text) {
  Parser parser(tokenize(strip_comments(text)));
  ParsedFile file;
  while (!parser.at_end()) {
    const Token& keyword = parser.peek();
    if (keyword.kind != Token::Kind::kIdent || keyword.text != "lemma") {
      parser.fail("expected 'lemma'");
    }
    Lemma lemma;
    lemma.line = keyword.line;
    lemma.col = keyword.col;
    parser.take();
    lemma.name = parser.expect_ident("lemma name");
    parser.expect_symbol(":");
    lemma.lhs = parser.parse_expr();
    parser.expect_symbol("=");
    lemma.rhs = parser.parse_expr();
    parser.expect_symbol(":=");
    const std::string tactic = parser.expect_ident("a tactic");
    if (tactic == "eval") {
      lemma.tactic = Lemma::Tactic::kEval;
    } else if (tactic == "sorry") {
      lemma.tactic = Lemma::Tactic::kSorry;
    } else if (tactic == "by_lemma") {
      lemma.tactic = Lemma::Tactic::kByLemma;
      lemma.ref = parser.expect_ident("a lemma name after by_lemma");
    } else {
      throw ParseFailure{keyword.line, keyword.col,
                         "unknown tactic '" + tactic + "'"};
    }
    file.lemmas.push_back(std::move(lemma));
  }
  return file;
}

std::pair<ExprPtr, ExprPtr> parse_goal(std::string_view goal_text) {
  Parser parser(tokenize(strip_comments(goal_text)));
  parser.accept_symbol("⊢");
  ExprPtr lhs = parser.parse_expr();
  parser.expect_symbol("=");
  ExprPtr rhs = parser.parse_expr();
  if (!parser.at_end()) {
    parser.fail("unexpected trailing input in goal");
  }
  return {std::move(lhs), std::move(rhs)};
}

std::string render_goal(const Expr& lhs, const Expr& rhs) {
  return "⊢ " + render_expr(lhs) + " = " + render_expr(rhs);
}

Diagnostics toy_check(const std::string& sketch_text) {
  Diagnostics diagnostics;
  ParsedFile file;
  try {
    file = parse_file(sketch_text);
  } catch (const ParseFailure& failure) {
    diagnostics.compiles = false;
    diagnostics.errors.push_back(
        CheckIssue{format_location(failure.line, failure.col),
                   failure.message});
    return diagnostics;
  }

  // name -> (lemma, closed). Later lemmas may cite earlier closed ones.
  std::map<std::string, std::pair<const Lemma*, bool>> environment;
  for (const Lemma& lemma : file.lemmas) {
    const std::string at = format_location(lemma.line, lemma.col);
    if (environment.count(lemma.name) > 0) {
      diagnostics.errors.push_back(
          CheckIssue{at, "duplicate lemma name '" + lemma.name + "'"});
      continue;
    }
    bool closed = false;
    switch (lemma.tactic) {
      case Lemma::Tactic::kEval: {
        const auto left = eval_expr(*lemma.lhs);
        const auto right = eval_expr(*lemma.rhs);
        if (!left || !right) {
          diagnostics.errors.push_back(
              CheckIssue{at, "lemma '" + lemma.name +
                                 "': evaluation overflow"});
        } else if (*left != *right) {
          diagnostics.errors.push_back(CheckIssue{
              at, "lemma '" + lemma.name + "': eval failed, left is " +
                      std::to_string(*left) + " but right is " +
                      std::to_string(*right)});
        } else {
          closed = true;
        }
        break;
      }
      case Lemma::Tactic::kSorry:
        diagnostics.open_goals.push_back(
            render_goal(*lemma.lhs, *lemma.rhs));
        break;
      case Lemma::Tactic::kByLemma: {
        const auto it = environment.find(lemma.ref);
        if (it == environment.end()) {
          diagnostics.errors.push_back(
              CheckIssue{at, "lemma '" + lemma.name +
                                 "': by_lemma cites unknown lemma '" +
                                 lemma.ref + "'"});
        } else if (!it->second.second) {
          diagnostics.errors.push_back(
              CheckIssue{at, "lemma '" + lemma.name + "': by_lemma cites '" +
                                 lemma.ref + "' which is not closed"});
        } else if (!expr_equal(*it->second.first->lhs, *lemma.lhs) ||
                   !expr_equal(*it->second.first->rhs, *lemma.rhs)) {
          diagnostics.errors.push_back(
              CheckIssue{at, "lemma '" + lemma.name + "': statement of '" +
                                 lemma.ref + "' does not match"});
        } else {
          closed = true;
        }
        break;
      }
    }
    environment.emplace(lemma.name, std::make_pair(&lemma, closed));
  }
  diagnostics.compiles = diagnostics.errors.empty();
  return diagnostics;
}

ProverOutcome SimProver::focused_prove(const std::string& goal_text,
                                       const ProverBudget& budget,
                                       std::uint64_t /*seed*/) {
  ProverOutcome outcome;
  ExprPtr lhs;
  ExprPtr rhs;
  try {
    std::tie(lhs, rhs) = parse_goal(goal_text);
  } catch (const ParseFailure& failure) {
    outcome.verdict = Verdict::kFailed;
    outcome.feedback = "unparseable goal at " +
                       format_location(failure.line, failure.col) + ": " +
                       failure.message;
    return outcome;
  }

  // Each operator node is one reduction step; goals needing more steps than
  // the simulation budget are beyond this prover.
  const int steps = op_count(*lhs) + op_count(*rhs);
  if (steps > budget.simulations) {
    outcome.verdict = Verdict::kFailed;
    outcome.feedback = "budget exhausted: goal needs " +
                       std::to_string(steps) + " reductions, budget is " +
                       std::to_string(budget.simulations);
    return outcome;
  }

  const auto left = eval_expr(*lhs);
  const auto right = eval_expr(*rhs);
  if (!left || !right) {
    outcome.verdict = Verdict::kFailed;
    outcome.feedback = "evaluation overflow";
    return outcome;
  }
  if (*left == *right) {
    outcome.verdict = Verdict::kProved;
    outcome.script = "eval";
  } else {
    outcome.verdict = Verdict::kDisproved;
    outcome.script = "eval";
    outcome.feedback = "left evaluates to " + std::to_string(*left) +
                       ", right to " + std::to_string(*right);
  }
  return outcome;
}

}  // namespace nexus::toy
