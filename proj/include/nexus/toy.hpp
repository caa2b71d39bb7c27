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

#ifndef NEXUS_TOY_HPP_
#define NEXUS_TOY_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nexus/backends.hpp"

// A deliberately tiny proof language that still exercises the full pipeline:
// open goals, placeholder holes, decomposition into helper lemmas, and
// disproof of false statements.
//
// Grammar (whitespace-insensitive; "--" line comments and nested "/- -/"
// block comments are ignored):
//
//   file    := lemma*
//   lemma   := "lemma" name ":" expr "=" expr ":=" tactic
//   tactic  := "eval" | "sorry" | "by_lemma" name
//   expr    := term (("+" | "-") term)*
//   term    := factor ("*" factor)*
//   factor  := "-" factor | integer | "(" expr ")"
//
// `eval` closes the goal iff both sides evaluate to the same integer under
// checked 64-bit arithmetic; `by_lemma` closes it iff the named earlier
// lemma is closed and states the structurally identical equality; `sorry`
// leaves the goal open.

namespace nexus::toy {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Op { kLiteral, kNeg, kAdd, kSub, kMul };
  Op op = Op::kLiteral;
  std::int64_t value = 0;  // kLiteral only
  ExprPtr lhs;             // operand of kNeg; left side of binary ops
  ExprPtr rhs;             // right side of binary ops
};

bool expr_equal(const Expr& a, const Expr& b);

// Canonical compact rendering: no spaces inside expressions, parentheses
// only where required so that parsing the output rebuilds the same tree.
std::string render_expr(const Expr& expr);

// Number of operator nodes (unary and binary) in the tree.
int op_count(const Expr& expr);

// Checked 64-bit evaluation; nullopt on overflow.
std::optional<std::int64_t> eval_expr(const Expr& expr);

struct Lemma {
  enum class Tactic { kEval, kSorry, kByLemma };
  std::string name;
  ExprPtr lhs;
  ExprPtr rhs;
  Tactic tactic = Tactic::kSorry;
  std::string ref;  // by_lemma target
  int line = 0;     // position of the "lemma" keyword
  int col = 0;
};

struct ParsedFile {
  std::vector<Lemma> lemmas;
};

// Thrown internally by the parser; toy_check converts it to Diagnostics.
struct ParseFailure {
  int line = 0;
  int col = 0;
  std::string message;
};

// Parses a whole file. Throws ParseFailure on the first syntax error.
ParsedFile parse_file(std::string_view text);

// Replaces comment bytes ("--" to end of line, nested "/- -/" blocks) with
// spaces, keeping newlines so positions stay aligned. Throws ParseFailure
// on an unterminated block comment.
std::string strip_comments(std::string_view text);

// Parses a goal rendering "⊢ <expr> = <expr>" (the turnstile is optional).
// Returns the two sides, or a ParseFailure via exception.
std::pair<ExprPtr, ExprPtr> parse_goal(std::string_view goal_text);

// Renders "⊢ <lhs> = <rhs>" in canonical form.
std::string render_goal(const Expr& lhs, const Expr& rhs);

// Full checker semantics over a source file. Never throws: every problem
// is reported through Diagnostics.
Diagnostics toy_check(const std::string& sketch_text);

class ToyChecker : public Checker {
 public:
  Diagnostics check(const std::string& sketch_text) override {
    return toy_check(sketch_text);
  }
};

// Decides toy goals by evaluation. The simulation budget bounds the number
// of expression-reduction steps (one per operator node); larger goals fail
// with "budget exhausted". Deterministic; the seed is accepted for
// interface compatibility only.
class SimProver : public Prover {
 public:
  ProverOutcome focused_prove(const std::string& goal_text,
                              const ProverBudget& budget,
                              std::uint64_t seed) override;
};

}  // namespace nexus::toy

#endif  // NEXUS_TOY_HPP_
