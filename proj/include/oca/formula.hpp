#pragma once

// Freeze LTL: syntax tree, concrete syntax, negation normal form and the
// syntactic fragment checks.

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "oca/machine.hpp"

namespace oca {

enum class FormulaKind { True, False, Prop, RegTest, Not, And, Or, Next, Until, Release, Freeze };

struct FormulaNode;
using Formula = std::shared_ptr<const FormulaNode>;

struct FormulaNode {
  FormulaKind kind;
  std::string name; // proposition or register
  Cmp cmp = Cmp::Equal;
  Formula lhs, rhs; // unary operators use lhs
};

Formula f_true();
Formula f_false();
Formula prop(std::string p);
Formula regtest(Cmp c, std::string r);
Formula neg(Formula a);
Formula conj(Formula a, Formula b);
Formula disj(Formula a, Formula b);
Formula next(Formula a);
Formula until(Formula a, Formula b);
Formula release(Formula a, Formula b);
Formula freeze(std::string r, Formula a);
Formula eventually(Formula a); // true U a
Formula always(Formula a);     // !(true U !a)
Formula implies(Formula a, Formula b);

bool equal(const Formula& a, const Formula& b);
std::size_t formula_size(const Formula& f);

// Grammar, loosest first:
//   until  := impl (('U' | 'R') until)?
//   impl   := or ('->' impl)?
//   or     := and ('|' and)*
//   and    := unary ('&' unary)*
//   unary  := '!' unary | '@' reg '.' unary | ('X' | 'F' | 'G') unary | atom
//   atom   := 'true' | 'false' | ident | '[' ('<'|'='|'>') reg ']' | '(' until ')'
Formula parse_formula(std::string_view text);
std::string render(const Formula& f);

Formula nnf(const Formula& f);

std::set<std::string> propositions(const Formula& f);
std::set<std::string> free_registers(const Formula& f);
std::set<std::string> registers(const Formula& f); // bound or tested

struct FlatnessViolation {
  Formula subformula; // the offending U or R occurrence
  bool odd;           // under an odd number of negations
  std::string reason;
};
std::optional<FlatnessViolation> flatness_violation(const Formula& f);
bool is_flat(const Formula& f);
bool is_coflat(const Formula& f);
bool is_sentence(const Formula& f);

// Fresh register per freeze occurrence, named r#1, r#2, ... in preorder.
// ArgumentError on a free register test.
Formula rename_registers(const Formula& f);

} // namespace oca
