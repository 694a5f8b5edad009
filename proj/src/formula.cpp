#include "oca/formula.hpp"

#include <cctype>
#include <functional>
#include <map>

namespace oca {

namespace {

Formula make(FormulaKind k, std::string name = {}, Cmp c = Cmp::Equal, Formula l = nullptr, Formula r = nullptr) {
  return std::make_shared<const FormulaNode>(FormulaNode{k, std::move(name), c, std::move(l), std::move(r)});
}

} // namespace

Formula f_true() { return make(FormulaKind::True); }
Formula f_false() { return make(FormulaKind::False); }
Formula prop(std::string p) { return make(FormulaKind::Prop, std::move(p)); }
Formula regtest(Cmp c, std::string r) { return make(FormulaKind::RegTest, std::move(r), c); }
Formula neg(Formula a) { return make(FormulaKind::Not, {}, Cmp::Equal, std::move(a)); }
Formula conj(Formula a, Formula b) { return make(FormulaKind::And, {}, Cmp::Equal, std::move(a), std::move(b)); }
Formula disj(Formula a, Formula b) { return make(FormulaKind::Or, {}, Cmp::Equal, std::move(a), std::move(b)); }
Formula next(Formula a) { return make(FormulaKind::Next, {}, Cmp::Equal, std::move(a)); }
Formula until(Formula a, Formula b) { return make(FormulaKind::Until, {}, Cmp::Equal, std::move(a), std::move(b)); }
Formula release(Formula a, Formula b) { return make(FormulaKind::Release, {}, Cmp::Equal, std::move(a), std::move(b)); }
Formula freeze(std::string r, Formula a) { return make(FormulaKind::Freeze, std::move(r), Cmp::Equal, std::move(a)); }
Formula eventually(Formula a) { return until(f_true(), std::move(a)); }
Formula always(Formula a) { return neg(eventually(neg(std::move(a)))); }
Formula implies(Formula a, Formula b) { return disj(neg(std::move(a)), std::move(b)); }

bool equal(const Formula& a, const Formula& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind || a->name != b->name) return false;
  if (a->kind == FormulaKind::RegTest && a->cmp != b->cmp) return false;
  return equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
}

std::size_t formula_size(const Formula& f) {
  if (!f) return 0;
  return 1 + formula_size(f->lhs) + formula_size(f->rhs);
}

namespace {

class Parser {
public:
  explicit Parser(std::string_view text) : s_(text) {}

  Formula run() {
    Formula f = until_level();
    skip();
    if (i_ != s_.size()) fail("unexpected input");
    return f;
  }

private:
  std::string_view s_;
  std::size_t i_ = 0;

  [[noreturn]] void fail(const std::string& what) const { throw SyntaxError(what, i_); }

  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '#'; }

  bool accept(std::string_view tok) {
    skip();
    if (s_.substr(i_, tok.size()) != tok) return false;
    // Single-letter keywords must not be the start of an identifier.
    if (ident_char(tok.back()) && i_ + tok.size() < s_.size() && ident_char(s_[i_ + tok.size()])) return false;
    i_ += tok.size();
    return true;
  }
  void expect(std::string_view tok) {
    if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
  }

  std::string ident() {
    skip();
    std::size_t start = i_;
    while (i_ < s_.size() && ident_char(s_[i_])) ++i_;
    if (start == i_) fail("expected identifier");
    return std::string(s_.substr(start, i_ - start));
  }

  static bool keyword(const std::string& w) {
    return w == "X" || w == "F" || w == "G" || w == "U" || w == "R" || w == "true" || w == "false";
  }

  Formula until_level() {
    Formula l = impl_level();
    if (accept("U")) return until(l, until_level());
    if (accept("R")) return release(l, until_level());
    return l;
  }
  Formula impl_level() {
    Formula l = or_level();
    if (accept("->")) return implies(l, impl_level());
    return l;
  }
  Formula or_level() {
    Formula l = and_level();
    while (accept("|")) l = disj(l, and_level());
    return l;
  }
  Formula and_level() {
    Formula l = unary();
    while (accept("&")) l = conj(l, unary());
    return l;
  }
  Formula unary() {
    if (accept("!")) return neg(unary());
    if (accept("@")) {
      std::string r = ident();
      expect(".");
      return freeze(r, unary());
    }
    if (accept("X")) return next(unary());
    if (accept("F")) return eventually(unary());
    if (accept("G")) return always(unary());
    return atom();
  }
  Formula atom() {
    if (accept("(")) {
      Formula f = until_level();
      expect(")");
      return f;
    }
    if (accept("[")) {
      skip();
      Cmp c;
      if (accept("<")) c = Cmp::Less;
      else if (accept("=")) c = Cmp::Equal;
      else if (accept(">")) c = Cmp::Greater;
      else fail("expected comparison");
      std::string r = ident();
      expect("]");
      return regtest(c, r);
    }
    skip();
    std::size_t at = i_;
    if (i_ >= s_.size()) fail("unexpected end of formula");
    std::string w = ident();
    if (w == "true") return f_true();
    if (w == "false") return f_false();
    if (keyword(w)) {
      i_ = at;
      fail("unexpected keyword '" + w + "'");
    }
    return prop(w);
  }
};

} // namespace

Formula parse_formula(std::string_view text) { return Parser(text).run(); }

std::string render(const Formula& f) {
  switch (f->kind) {
  case FormulaKind::True: return "true";
  case FormulaKind::False: return "false";
  case FormulaKind::Prop: return f->name;
  case FormulaKind::RegTest: return std::string("[") + cmp_symbol(f->cmp) + f->name + "]";
  case FormulaKind::Not: return "!" + render(f->lhs);
  case FormulaKind::Next: return "X " + render(f->lhs);
  case FormulaKind::Freeze: return "@" + f->name + ". " + render(f->lhs);
  case FormulaKind::And: return "(" + render(f->lhs) + " & " + render(f->rhs) + ")";
  case FormulaKind::Or: return "(" + render(f->lhs) + " | " + render(f->rhs) + ")";
  case FormulaKind::Until: return "(" + render(f->lhs) + " U " + render(f->rhs) + ")";
  case FormulaKind::Release: return "(" + render(f->lhs) + " R " + render(f->rhs) + ")";
  }
  return "?";
}

namespace {

Formula push(const Formula& f, bool negated) {
  using K = FormulaKind;
  switch (f->kind) {
  case K::True: return negated ? f_false() : f;
  case K::False: return negated ? f_true() : f;
  case K::Prop: return negated ? neg(f) : f;
  case K::RegTest:
    if (!negated) return f;
    switch (f->cmp) {
    case Cmp::Equal: return disj(regtest(Cmp::Less, f->name), regtest(Cmp::Greater, f->name));
    case Cmp::Less: return disj(regtest(Cmp::Equal, f->name), regtest(Cmp::Greater, f->name));
    case Cmp::Greater: return disj(regtest(Cmp::Equal, f->name), regtest(Cmp::Less, f->name));
    }
    return f;
  case K::Not: return push(f->lhs, !negated);
  case K::And:
    return negated ? disj(push(f->lhs, true), push(f->rhs, true)) : conj(push(f->lhs, false), push(f->rhs, false));
  case K::Or:
    return negated ? conj(push(f->lhs, true), push(f->rhs, true)) : disj(push(f->lhs, false), push(f->rhs, false));
  case K::Next: return next(push(f->lhs, negated));
  case K::Until:
    return negated ? release(push(f->lhs, true), push(f->rhs, true)) : until(push(f->lhs, false), push(f->rhs, false));
  case K::Release:
    return negated ? until(push(f->lhs, true), push(f->rhs, true)) : release(push(f->lhs, false), push(f->rhs, false));
  case K::Freeze: return freeze(f->name, push(f->lhs, negated));
  }
  return f;
}

bool has_freeze(const Formula& f) {
  if (!f) return false;
  return f->kind == FormulaKind::Freeze || has_freeze(f->lhs) || has_freeze(f->rhs);
}

void walk(const Formula& f, const std::function<void(const Formula&)>& visit) {
  if (!f) return;
  visit(f);
  walk(f->lhs, visit);
  walk(f->rhs, visit);
}

void free_regs(const Formula& f, std::set<std::string>& bound, std::set<std::string>& out) {
  if (!f) return;
  if (f->kind == FormulaKind::RegTest && !bound.count(f->name)) out.insert(f->name);
  if (f->kind == FormulaKind::Freeze) {
    bool fresh = bound.insert(f->name).second;
    free_regs(f->lhs, bound, out);
    if (fresh) bound.erase(f->name);
    return;
  }
  free_regs(f->lhs, bound, out);
  free_regs(f->rhs, bound, out);
}

std::optional<FlatnessViolation> violation(const Formula& f, bool odd) {
  using K = FormulaKind;
  if (!f) return std::nullopt;
  if (f->kind == K::Until || f->kind == K::Release) {
    // For U the constrained side is the left one under even polarity; R
    // mirrors it.
    bool left_constrained = (f->kind == K::Until) != odd;
    const Formula& side = left_constrained ? f->lhs : f->rhs;
    if (has_freeze(side))
      return FlatnessViolation{f, odd,
                               std::string("freeze in the ") + (left_constrained ? "left" : "right") + " argument of " +
                                   (f->kind == K::Until ? "U" : "R") + " under " + (odd ? "odd" : "even") +
                                   " polarity"};
  }
  bool flip = f->kind == K::Not;
  if (auto v = violation(f->lhs, odd != flip)) return v;
  return violation(f->rhs, odd);
}

} // namespace

Formula nnf(const Formula& f) { return push(f, false); }

std::set<std::string> propositions(const Formula& f) {
  std::set<std::string> out;
  walk(f, [&](const Formula& g) {
    if (g->kind == FormulaKind::Prop) out.insert(g->name);
  });
  return out;
}

std::set<std::string> free_registers(const Formula& f) {
  std::set<std::string> bound, out;
  free_regs(f, bound, out);
  return out;
}

std::set<std::string> registers(const Formula& f) {
  std::set<std::string> out;
  walk(f, [&](const Formula& g) {
    if (g->kind == FormulaKind::RegTest || g->kind == FormulaKind::Freeze) out.insert(g->name);
  });
  return out;
}

std::optional<FlatnessViolation> flatness_violation(const Formula& f) { return violation(f, false); }
bool is_flat(const Formula& f) { return !flatness_violation(f); }
bool is_coflat(const Formula& f) { return is_flat(neg(f)); }
bool is_sentence(const Formula& f) { return free_registers(f).empty(); }

Formula rename_registers(const Formula& f) {
  std::size_t counter = 0;
  std::function<Formula(const Formula&, const std::map<std::string, std::string>&)> go =
      [&](const Formula& g, const std::map<std::string, std::string>& scope) -> Formula {
    using K = FormulaKind;
    switch (g->kind) {
    case K::RegTest: {
      auto it = scope.find(g->name);
      if (it == scope.end()) throw ArgumentError("register '" + g->name + "' is not bound by a freeze");
      return regtest(g->cmp, it->second);
    }
    case K::Freeze: {
      auto inner = scope;
      std::string fresh = "r#" + std::to_string(++counter);
      inner[g->name] = fresh;
      return freeze(fresh, go(g->lhs, inner));
    }
    case K::Not: return neg(go(g->lhs, scope));
    case K::Next: return next(go(g->lhs, scope));
    case K::And:
    case K::Or:
    case K::Until:
    case K::Release: {
      Formula l = go(g->lhs, scope);
      Formula r = go(g->rhs, scope);
      return make(g->kind, {}, Cmp::Equal, l, r);
    }
    default: return g;
    }
  };
  return go(f, {});
}

} // namespace oca
