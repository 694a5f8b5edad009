#include "oca/reductions.hpp"

#include <algorithm>
#include <deque>
#include <functional>

namespace oca {

namespace {

std::vector<StateId> by_name(const CounterMachine& a, const std::set<StateId>& states) {
  std::vector<StateId> out(states.begin(), states.end());
  std::sort(out.begin(), out.end(), [&](StateId p, StateId q) { return a.state_name(p) < a.state_name(q); });
  return out;
}

// q is reachable from the initial state and lies on a cycle of the
// transition graph, ignoring the counter.
bool on_reachable_cycle(const CounterMachine& a, StateId q) {
  auto reach_from = [&](StateId s, bool strict) {
    std::vector<char> seen(a.num_states(), 0);
    std::deque<StateId> todo;
    if (strict) {
      for (auto t : a.outgoing(s))
        if (!seen[a.transitions()[t].to]++) todo.push_back(a.transitions()[t].to);
    } else {
      seen[s] = 1;
      todo.push_back(s);
    }
    while (!todo.empty()) {
      StateId u = todo.front();
      todo.pop_front();
      for (auto t : a.outgoing(u))
        if (!seen[a.transitions()[t].to]++) todo.push_back(a.transitions()[t].to);
    }
    return seen;
  };
  return reach_from(a.initial(), false)[q] && reach_from(q, true)[q];
}

} // namespace

LassoRun rotate_loop(const LassoRun& lasso, const std::function<bool(StateId)>& pred) {
  LassoRun out = lasso;
  auto& cs = out.run.configs;
  std::size_t len = cs.size() - 1 - out.loop_start;
  Value d = lasso.drift();
  for (std::size_t k = 0; k <= len; ++k) {
    if (pred(cs[out.loop_start].state)) return out;
    Configuration c = cs[out.loop_start + 1];
    c.value += d;
    out.run.steps.push_back(out.run.steps[out.loop_start]);
    cs.push_back(c);
    ++out.loop_start;
  }
  throw ExtractionError("loop never visits the requested states");
}

// ---- Büchi to reachability ----------------------------------------------

BuchiReduction buchi_to_reach(const CounterMachine& a, StateId q_f, std::optional<Value> rep_cap) {
  auto cls = classify(a);
  if (cls != MachineClass::OCA && cls != MachineClass::OCA_P) throw ClassError("buchi_to_reach needs an OCA(P)");
  if (q_f >= a.num_states()) throw ConfigError("accepting state out of range");
  BuchiReduction r;
  r.accepting = q_f;
  r.source_transitions = a.transitions().size();

  MachineBuilder mb;
  for (StateId q = 0; q < a.num_states(); ++q) mb.add_state(a.state_name(q), a.labels(q));
  mb.set_initial(a.initial());
  for (std::size_t t = 0; t < a.transitions().size(); ++t) {
    const auto& tr = a.transitions()[t];
    std::optional<Operation> op;
    if (std::holds_alternative<Update>(tr.op)) op = tr.op;
    else if (auto* p = std::get_if<ParamTest>(&tr.op); p && p->cmp == Cmp::Greater) op = Update{0};
    if (!op) continue;
    mb.add_transition(tr.from, *op, tr.to);
    r.repeat_origin.push_back(t);
  }
  r.repeat_machine = mb.build();
  r.rep_cap = rep_cap.value_or(default_rep_cap(r.repeat_machine));
  auto live = oca_rep_reach_all(r.repeat_machine, {q_f}, r.rep_cap);
  for (StateId t = 0; t < live.size(); ++t)
    if (live[t]) r.escape.insert(t);

  MachineBuilder b(a);
  for (std::size_t t = 0; t < a.transitions().size(); ++t) {
    r.edge.push_back(ReachEdge::Original);
    r.origin.push_back(t);
  }
  auto add = [&](StateId from, Operation op, StateId to, ReachEdge kind, std::size_t origin) {
    b.add_transition(from, op, to);
    r.edge.push_back(kind);
    r.origin.push_back(origin);
  };
  std::vector<ParamId> xs;
  for (ParamId x = 0; x < a.params().size(); ++x) xs.push_back(x);
  if (xs.empty()) {
    // The construction assumes at least one parameter.
    r.dummy = b.fresh_name("dummy");
    xs.push_back(b.add_param(*r.dummy));
  }
  r.y = b.fresh_name("y");
  ParamId y = b.add_param(r.y);
  std::vector<StateId> hat;
  for (StateId q = 0; q < a.num_states(); ++q) hat.push_back(b.add_state(b.fresh_name(a.state_name(q) + "_hat")));
  StateId s = b.add_state(b.fresh_name("s"));
  StateId s_hat = b.add_state(b.fresh_name("s_hat"));
  std::vector<StateId> chain;
  for (std::size_t i = 0; i < xs.size(); ++i) chain.push_back(b.add_state(b.fresh_name("t" + std::to_string(i + 1))));
  chain.push_back(s_hat);

  const std::size_t none = static_cast<std::size_t>(-1);
  add(q_f, ParamTest{Cmp::Equal, y}, s, ReachEdge::Store, none);
  for (std::size_t t : a.outgoing(q_f)) add(s, a.transitions()[t].op, hat[a.transitions()[t].to], ReachEdge::Enter, t);
  for (std::size_t t = 0; t < a.transitions().size(); ++t) {
    const auto& tr = a.transitions()[t];
    add(hat[tr.from], tr.op, hat[tr.to], ReachEdge::Hatted, t);
  }
  add(hat[q_f], ParamTest{Cmp::Equal, y}, s_hat, ReachEdge::Close, none);
  for (StateId t : r.escape) add(t, Update{0}, chain[0], ReachEdge::Escape, t);
  for (std::size_t i = 0; i < xs.size(); ++i) add(chain[i], ParamTest{Cmp::Greater, xs[i]}, chain[i + 1], ReachEdge::Above, none);

  r.machine = b.build();
  r.target = s_hat;
  return r;
}

LassoRun lasso_from_reach(const CounterMachine& a, const BuchiReduction& r, const Run& reach) {
  if (reach.configs.empty() || reach.configs.back().state != r.target) throw ExtractionError("run does not reach the target");
  LassoRun out;
  for (const auto& x : a.params()) {
    auto it = reach.gamma.find(x);
    if (it == reach.gamma.end()) throw ExtractionError("run lacks a value for '" + x + "'");
    out.run.gamma[x] = it->second;
  }
  std::size_t i = 0;
  out.run.configs.push_back(reach.configs[0]);
  while (i < reach.steps.size() && r.edge[reach.steps[i]] == ReachEdge::Original) {
    out.run.steps.push_back(reach.steps[i]);
    out.run.configs.push_back(reach.configs[i + 1]);
    ++i;
  }
  if (i == reach.steps.size()) throw ExtractionError("run never leaves the original copy");
  out.loop_start = i;
  if (r.edge[reach.steps[i]] == ReachEdge::Store) {
    // Exact repeat: the hatted detour returns to q_f with the stored value.
    for (++i; i < reach.steps.size() && r.edge[reach.steps[i]] != ReachEdge::Close; ++i) {
      std::size_t t = r.origin[reach.steps[i]];
      out.run.steps.push_back(t);
      out.run.configs.push_back({a.transitions()[t].to, reach.configs[i + 1].value});
    }
  } else if (r.edge[reach.steps[i]] == ReachEdge::Escape) {
    // Above every parameter: replay a test-free lasso of M shifted up.
    Configuration at = reach.configs[i];
    auto ml = oca_rep_lasso(r.repeat_machine, at.state, {r.accepting}, r.rep_cap);
    if (!ml) throw InternalError("escape state without a repeating run of M");
    for (std::size_t k = 0; k < ml->run.steps.size(); ++k) {
      out.run.steps.push_back(r.repeat_origin[ml->run.steps[k]]);
      Configuration c = ml->run.configs[k + 1];
      out.run.configs.push_back({c.state, c.value + at.value});
    }
    out.loop_start += ml->loop_start;
  } else {
    throw ExtractionError("unexpected transition after the original copy");
  }
  if (auto d = validate_lasso(a, out)) throw InternalError("rebuilt lasso invalid: " + d->reason);
  return out;
}

std::optional<LassoRun> solve_buchi(const CounterMachine& a, const std::set<StateId>& accepting, Value bound,
                                    std::optional<Value> rep_cap, std::optional<Value> counter_cap) {
  if (!is_unary(a)) throw ClassError("Büchi solving needs unary updates");
  CounterMachine m = a;
  ReachOptions opts;
  opts.counter_cap = counter_cap;
  if (has_constant_tests(a)) {
    auto f = fold_constants(a);
    m = f.machine;
    opts.pinned = f.pinned;
  }
  for (StateId q_f : by_name(a, accepting)) {
    if (q_f >= a.num_states()) throw ConfigError("accepting state out of range");
    if (!on_reachable_cycle(m, q_f)) continue;
    auto red = buchi_to_reach(m, q_f, rep_cap);
    auto res = ocap_reach(red.machine, red.target, bound, opts);
    if (!res) continue;
    auto lasso = lasso_from_reach(m, red, *res);
    ParamInstantiation g;
    for (const auto& x : a.params()) g[x] = lasso.run.gamma.at(x);
    lasso.run.gamma = g;
    if (auto d = validate_lasso(a, lasso)) throw InternalError("Büchi witness invalid: " + d->reason);
    return lasso;
  }
  return std::nullopt;
}

// ---- Flat freeze LTL to Büchi ---------------------------------------------

namespace {

// Subformulas of the renamed NNF formula, identified structurally.
class Closure {
public:
  explicit Closure(const Formula& root) { root_ = intern(root); }
  int root() const { return root_; }
  const Formula& at(int id) const { return nodes_[id]; }
  int id(const Formula& f) const { return ids_.at(f.get()); }
  const std::vector<int>& untils() const { return untils_; }

private:
  std::vector<Formula> nodes_;
  std::map<std::string, int> by_text_;
  std::unordered_map<const FormulaNode*, int> ids_;
  std::vector<int> untils_;
  int root_ = 0;

  int intern(const Formula& f) {
    if (f->lhs) intern(f->lhs);
    if (f->rhs) intern(f->rhs);
    std::string key = render(f);
    auto it = by_text_.find(key);
    int id;
    if (it != by_text_.end()) {
      id = it->second;
    } else {
      id = static_cast<int>(nodes_.size());
      nodes_.push_back(f);
      by_text_[key] = id;
      if (f->kind == FormulaKind::Until) untils_.push_back(id);
    }
    ids_[f.get()] = id;
    return id;
  }
};

// One way of meeting a set of obligations at a position.
struct Expansion {
  std::set<std::pair<std::string, Cmp>> tests; // register tests, freezes as "="
  std::set<int> next;
  auto operator<=>(const Expansion&) const = default;
};

class Tableau {
public:
  explicit Tableau(const Closure& c) : c_(c) {}

  // Expansions of `obligations` at a position labelled `labels` (restricted
  // to the formula's propositions).  Literals are decided on the spot.
  const std::vector<int>& expand(const std::set<int>& obligations, const std::set<std::string>& labels) {
    auto key = std::make_pair(obligations, labels);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    std::set<Expansion> found;
    Partial p;
    p.todo.assign(obligations.begin(), obligations.end());
    labels_ = &labels;
    run(std::move(p), found);
    std::vector<int> ids;
    for (const auto& e : found) {
      auto [pos, fresh] = node_id_.try_emplace(e, static_cast<int>(nodes_.size()));
      if (fresh) nodes_.push_back(e);
      ids.push_back(pos->second);
    }
    return cache_[key] = std::move(ids);
  }
  const Expansion& node(int id) const { return nodes_[id]; }
  std::size_t size() const { return nodes_.size(); }

private:
  struct Partial {
    std::vector<int> todo;
    std::set<int> done;
    Expansion e;
  };
  const Closure& c_;
  const std::set<std::string>* labels_ = nullptr;
  std::map<std::pair<std::set<int>, std::set<std::string>>, std::vector<int>> cache_;
  std::map<Expansion, int> node_id_;
  std::vector<Expansion> nodes_;

  static bool add_test(Expansion& e, const std::string& r, Cmp c) {
    for (Cmp other : {Cmp::Less, Cmp::Equal, Cmp::Greater})
      if (other != c && e.tests.count({r, other})) return false;
    e.tests.insert({r, c});
    return true;
  }

  // Satisfied by the labels alone, with nothing left for later positions.
  bool settled(const Formula& f) const {
    switch (f->kind) {
    case FormulaKind::True: return true;
    case FormulaKind::Prop: return labels_->count(f->name) > 0;
    case FormulaKind::Not: return labels_->count(f->lhs->name) == 0;
    case FormulaKind::And: return settled(f->lhs) && settled(f->rhs);
    case FormulaKind::Or: return settled(f->lhs) || settled(f->rhs);
    default: return false;
    }
  }

  void run(Partial p, std::set<Expansion>& out) {
    using K = FormulaKind;
    while (!p.todo.empty()) {
      int id = p.todo.back();
      p.todo.pop_back();
      if (!p.done.insert(id).second) continue;
      const Formula& f = c_.at(id);
      switch (f->kind) {
      case K::True: break;
      case K::False: return;
      case K::Prop:
        if (!labels_->count(f->name)) return;
        break;
      case K::Not:
        if (labels_->count(f->lhs->name)) return;
        break;
      case K::RegTest:
        if (!add_test(p.e, f->name, f->cmp)) return;
        break;
      case K::Freeze:
        if (!add_test(p.e, f->name, Cmp::Equal)) return;
        p.todo.push_back(c_.id(f->lhs));
        break;
      case K::And:
        p.todo.push_back(c_.id(f->lhs));
        p.todo.push_back(c_.id(f->rhs));
        break;
      case K::Next: p.e.next.insert(c_.id(f->lhs)); break;
      case K::Or:
        if (settled(f->lhs) || settled(f->rhs)) break;
        [[fallthrough]];
      case K::Until:
      case K::Release: {
        // A branch settled by the labels makes weaker demands than its
        // sibling, so the sibling is not explored.
        if (f->kind == K::Until && settled(f->rhs)) break;
        if (f->kind == K::Release && settled(f->lhs) && settled(f->rhs)) break;
        Partial q = p;
        if (f->kind == K::Or) {
          p.todo.push_back(c_.id(f->lhs));
          q.todo.push_back(c_.id(f->rhs));
        } else if (f->kind == K::Until) {
          p.todo.push_back(c_.id(f->rhs));
          q.todo.push_back(c_.id(f->lhs));
          q.e.next.insert(id);
        } else {
          p.todo.push_back(c_.id(f->rhs));
          p.todo.push_back(c_.id(f->lhs));
          q.todo.push_back(c_.id(f->rhs));
          q.e.next.insert(id);
        }
        run(std::move(q), out);
        break;
      }
      }
    }
    out.insert(std::move(p.e));
  }
};

} // namespace

Product flat_mc_to_buchi(const CounterMachine& a, const Formula& phi, std::size_t max_states) {
  if (classify(a) != MachineClass::OCA) throw ClassError("flat_mc_to_buchi needs a plain OCA");
  if (auto v = flatness_violation(phi)) throw ArgumentError("formula is not flat: " + v->reason + " in " + render(v->subformula));
  if (!is_sentence(phi)) throw ArgumentError("formula is not a sentence");

  Product p;
  p.formula = rename_registers(nnf(phi));
  Closure closure(p.formula);
  Tableau tableau(closure);
  const auto& untils = closure.untils();
  p.untils = untils.size();

  MachineBuilder b;
  std::map<std::string, ParamId> param;
  for (const auto& r : registers(p.formula)) {
    std::string name = "r" + r.substr(2); // r#3 -> r3
    p.param_of[r] = name;
    param[r] = b.add_param(name);
  }
  std::vector<std::string> names;
  auto fresh_state = [&](const std::string& name, std::optional<StateId> macro) {
    if (b.num_states() >= max_states) throw ArgumentError("product exceeds " + std::to_string(max_states) + " states");
    StateId s = b.add_state(name);
    p.macro_of.push_back(macro);
    names.push_back(name);
    return s;
  };
  auto add = [&](StateId from, Operation op, StateId to, std::optional<std::size_t> origin) {
    b.add_transition(from, op, to);
    p.step_of.push_back(origin);
  };

  StateId start = fresh_state("start", std::nullopt);
  b.set_initial(start);

  using Key = std::tuple<StateId, int, std::size_t>; // A state, tableau node, until counter
  std::map<Key, StateId> macro;
  std::deque<Key> todo;
  std::size_t counter = 0;
  auto get = [&](const Key& k) {
    auto it = macro.find(k);
    if (it != macro.end()) return it->second;
    StateId q = std::get<0>(k);
    StateId s = fresh_state("e" + std::to_string(counter++) + "_" + a.state_name(q), q);
    const Expansion& e = tableau.node(std::get<1>(k));
    std::size_t level = std::get<2>(k);
    bool fair = untils.empty() || (level == 0 && !e.next.count(untils[0]));
    if (fair) p.accepting.insert(s);
    macro[k] = s;
    todo.push_back(k);
    return s;
  };

  auto props = propositions(p.formula);
  auto visible = [&](StateId q) {
    std::set<std::string> out;
    for (const auto& l : a.labels(q))
      if (props.count(l)) out.insert(l);
    return out;
  };
  for (int n : tableau.expand({closure.root()}, visible(a.initial())))
    add(start, Update{0}, get({a.initial(), n, 0}), std::nullopt);

  while (!todo.empty()) {
    Key k = todo.front();
    todo.pop_front();
    auto [q, n, level] = k;
    StateId s = macro.at(k);
    Expansion e = tableau.node(n);
    // Register tests at this position, one state per test.
    StateId last = s;
    std::size_t j = 0;
    for (const auto& [r, cmp] : e.tests) {
      StateId c = fresh_state(names[s] + "_c" + std::to_string(j++), std::nullopt);
      add(last, ParamTest{cmp, param.at(r)}, c, std::nullopt);
      last = c;
    }
    std::size_t next_level = level;
    if (!untils.empty() && !e.next.count(untils[level])) next_level = (level + 1) % untils.size();
    for (std::size_t t : a.outgoing(q)) {
      const auto& tr = a.transitions()[t];
      for (int m : tableau.expand(e.next, visible(tr.to))) add(last, tr.op, get({tr.to, m, next_level}), t);
    }
  }
  p.machine = b.build();
  p.tableau_nodes = tableau.size();
  return p;
}

LassoRun project_product_lasso(const CounterMachine& a, const Product& p, const LassoRun& lasso) {
  auto rot = rotate_loop(lasso, [&](StateId s) { return p.macro_of.at(s).has_value(); });
  LassoRun out;
  const auto& cs = rot.run.configs;
  std::size_t first = 0;
  while (first < cs.size() && !p.macro_of[cs[first].state]) ++first;
  if (first == cs.size()) throw ExtractionError("product run never enters a macro state");
  out.run.configs.push_back({*p.macro_of[cs[first].state], cs[first].value});
  for (std::size_t i = first; i < rot.run.steps.size(); ++i) {
    if (i == rot.loop_start) out.loop_start = out.run.steps.size();
    auto origin = p.step_of.at(rot.run.steps[i]);
    if (!origin) continue;
    out.run.steps.push_back(*origin);
    out.run.configs.push_back({a.transitions()[*origin].to, cs[i + 1].value});
  }
  if (rot.loop_start < first) throw ExtractionError("loop starts before the first macro state");
  return out;
}

// ---- Succinct updates -------------------------------------------------------

std::size_t bits(Value z) {
  std::size_t n = 0;
  for (Value m = z < 0 ? -z : z; m > 0; m >>= 1) ++n;
  return n;
}

std::vector<bool> bit_vector(Value z) {
  std::vector<bool> out;
  for (Value m = z < 0 ? -z : z; m > 0; m >>= 1) out.push_back(m & 1);
  return out;
}

std::string delimiter_prop(Value z) { return z < 0 ? "#n" + std::to_string(-z) : "#" + std::to_string(z); }

namespace {

Formula any_of(const std::vector<std::string>& props) {
  Formula f;
  for (const auto& p : props) f = f ? disj(f, prop(p)) : prop(p);
  return f ? f : f_false();
}
Formula none_of(const std::vector<std::string>& props) {
  Formula f;
  for (const auto& p : props) f = f ? conj(f, neg(prop(p))) : neg(prop(p));
  return f ? f : f_true();
}
Formula nexts(std::size_t n, Formula f) {
  for (std::size_t i = 0; i < n; ++i) f = next(f);
  return f;
}
Formula all_of(const std::vector<Formula>& fs) {
  Formula f;
  for (const auto& g : fs) f = f ? conj(f, g) : g;
  return f ? f : f_true();
}

std::vector<std::string> lambda_of(const std::set<Value>& zs) {
  std::vector<std::string> out;
  if (zs.empty()) return out;
  for (Value z : zs) out.push_back(delimiter_prop(z));
  out.push_back(kBitZero);
  out.push_back(kBitOne);
  return out;
}

} // namespace

Formula counter_formula(const std::set<Value>& zs) {
  if (zs.empty()) return f_true();
  auto lambda = lambda_of(zs);
  Formula not_lambda = none_of(lambda);
  Formula one = prop(kBitOne), zero = prop(kBitZero);
  std::vector<Formula> init, fin, inc, exit;
  for (Value z : zs) {
    Formula d = prop(delimiter_prop(z));
    std::size_t n = bits(z);
    auto jump = [&](Formula f) { return nexts(n + 1, f); };
    Formula first = conj(not_lambda, next(d));
    Formula last = conj(d, next(not_lambda));
    Formula last_minus = conj(d, next(until(disj(zero, one), last)));
    Formula eqsuff = until(disj(conj(zero, jump(zero)), conj(one, jump(one))), d);

    init.push_back(always(implies(first, nexts(2, conj(one, next(until(zero, d)))))));
    std::vector<Formula> digits;
    auto bv = bit_vector(z);
    for (std::size_t i = 1; i <= n; ++i) digits.push_back(nexts(i, bv[i - 1] ? one : zero));
    fin.push_back(always(implies(last_minus, all_of(digits))));
    inc.push_back(always(implies(conj(conj(d, neg(last_minus)), neg(last)),
                                 next(until(conj(one, jump(zero)), conj(conj(zero, jump(one)), next(eqsuff)))))));
    exit.push_back(always(implies(first, eventually(last))));
  }
  return conj(conj(conj(all_of(init), all_of(fin)), all_of(inc)), all_of(exit));
}

Formula translate_formula(const Formula& phi, const std::vector<std::string>& lambda) {
  if (lambda.empty()) return phi;
  Formula in_lambda = any_of(lambda), not_lambda = none_of(lambda);
  std::function<Formula(const Formula&)> t = [&](const Formula& f) -> Formula {
    using K = FormulaKind;
    switch (f->kind) {
    case K::True:
    case K::False:
    case K::Prop:
    case K::RegTest: return f;
    case K::Not:
      if (f->lhs->kind != K::Prop) throw ArgumentError("translate_formula needs negation normal form");
      return f;
    case K::Freeze: return freeze(f->name, t(f->lhs));
    case K::And: return conj(t(f->lhs), t(f->rhs));
    case K::Or: return disj(t(f->lhs), t(f->rhs));
    case K::Next: return next(until(in_lambda, conj(not_lambda, t(f->lhs))));
    case K::Until: return until(implies(not_lambda, t(f->lhs)), conj(not_lambda, t(f->rhs)));
    case K::Release: return release(conj(not_lambda, t(f->lhs)), implies(not_lambda, t(f->rhs)));
    }
    return f;
  };
  return t(phi);
}

UnaryReduction succinct_to_unary(const CounterMachine& a, const Formula& phi) {
  auto cls = classify(a);
  if (cls != MachineClass::OCA && cls != MachineClass::OCA_S) throw ClassError("succinct_to_unary needs an OCA(S)");
  if (auto v = flatness_violation(phi)) throw ArgumentError("formula is not flat: " + v->reason);
  if (!is_sentence(phi)) throw ArgumentError("formula is not a sentence");

  UnaryReduction u;
  for (const auto& tr : a.transitions())
    if (auto* up = std::get_if<Update>(&tr.op); up && (up->delta > 1 || up->delta < -1)) u.zs.insert(up->delta);
  u.lambda = lambda_of(u.zs);
  if (u.zs.empty()) {
    u.machine = a;
    u.formula = phi;
    for (StateId q = 0; q < a.num_states(); ++q) u.state_origin.push_back(q);
    for (std::size_t t = 0; t < a.transitions().size(); ++t) u.step_origin.push_back(t);
    return u;
  }
  auto used = propositions(phi);
  for (StateId q = 0; q < a.num_states(); ++q) used.insert(a.labels(q).begin(), a.labels(q).end());
  for (const auto& l : u.lambda)
    if (used.count(l)) throw ArgumentError("proposition '" + l + "' is reserved for counting gadgets");

  MachineBuilder b;
  for (StateId q = 0; q < a.num_states(); ++q) {
    b.add_state(a.state_name(q), a.labels(q));
    u.state_origin.push_back(q);
  }
  b.set_initial(a.initial());
  std::size_t count = 0;
  auto add = [&](StateId from, Operation op, StateId to, std::size_t origin) {
    b.add_transition(from, op, to);
    u.step_origin.push_back(origin);
    return count++;
  };
  auto state = [&](const std::string& name, const std::string& label) {
    StateId s = b.add_state(b.fresh_name(name), {label});
    u.state_origin.push_back(std::nullopt);
    return s;
  };
  for (std::size_t t = 0; t < a.transitions().size(); ++t) {
    const auto& tr = a.transitions()[t];
    auto* up = std::get_if<Update>(&tr.op);
    if (!up || (up->delta >= -1 && up->delta <= 1)) {
      add(tr.from, tr.op, tr.to, t);
      continue;
    }
    Gadget g;
    g.z = up->delta;
    std::size_t n = bits(g.z);
    std::string base = "g" + std::to_string(t) + "_";
    std::string delim = delimiter_prop(g.z);
    StateId d1 = state(base + "d1", delim);
    std::vector<std::array<StateId, 2>> bit(n);
    for (std::size_t i = 0; i < n; ++i) {
      bit[i][1] = state(base + "b" + std::to_string(i + 1), kBitOne);
      bit[i][0] = state(base + "c" + std::to_string(i + 1), kBitZero);
    }
    StateId d2 = state(base + "d2", delim);
    g.states.push_back(d1);
    for (const auto& pair : bit) {
      g.states.push_back(pair[1]);
      g.states.push_back(pair[0]);
    }
    g.states.push_back(d2);

    g.enter = add(tr.from, Update{0}, d1, t);
    for (int v : {0, 1}) g.first[v] = add(d1, Update{0}, bit[0][v], t);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      std::array<std::size_t, 4> step{};
      for (int v : {0, 1})
        for (int w : {0, 1}) step[2 * v + w] = add(bit[i][v], Update{0}, bit[i + 1][w], t);
      g.inner.push_back(step);
    }
    for (int v : {0, 1}) g.exit[v] = add(bit[n - 1][v], Update{g.z > 0 ? 1 : -1}, d2, t);
    g.leave = add(d2, Update{0}, tr.to, t);
    for (int v : {0, 1}) g.again[v] = add(d2, Update{0}, bit[0][v], t);
    u.gadgets[t] = g;
  }
  u.machine = b.build();
  u.formula = conj(translate_formula(nnf(phi), u.lambda), counter_formula(u.zs));
  return u;
}

std::vector<std::size_t> gadget_path(const UnaryReduction& u, std::size_t t) {
  auto it = u.gadgets.find(t);
  if (it == u.gadgets.end()) throw ArgumentError("transition " + std::to_string(t) + " has no gadget");
  const Gadget& g = it->second;
  std::size_t n = bits(g.z);
  Value total = g.z < 0 ? -g.z : g.z;
  std::vector<std::size_t> path{g.enter};
  for (Value k = 1; k <= total; ++k) {
    auto bv = bit_vector(k);
    bv.resize(n, false);
    path.push_back(k == 1 ? g.first[bv[0]] : g.again[bv[0]]);
    for (std::size_t i = 0; i + 1 < n; ++i) path.push_back(g.inner[i][2 * bv[i] + bv[i + 1]]);
    path.push_back(g.exit[bv[n - 1]]);
  }
  path.push_back(g.leave);
  return path;
}

std::vector<std::string> counting_sequence(Value z) {
  if (z >= -1 && z <= 1) throw ArgumentError("counting sequences need |z| >= 2");
  MachineBuilder b;
  b.add_state("q");
  b.add_state("q2");
  b.update("q", z, "q2");
  auto u = succinct_to_unary(b.build(), f_true());
  std::vector<std::string> out;
  std::string digits;
  auto path = gadget_path(u, 0);
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const auto& labels = u.machine.labels(u.machine.transitions()[path[k]].to);
    if (labels.count(kBitOne) || labels.count(kBitZero)) {
      digits += labels.count(kBitOne) ? '1' : '0';
      continue;
    }
    if (!digits.empty()) out.push_back(std::exchange(digits, {}));
    out.push_back(*labels.begin());
  }
  return out;
}

LassoRun expand_lasso(const UnaryReduction& u, const LassoRun& lasso) {
  LassoRun out;
  out.run.gamma = lasso.run.gamma;
  const auto& cs = lasso.run.configs;
  out.run.configs.push_back(cs.front());
  std::vector<Value> g;
  for (std::size_t i = 0; i < lasso.run.steps.size(); ++i) {
    if (i == lasso.loop_start) out.loop_start = out.run.steps.size();
    std::size_t t = lasso.run.steps[i];
    std::vector<std::size_t> path;
    if (u.gadgets.count(t)) path = gadget_path(u, t);
    else
      for (std::size_t k = 0; k < u.step_origin.size(); ++k)
        if (u.step_origin[k] == t) path = {k};
    for (std::size_t k : path) {
      const auto& tr = u.machine.transitions()[k];
      auto v = fire(tr.op, out.run.configs.back().value, g);
      if (!v) throw ArgumentError("lasso is not a run of the machine");
      out.run.steps.push_back(k);
      out.run.configs.push_back({tr.to, *v});
    }
  }
  return out;
}

LassoRun project_unary_lasso(const CounterMachine& a, const UnaryReduction& u, const LassoRun& lasso) {
  auto rot = rotate_loop(lasso, [&](StateId s) { return u.state_origin.at(s).has_value(); });
  LassoRun out;
  out.run.gamma = rot.run.gamma;
  const auto& cs = rot.run.configs;
  out.run.configs.push_back({*u.state_origin.at(cs[0].state), cs[0].value});
  for (std::size_t i = 0; i < rot.run.steps.size(); ++i) {
    if (i == rot.loop_start) out.loop_start = out.run.steps.size();
    auto q = u.state_origin.at(cs[i + 1].state);
    if (!q) continue;
    std::size_t t = u.step_origin.at(rot.run.steps[i]);
    out.run.steps.push_back(t);
    out.run.configs.push_back({*q, cs[i + 1].value});
  }
  if (auto d = validate_lasso(a, out)) throw ExtractionError("projected lasso invalid: " + d->reason);
  return out;
}

} // namespace oca
