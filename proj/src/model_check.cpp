#include "oca/model_check.hpp"

#include <algorithm>
#include <deque>

namespace oca {

namespace {

bool on_cycle_from_initial(const CounterMachine& a, StateId q, const std::vector<char>& from_initial) {
  if (!from_initial[q]) return false;
  std::vector<char> seen(a.num_states(), 0);
  std::deque<StateId> todo{q};
  while (!todo.empty()) {
    StateId u = todo.front();
    todo.pop_front();
    for (auto t : a.outgoing(u)) {
      StateId v = a.transitions()[t].to;
      if (v == q) return true;
      if (!seen[v]++) todo.push_back(v);
    }
  }
  return false;
}

std::vector<char> reachable(const CounterMachine& a) {
  std::vector<char> seen(a.num_states(), 0);
  std::deque<StateId> todo{a.initial()};
  seen[a.initial()] = 1;
  while (!todo.empty()) {
    StateId u = todo.front();
    todo.pop_front();
    for (auto t : a.outgoing(u))
      if (!seen[a.transitions()[t].to]++) todo.push_back(a.transitions()[t].to);
  }
  return seen;
}

} // namespace

std::optional<McWitness> model_check(const CounterMachine& a, const Formula& phi, Value bound, const McOptions& opts,
                                     McStats* stats) {
  if (auto v = flatness_violation(phi))
    throw ArgumentError("formula is not flat: " + v->reason + " in " + render(v->subformula));
  if (!is_sentence(phi)) throw ArgumentError("formula is not a sentence");
  auto cls = classify(a);
  if (cls != MachineClass::OCA && cls != MachineClass::OCA_S)
    throw ClassError("model checking needs an OCA or OCA(S), got " + to_string(cls));
  if (bound < 0) throw ArgumentError("negative bound");

  UnaryReduction u = succinct_to_unary(a, phi);
  Product p = flat_mc_to_buchi(u.machine, u.formula, opts.max_product_states);
  if (stats) stats->product_states = p.machine.num_states();

  std::vector<StateId> order(p.accepting.begin(), p.accepting.end());
  std::sort(order.begin(), order.end(),
            [&](StateId x, StateId y) { return p.machine.state_name(x) < p.machine.state_name(y); });
  auto from_initial = reachable(p.machine);
  ReachOptions ro;
  ro.counter_cap = opts.counter_cap.value_or(bound);
  for (StateId q_f : order) {
    if (!on_cycle_from_initial(p.machine, q_f, from_initial)) continue;
    if (stats) ++stats->candidates;
    auto red = buchi_to_reach(p.machine, q_f, opts.rep_cap.value_or(bound));
    auto res = ocap_reach(red.machine, red.target, bound, ro);
    if (!res) continue;
    LassoRun product_lasso = lasso_from_reach(p.machine, red, *res);
    LassoRun unary_lasso = project_product_lasso(u.machine, p, product_lasso);
    if (auto d = validate_lasso(u.machine, unary_lasso)) throw InternalError("projected lasso invalid: " + d->reason);
    LassoRun lasso = project_unary_lasso(a, u, unary_lasso);
    McWitness w{product_lasso.run.gamma, lasso, data_word(a, lasso)};
    if (!holds(w.word, phi)) throw InternalError("witness lasso does not satisfy the formula");
    return w;
  }
  return std::nullopt;
}

} // namespace oca
