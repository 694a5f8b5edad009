#include "oca/a2a.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace oca {

std::size_t Pbf::size() const {
  switch (kind) {
  case Kind::And:
  case Kind::Or: return args[0].size() + args[1].size() + 1;
  default: return 1;
  }
}

bool pbf_eval(const Pbf& beta, const std::set<Atom>& chosen) {
  switch (beta.kind) {
  case Pbf::Kind::True: return true;
  case Pbf::Kind::False: return false;
  case Pbf::Kind::Atom: return chosen.count({beta.state, beta.move}) > 0;
  case Pbf::Kind::And: return pbf_eval(beta.args[0], chosen) && pbf_eval(beta.args[1], chosen);
  case Pbf::Kind::Or: return pbf_eval(beta.args[0], chosen) || pbf_eval(beta.args[1], chosen);
  }
  return false;
}

std::size_t A2A::size() const {
  std::size_t n = states.size() + alphabet.size();
  for (const auto& t : transitions) n += t.formula.size();
  return n;
}

std::optional<StateId> A2A::find_state(std::string_view name) const {
  auto it = std::find(states.begin(), states.end(), name);
  if (it == states.end()) return std::nullopt;
  return static_cast<StateId>(it - states.begin());
}

ParameterWord::ParameterWord(std::vector<std::string> params, std::vector<Letter> prefix)
    : params_(std::move(params)), prefix_(std::move(prefix)) {
  if (prefix_.empty() || prefix_[0] != kBox) throw FormatError("parameter word must start with the delimiter");
  std::vector<int> count(params_.size(), 0);
  for (Letter l : prefix_) {
    if (l > params_.size()) throw FormatError("letter out of range");
    if (l != kBox) ++count[l - 1];
  }
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (count[i] != 1) throw FormatError("parameter '" + params_[i] + "' must occur exactly once");
}

ParameterWord ParameterWord::parse(std::vector<std::string> params, std::string_view text) {
  std::istringstream in{std::string(text)};
  std::vector<Letter> prefix;
  std::string tok;
  while (in >> tok) {
    if (tok == "#") {
      prefix.push_back(kBox);
      continue;
    }
    auto it = std::find(params.begin(), params.end(), tok);
    if (it == params.end()) throw FormatError("unknown letter '" + tok + "'");
    prefix.push_back(static_cast<Letter>(it - params.begin()) + 1);
  }
  return ParameterWord(std::move(params), std::move(prefix));
}

Letter ParameterWord::at(Value position) const {
  if (position < 0) throw ArgumentError("negative position");
  return static_cast<std::size_t>(position) < prefix_.size() ? prefix_[position] : kBox;
}

Value ParameterWord::position_of(Value v) const {
  Value boxes = 0;
  for (std::size_t i = 0; i < prefix_.size(); ++i)
    if (prefix_[i] == kBox && boxes++ == v) return static_cast<Value>(i);
  return static_cast<Value>(prefix_.size()) + (v - boxes);
}

std::string ParameterWord::render() const {
  std::string out;
  for (Letter l : prefix_) {
    if (!out.empty()) out += ' ';
    out += l == kBox ? "#" : params_[l - 1];
  }
  return out;
}

ParameterWord encode_gamma(const ParamInstantiation& gamma, const std::vector<std::string>& order, Value padding) {
  Value top = 0;
  for (const auto& x : order) {
    auto it = gamma.find(x);
    if (it == gamma.end()) throw ConfigError("no value for parameter '" + x + "'");
    if (it->second < 0) throw ConfigError("negative value for parameter '" + x + "'");
    top = std::max(top, it->second);
  }
  if (padding < 0) throw ArgumentError("negative padding");
  std::vector<Letter> prefix;
  for (Value k = 0; k <= top; ++k) {
    prefix.push_back(kBox);
    for (std::size_t i = 0; i < order.size(); ++i)
      if (gamma.at(order[i]) == k) prefix.push_back(i + 1);
  }
  for (Value k = 0; k < padding; ++k) prefix.push_back(kBox);
  return ParameterWord(order, std::move(prefix));
}

ParamInstantiation decode(const ParameterWord& w) {
  ParamInstantiation out;
  Value boxes = 0;
  for (Letter l : w.prefix()) {
    if (l == kBox) ++boxes;
    else out[w.params()[l - 1]] = boxes - 1;
  }
  return out;
}

SimulationAutomaton build_a2a(const CounterMachine& a, StateId target) {
  auto cls = classify(a);
  if (cls != MachineClass::OCA && cls != MachineClass::OCA_P) throw ClassError("build_a2a needs an OCA(P)");
  if (target >= a.num_states()) throw ConfigError("target state out of range");

  SimulationAutomaton t{{}, a, target, 0, {}, {}, {}, {}, {}, {}, {}, {}, 0, 0, {}, {}};
  A2A& m = t.automaton;
  const std::size_t nq = a.num_states(), nx = a.params().size();
  m.alphabet.push_back("#");
  for (const auto& x : a.params()) m.alphabet.push_back(x);
  auto state = [&](std::string name) {
    m.states.push_back(std::move(name));
    return m.states.size() - 1;
  };
  for (StateId q = 0; q < nq; ++q) t.sim.push_back(state(a.state_name(q)));
  t.init = state("<init>");
  m.initial = t.init;
  for (StateId q = 0; q < nq; ++q) t.right.push_back(state("right(" + a.state_name(q) + ")"));
  for (StateId q = 0; q < nq; ++q) t.left.push_back(state("left(" + a.state_name(q) + ")"));
  std::vector<char> needs_past(nx, 0);
  for (const auto& tr : a.transitions())
    if (auto* p = std::get_if<ParamTest>(&tr.op); p && p->cmp == Cmp::Greater) needs_past[p->param] = 1;
  for (ParamId x = 0; x < nx; ++x) {
    const auto& n = a.params()[x];
    t.present.push_back(state("present(" + n + ")"));
    t.search.push_back(state("search(" + n + ")"));
    t.search_next.push_back(state("search'(" + n + ")"));
    t.seen.push_back(state("seen(" + n + ")"));
    t.past.push_back(needs_past[x] ? state("past(" + n + ")") : kNoState);
    m.accepting.insert(t.seen.back());
  }

  auto add = [&](StateId from, std::optional<Letter> test, Pbf f) {
    m.transitions.push_back({from, test, std::move(f)});
    return m.transitions.size() - 1;
  };
  // Deterministic helper move, added once.
  auto helper = [&](StateId from, Letter l, Pbf f) {
    if (t.scan.count({from, l})) return;
    t.scan[{from, l}] = add(from, l, std::move(f));
  };
  const std::size_t sigma = nx + 1;

  {
    Pbf spawn = Pbf::atom(t.sim[a.initial()], 0);
    for (ParamId x = 0; x < nx; ++x) spawn = Pbf::conj(std::move(spawn), Pbf::atom(t.search[x], 1));
    t.init_transition = add(t.init, kBox, std::move(spawn));
  }
  for (ParamId x = 0; x < nx; ++x) {
    for (Letter y = 0; y < sigma; ++y)
      helper(t.search[x], y, y == x + 1 ? Pbf::atom(t.seen[x], 1) : Pbf::atom(t.search[x], 1));
    for (Letter y = 0; y < sigma; ++y)
      if (y != x + 1) helper(t.seen[x], y, Pbf::atom(t.seen[x], 1));
  }

  for (const auto& tr : a.transitions()) {
    StateId q = t.sim[tr.from], q2 = t.sim[tr.to];
    if (auto* u = std::get_if<Update>(&tr.op)) {
      if (u->delta == 0) {
        t.step_transition.push_back(add(q, kBox, Pbf::atom(q2, 0)));
        continue;
      }
      bool up = u->delta > 0;
      StateId shuttle = up ? t.right[tr.to] : t.left[tr.to];
      int dir = up ? 1 : -1;
      t.step_transition.push_back(add(q, kBox, Pbf::atom(shuttle, dir)));
      for (Letter y = 1; y < sigma; ++y) helper(shuttle, y, Pbf::atom(shuttle, dir));
      helper(shuttle, kBox, Pbf::atom(q2, 0));
      continue;
    }
    if (is_zero_test(tr.op)) {
      t.step_transition.push_back(add(q, std::nullopt, Pbf::atom(q2, 0)));
      continue;
    }
    const auto& p = std::get<ParamTest>(tr.op);
    const ParamId x = p.param;
    switch (p.cmp) {
    case Cmp::Equal:
      t.step_transition.push_back(add(q, kBox, Pbf::conj(Pbf::atom(q2, 0), Pbf::atom(t.present[x], 1))));
      helper(t.present[x], x + 1, Pbf::top());
      for (Letter y = 1; y < sigma; ++y)
        if (y != x + 1) helper(t.present[x], y, Pbf::atom(t.present[x], 1));
      break;
    case Cmp::Less:
      t.step_transition.push_back(add(q, kBox, Pbf::conj(Pbf::atom(q2, 0), Pbf::atom(t.search_next[x], 1))));
      for (Letter y = 1; y < sigma; ++y)
        if (y != x + 1) helper(t.search_next[x], y, Pbf::atom(t.search_next[x], 1));
      helper(t.search_next[x], kBox, Pbf::atom(t.search[x], 1));
      break;
    case Cmp::Greater:
      t.step_transition.push_back(add(q, kBox, Pbf::conj(Pbf::atom(q2, 0), Pbf::atom(t.past[x], -1))));
      helper(t.past[x], x + 1, Pbf::top());
      for (Letter y = 0; y < sigma; ++y)
        if (y != x + 1) helper(t.past[x], y, Pbf::atom(t.past[x], -1));
      break;
    }
  }
  t.accept_transition = add(t.sim[target], kBox, Pbf::top());
  return t;
}

namespace {

void collect_atoms(const Pbf& b, std::vector<Atom>& out) {
  if (b.kind == Pbf::Kind::Atom) out.push_back({b.state, b.move});
  for (const auto& c : b.args) collect_atoms(c, out);
}

bool has_drift_loop(const A2A& t, StateId s) {
  return std::any_of(t.transitions.begin(), t.transitions.end(), [&](const A2ATransition& tr) {
    return tr.from == s && tr.test == kBox && tr.formula == Pbf::atom(s, 1);
  });
}

} // namespace

std::optional<Diagnostic> validate_run_tree(const A2A& t, const ParameterWord& w, const RunTree& tree) {
  const auto& nodes = tree.nodes;
  if (nodes.empty()) return Diagnostic{0, "empty tree"};
  if (nodes[0].state != t.initial || nodes[0].position != 0) return Diagnostic{0, "root is not (initial, 0)"};
  std::vector<int> parents(nodes.size(), 0);
  const Value plen = static_cast<Value>(w.prefix().size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.state >= t.states.size()) return Diagnostic{i, "state out of range"};
    if (n.position < 0) return Diagnostic{i, "negative position"};
    for (std::size_t c : n.children) {
      if (c <= i || c >= nodes.size()) return Diagnostic{i, "child index out of order"};
      ++parents[c];
    }
    if (n.drift) {
      if (!n.children.empty()) return Diagnostic{i, "drift node has children"};
      if (!t.accepting.count(n.state)) return Diagnostic{i, "drift node in a non-accepting state"};
      if (n.position < plen) return Diagnostic{i, "drift node inside the prefix"};
      if (!has_drift_loop(t, n.state)) return Diagnostic{i, "drift node without a rightward delimiter loop"};
      continue;
    }
    if (!n.transition || *n.transition >= t.transitions.size()) return Diagnostic{i, "no valid transition chosen"};
    const auto& tr = t.transitions[*n.transition];
    if (tr.from != n.state) return Diagnostic{i, "transition does not leave the node's state"};
    if (!tr.test) {
      if (n.position != 0) return Diagnostic{i, "first? used at position " + std::to_string(n.position)};
    } else if (w.at(n.position) != *tr.test) {
      return Diagnostic{i, "letter at position " + std::to_string(n.position) + " does not match the test"};
    }
    std::set<Atom> chosen;
    for (std::size_t c : n.children) {
      Value off = nodes[c].position - n.position;
      if (off < -1 || off > 1) return Diagnostic{c, "child moves more than one position"};
      chosen.insert({nodes[c].state, static_cast<int>(off)});
    }
    if (!pbf_eval(tr.formula, chosen)) return Diagnostic{i, "children do not satisfy the transition formula"};
  }
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (parents[i] != 1) return Diagnostic{i, "node is not attached exactly once"};
  return std::nullopt;
}

RunTree construct_accepting_tree(const SimulationAutomaton& t, const Run& witness) {
  const CounterMachine& a = t.machine;
  if (auto d = validate_run(a, witness)) throw ArgumentError("witness invalid: " + d->reason);
  if (witness.configs.front() != Configuration{a.initial(), 0}) throw ArgumentError("witness does not start at (initial, 0)");
  if (witness.configs.back().state != t.target) throw ArgumentError("witness does not end at the target");
  ParameterWord w = encode_gamma(witness.gamma, a.params());
  const Value plen = static_cast<Value>(w.prefix().size());

  RunTree tree;
  auto node = [&](StateId s, Value pos, std::optional<std::size_t> tr) {
    tree.nodes.push_back({s, pos, tr, {}, false});
    return tree.nodes.size() - 1;
  };
  auto link = [&](std::size_t parent, std::size_t child) { tree.nodes[parent].children.push_back(child); };
  auto helper_of = [&](StateId s, Value pos) { return t.scan.at({s, w.at(pos)}); };

  // seen(x) from pos onwards: scan right until beyond the prefix.
  auto seen_chain = [&](std::size_t parent, ParamId x, Value pos) {
    while (true) {
      if (pos >= plen) {
        std::size_t d = node(t.seen[x], pos, std::nullopt);
        tree.nodes[d].drift = true;
        link(parent, d);
        return;
      }
      std::size_t n = node(t.seen[x], pos, helper_of(t.seen[x], pos));
      link(parent, n);
      parent = n;
      ++pos;
    }
  };
  auto search_chain = [&](std::size_t parent, ParamId x, Value pos) {
    while (true) {
      std::size_t n = node(t.search[x], pos, helper_of(t.search[x], pos));
      link(parent, n);
      if (w.at(pos) == x + 1) {
        seen_chain(n, x, pos + 1);
        return;
      }
      parent = n;
      ++pos;
    }
  };
  // Chain of one helper state moving by `dir` until `stop` holds; returns
  // the last node and its position.
  auto walk = [&](std::size_t parent, StateId s, Value pos, int dir, Letter stop) {
    while (true) {
      std::size_t n = node(s, pos, helper_of(s, pos));
      link(parent, n);
      if (w.at(pos) == stop) return std::make_pair(n, pos);
      parent = n;
      pos += dir;
    }
  };

  std::size_t root = node(t.init, 0, t.init_transition);
  std::size_t cur = node(t.sim[a.initial()], 0, std::nullopt);
  link(root, cur);
  for (ParamId x = 0; x < a.params().size(); ++x) search_chain(root, x, 1);

  for (std::size_t i = 0; i < witness.steps.size(); ++i) {
    const auto& tr = a.transitions()[witness.steps[i]];
    Value pos = w.position_of(witness.configs[i].value);
    Value next_pos = w.position_of(witness.configs[i + 1].value);
    tree.nodes[cur].transition = t.step_transition[witness.steps[i]];
    StateId q2 = t.sim[tr.to];
    std::size_t next;
    if (auto* u = std::get_if<Update>(&tr.op); u && u->delta != 0) {
      bool up = u->delta > 0;
      auto [last, at] = walk(cur, up ? t.right[tr.to] : t.left[tr.to], pos + (up ? 1 : -1), up ? 1 : -1, kBox);
      next = node(q2, at, std::nullopt);
      link(last, next);
    } else {
      next = node(q2, next_pos, std::nullopt);
      link(cur, next);
      if (auto* p = std::get_if<ParamTest>(&tr.op)) {
        ParamId x = p->param;
        if (p->cmp == Cmp::Equal) {
          walk(cur, t.present[x], pos + 1, 1, x + 1);
        } else if (p->cmp == Cmp::Greater) {
          walk(cur, t.past[x], pos - 1, -1, x + 1);
        } else {
          auto [last, at] = walk(cur, t.search_next[x], pos + 1, 1, kBox);
          search_chain(last, x, at + 1);
        }
      }
    }
    cur = next;
  }
  tree.nodes[cur].transition = t.accept_transition;
  return tree;
}

Run extract_run(const SimulationAutomaton& t, const RunTree& tree, const ParameterWord& w) {
  const CounterMachine& a = t.machine;
  if (tree.nodes.empty()) throw ExtractionError("empty tree");
  std::map<std::size_t, std::size_t> simulated;
  for (std::size_t i = 0; i < t.step_transition.size(); ++i) simulated[t.step_transition[i]] = i;
  auto child_in = [&](std::size_t u, const std::vector<StateId>& family, StateId want) -> std::optional<std::size_t> {
    for (std::size_t c : tree.nodes[u].children)
      if (tree.nodes[c].state == family[want]) return c;
    return std::nullopt;
  };

  const auto& root = tree.nodes[0];
  if (root.state != t.init || root.transition != t.init_transition) throw ExtractionError("root is not the spawn");
  auto first = child_in(0, t.sim, a.initial());
  if (!first) throw ExtractionError("no main branch below the root");

  Run run;
  run.gamma = decode(w);
  run.configs.push_back({a.initial(), 0});
  std::size_t u = *first;
  while (true) {
    const auto& n = tree.nodes[u];
    Configuration c = run.configs.back();
    if (n.position != w.position_of(c.value)) throw ExtractionError("main branch leaves the encoding of its value");
    if (!n.transition) throw ExtractionError("main branch ends without a transition");
    if (*n.transition == t.accept_transition) break;
    auto it = simulated.find(*n.transition);
    if (it == simulated.end()) throw ExtractionError("main branch uses a helper transition");
    const auto& tr = a.transitions()[it->second];
    Value v = c.value;
    std::optional<std::size_t> next;
    if (auto* up = std::get_if<Update>(&tr.op); up && up->delta != 0) {
      const auto& family = up->delta > 0 ? t.right : t.left;
      auto s = child_in(u, family, tr.to);
      while (s && !child_in(*s, t.sim, tr.to)) s = child_in(*s, family, tr.to);
      if (!s) throw ExtractionError("shuttle does not reach the next delimiter");
      next = child_in(*s, t.sim, tr.to);
      v += up->delta;
    } else {
      next = child_in(u, t.sim, tr.to);
    }
    if (!next) throw ExtractionError("main branch is cut");
    run.steps.push_back(it->second);
    run.configs.push_back({tr.to, v});
    u = *next;
  }
  if (auto d = validate_run(a, run)) throw ExtractionError("extracted run invalid: " + d->reason);
  if (run.configs.back().state != t.target) throw ExtractionError("extracted run misses the target");
  return run;
}

bool membership(const A2A& t, const std::vector<Letter>& prefix) {
  const std::size_t ns = t.states.size();
  const std::size_t np = prefix.size() + 1; // positions 0 .. |prefix|
  auto letter = [&](std::size_t p) { return p < prefix.size() ? prefix[p] : kBox; };
  std::vector<char> drift(ns, 0);
  for (StateId s : t.accepting) drift[s] = has_drift_loop(t, s);
  std::vector<char> acc(ns * np, 0);
  auto ok = [&](StateId s, Value p) {
    if (p < 0) return false;
    if (static_cast<std::size_t>(p) >= np) return false;
    if (drift[s] && static_cast<std::size_t>(p) + 1 == np) return true;
    return acc[s * np + p] != 0;
  };
  std::function<bool(const Pbf&, Value)> holds = [&](const Pbf& b, Value p) -> bool {
    switch (b.kind) {
    case Pbf::Kind::True: return true;
    case Pbf::Kind::False: return false;
    case Pbf::Kind::Atom: return ok(b.state, p + b.move);
    case Pbf::Kind::And: return holds(b.args[0], p) && holds(b.args[1], p);
    case Pbf::Kind::Or: return holds(b.args[0], p) || holds(b.args[1], p);
    }
    return false;
  };
  // Least fixpoint: cycles never become accepting on their own.
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& tr : t.transitions)
      for (std::size_t p = 0; p < np; ++p) {
        if (acc[tr.from * np + p]) continue;
        if (tr.test ? letter(p) != *tr.test : p != 0) continue;
        if (holds(tr.formula, static_cast<Value>(p))) {
          acc[tr.from * np + p] = 1;
          changed = true;
        }
      }
  }
  return ok(t.initial, 0);
}

bool membership(const A2A& t, const ParameterWord& w) { return membership(t, w.prefix()); }

std::string render(const A2A& t, const Pbf& b) {
  switch (b.kind) {
  case Pbf::Kind::True: return "true";
  case Pbf::Kind::False: return "false";
  case Pbf::Kind::Atom: return "(" + t.states[b.state] + " " + (b.move > 0 ? "+1" : b.move < 0 ? "-1" : "0") + ")";
  case Pbf::Kind::And: return "(and " + render(t, b.args[0]) + " " + render(t, b.args[1]) + ")";
  case Pbf::Kind::Or: return "(or " + render(t, b.args[0]) + " " + render(t, b.args[1]) + ")";
  }
  return "?";
}

std::string dump(const A2A& t) {
  std::string out;
  for (const auto& tr : t.transitions) {
    out += t.states[tr.from];
    out += ' ';
    out += tr.test ? t.alphabet[*tr.test] : "first?";
    out += ' ';
    out += render(t, tr.formula);
    out += '\n';
  }
  return out;
}

} // namespace oca
