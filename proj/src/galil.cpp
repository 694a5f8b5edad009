#include "oca/galil.hpp"

#include <algorithm>
#include <deque>
#include <functional>

namespace oca {

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

void require_oca(const CounterMachine& a, const char* what) {
  if (classify(a) != MachineClass::OCA) throw ClassError(std::string(what) + " needs a machine of class OCA");
}

// Breadth-first exploration of runs that start on a boundary of (lo, hi)
// and stay strictly inside until they hit a boundary again.
struct IntervalSearch {
  struct Exit {
    std::size_t parent; // interior node, or kNone for the start
    std::size_t transition;
  };
  Value lo, hi;
  Configuration start;
  std::vector<Configuration> nodes;
  std::vector<std::size_t> parent, via;
  std::map<Configuration, Exit> direct; // length one
  std::map<Configuration, Exit> longer; // length at least two

  IntervalSearch(const CounterMachine& a, Configuration from, Value lo_, Value hi_) : lo(lo_), hi(hi_), start(from) {
    std::vector<Value> gamma(a.params().size(), 0);
    const Value width = hi - lo - 1;
    std::vector<std::size_t> seen(width > 0 ? a.num_states() * static_cast<std::size_t>(width) : 0, kNone);
    auto slot = [&](Configuration c) { return c.state * static_cast<std::size_t>(width) + (c.value - lo - 1); };
    auto visit = [&](std::size_t from_node, std::size_t t, Configuration c) {
      if (c.value > lo && c.value < hi) {
        std::size_t& s = seen[slot(c)];
        if (s != kNone) return;
        s = nodes.size();
        nodes.push_back(c);
        parent.push_back(from_node);
        via.push_back(t);
      } else if (c.value == lo || c.value == hi) {
        auto& table = from_node == kNone ? direct : longer;
        table.emplace(c, Exit{from_node, t});
      }
    };
    for (const auto& st : successors(a, gamma, from)) visit(kNone, st.transition, st.target);
    for (std::size_t i = 0; i < nodes.size(); ++i)
      for (const auto& st : successors(a, gamma, nodes[i])) visit(i, st.transition, st.target);
  }

  // Configurations (start excluded) and steps of the run ending at exit `c`.
  void path(Configuration c, const Exit& e, std::vector<Configuration>& cs, std::vector<std::size_t>& steps) const {
    std::vector<Configuration> rc{c};
    std::vector<std::size_t> rs{e.transition};
    for (std::size_t u = e.parent; u != kNone; u = parent[u]) {
      rc.push_back(nodes[u]);
      rs.push_back(via[u]);
    }
    cs.insert(cs.end(), rc.rbegin(), rc.rend());
    steps.insert(steps.end(), rs.rbegin(), rs.rend());
  }
};

} // namespace

bool vv_run(const CounterMachine& a, StateId q, StateId q2, Value v, Value v2) {
  require_oca(a, "vv_run");
  if (q >= a.num_states() || q2 >= a.num_states()) throw ConfigError("state out of range");
  if (v < 0 || v2 < 0) throw ArgumentError("negative counter value");
  if (v == v2 && q == q2) return true;
  IntervalSearch s(a, {q, v}, std::min(v, v2), std::max(v, v2));
  Configuration goal{q2, v2};
  return s.direct.count(goal) || s.longer.count(goal);
}

bool vv_return(const CounterMachine& a, StateId q, StateId q2, Value v, Value v2) {
  require_oca(a, "vv_return");
  if (q >= a.num_states() || q2 >= a.num_states()) throw ConfigError("state out of range");
  if (v < 0 || v2 < 0) throw ArgumentError("negative counter value");
  if (q == q2) return true;
  IntervalSearch s(a, {q, v}, std::min(v, v2), std::max(v, v2));
  Configuration goal{q2, v};
  return s.direct.count(goal) || s.longer.count(goal);
}

LevelSet LevelSet::from(std::vector<Value> vs) {
  vs.push_back(0);
  for (Value v : vs)
    if (v < 0) throw ArgumentError("negative level");
  std::sort(vs.begin(), vs.end());
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
  return LevelSet{std::move(vs)};
}

std::size_t LevelSet::index_of(Value v) const {
  auto it = std::lower_bound(values.begin(), values.end(), v);
  if (it == values.end() || *it != v) throw ArgumentError("value " + std::to_string(v) + " is not a level");
  return static_cast<std::size_t>(it - values.begin());
}

StrippedMachine strip_tests(const CounterMachine& a, std::size_t interval, const LevelSet& levels,
                            std::span<const std::size_t> param_level) {
  const auto& d = levels.values;
  if (d.empty() || d.front() != 0 || !std::is_sorted(d.begin(), d.end()) ||
      std::adjacent_find(d.begin(), d.end()) != d.end())
    throw ArgumentError("levels must increase strictly from 0");
  if (interval + 1 >= d.size()) throw ArgumentError("interval index out of range");
  if (param_level.size() != a.params().size()) throw ArgumentError("level assignment has wrong length");
  std::vector<char> used(d.size(), 0);
  for (std::size_t l : param_level) {
    if (l >= d.size()) throw ArgumentError("parameter level out of range");
    used[l] = 1;
  }
  for (std::size_t l = 1; l + 1 < d.size(); ++l)
    if (!used[l]) throw ArgumentError("level " + std::to_string(l) + " is not assigned to any parameter");

  const Value lo = d[interval], hi = d[interval + 1];
  MachineBuilder b;
  for (StateId q = 0; q < a.num_states(); ++q) b.add_state(a.state_name(q), a.labels(q));
  b.set_initial(a.initial());
  StrippedMachine out{b.build(), {}};
  // Whether a test against value c is always true / always false inside.
  auto decide = [&](Cmp cmp, Value c) -> std::optional<bool> {
    if (c <= lo) return cmp == Cmp::Greater;
    if (c >= hi) return cmp == Cmp::Less;
    return std::nullopt;
  };
  for (std::size_t i = 0; i < a.transitions().size(); ++i) {
    const auto& t = a.transitions()[i];
    std::optional<bool> keep;
    if (std::holds_alternative<Update>(t.op)) {
      b.add_transition(t.from, t.op, t.to);
      out.origin.push_back(i);
      continue;
    }
    if (auto* p = std::get_if<ParamTest>(&t.op)) {
      keep = decide(p->cmp, d[param_level[p->param]]);
    } else {
      auto& c = std::get<ConstTest>(t.op);
      keep = decide(c.cmp, c.constant);
      if (!keep) throw ArgumentError("constant " + std::to_string(c.constant) + " lies inside the interval");
    }
    if (*keep) {
      b.add_transition(t.from, Update{0}, t.to);
      out.origin.push_back(i);
    }
  }
  out.machine = b.build();
  return out;
}

FoldResult fold_constants(const CounterMachine& a) {
  MachineBuilder b;
  for (StateId q = 0; q < a.num_states(); ++q) b.add_state(a.state_name(q), a.labels(q));
  b.set_initial(a.initial());
  for (const auto& x : a.params()) b.add_param(x);
  FoldResult out{b.build(), {}};
  std::map<Value, ParamId> fresh;
  for (const auto& t : a.transitions()) {
    auto* c = std::get_if<ConstTest>(&t.op);
    if (!c || is_zero_test(t.op) || fresh.count(c->constant)) continue;
    std::string name = b.fresh_name("x_" + std::to_string(c->constant));
    fresh[c->constant] = b.add_param(name);
    out.pinned[name] = c->constant;
  }
  for (const auto& t : a.transitions()) {
    auto* c = std::get_if<ConstTest>(&t.op);
    if (c && !is_zero_test(t.op))
      b.add_transition(t.from, ParamTest{c->cmp, fresh.at(c->constant)}, t.to);
    else
      b.add_transition(t.from, t.op, t.to);
  }
  out.machine = b.build();
  return out;
}

Value derive_bound(const CounterMachine& a, Value k) {
  Value q = static_cast<Value>(a.num_states());
  return q * q * q * (static_cast<Value>(a.params().size()) + 2) * k;
}

namespace {

struct LevelEdge {
  std::size_t prev = kNone;
  std::vector<Configuration> configs; // excluding the start configuration
  std::vector<std::size_t> steps;
};

// One fixed parameter valuation: search the graph of level configurations.
std::optional<Run> search_levels(const CounterMachine& aug, StateId sink, const std::vector<Value>& gamma,
                                 Value cap) {
  std::vector<Value> vals(gamma.begin(), gamma.end());
  vals.push_back(cap);
  LevelSet levels = LevelSet::from(vals);
  const auto& d = levels.values;
  const std::size_t nl = d.size();
  std::vector<std::size_t> param_level;
  for (Value g : gamma) param_level.push_back(levels.index_of(g));
  std::vector<std::optional<StrippedMachine>> stripped(nl - 1);
  auto strip = [&](std::size_t i) -> const StrippedMachine& {
    if (!stripped[i]) stripped[i] = strip_tests(aug, i, levels, param_level);
    return *stripped[i];
  };

  const std::size_t n = aug.num_states() * nl;
  auto node = [&](StateId q, std::size_t l) { return q * nl + l; };
  std::vector<LevelEdge> edge(n);
  std::vector<char> seen(n, 0);
  std::deque<std::size_t> queue;
  std::size_t start = node(aug.initial(), 0), goal = node(sink, 0);
  seen[start] = 1;
  queue.push_back(start);

  auto offer = [&](std::size_t from, std::size_t to, LevelEdge e) {
    if (seen[to]) return;
    seen[to] = 1;
    e.prev = from;
    edge[to] = std::move(e);
    queue.push_back(to);
  };

  while (!queue.empty() && !seen[goal]) {
    std::size_t u = queue.front();
    queue.pop_front();
    StateId q = u / nl;
    std::size_t l = u % nl;
    Value v = d[l];

    // Segment at constant value v.
    {
      std::vector<std::size_t> par(aug.num_states(), kNone), via(aug.num_states(), kNone);
      std::vector<char> vis(aug.num_states(), 0);
      std::deque<StateId> sq{q};
      vis[q] = 1;
      while (!sq.empty()) {
        StateId p = sq.front();
        sq.pop_front();
        for (std::size_t t : aug.outgoing(p)) {
          const auto& tr = aug.transitions()[t];
          auto w = fire(tr.op, v, gamma);
          if (!w || *w != v || vis[tr.to]) continue;
          vis[tr.to] = 1;
          par[tr.to] = p;
          via[tr.to] = t;
          sq.push_back(tr.to);
          LevelEdge e;
          for (StateId r = tr.to; r != q; r = par[r]) {
            e.configs.push_back({r, v});
            e.steps.push_back(via[r]);
          }
          std::reverse(e.configs.begin(), e.configs.end());
          std::reverse(e.steps.begin(), e.steps.end());
          offer(u, node(tr.to, l), std::move(e));
        }
      }
    }

    // Segments through the interval above and the interval below.
    for (int dir : {+1, -1}) {
      if (dir > 0 && l + 1 >= nl) continue;
      if (dir < 0 && l == 0) continue;
      std::size_t iv = dir > 0 ? l : l - 1;
      const StrippedMachine& sm = strip(iv);
      IntervalSearch s(sm.machine, {q, v}, d[iv], d[iv + 1]);
      auto take = [&](const std::map<Configuration, IntervalSearch::Exit>& table, bool allow_same) {
        for (const auto& [c, e] : table) {
          if (c.value == v && !allow_same) continue;
          std::size_t target = node(c.state, levels.index_of(c.value));
          if (seen[target]) continue;
          LevelEdge le;
          s.path(c, e, le.configs, le.steps);
          for (auto& t : le.steps) t = sm.origin[t];
          offer(u, target, std::move(le));
        }
      };
      take(s.direct, false);
      take(s.longer, true);
    }
  }
  if (!seen[goal]) return std::nullopt;

  std::vector<std::size_t> chain;
  for (std::size_t u = goal; u != start; u = edge[u].prev) chain.push_back(u);
  Run run;
  run.configs.push_back({aug.initial(), 0});
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    const auto& e = edge[*it];
    run.configs.insert(run.configs.end(), e.configs.begin(), e.configs.end());
    run.steps.insert(run.steps.end(), e.steps.begin(), e.steps.end());
  }
  return run;
}

} // namespace

std::optional<Run> ocap_reach(const CounterMachine& a, StateId target, Value bound, const ReachOptions& opts) {
  if (!is_unary(a)) throw ClassError("ocap_reach needs unary updates");
  if (has_constant_tests(a)) throw ClassError("ocap_reach needs constants folded into parameters");
  if (target >= a.num_states()) throw ConfigError("target state out of range");
  if (bound < 0) throw ArgumentError("negative bound");
  for (const auto& [x, v] : opts.pinned)
    if (!a.find_param(x) || v < 0) throw ConfigError("bad pinned parameter '" + x + "'");

  const Value q = static_cast<Value>(a.num_states());
  const Value cap = opts.counter_cap.value_or(bound + q * q * q);

  MachineBuilder b(a);
  StateId sink = b.add_state(b.fresh_name("sink"));
  b.add_transition(target, Update{0}, sink);
  b.add_transition(sink, Update{-1}, sink);
  CounterMachine aug = b.build();

  const std::size_t np = a.params().size();
  std::vector<char> tested(np, 0);
  for (const auto& t : a.transitions())
    if (auto* p = std::get_if<ParamTest>(&t.op)) tested[p->param] = 1;
  std::vector<Value> gamma(np, 0), limit(np, 0);
  std::vector<ParamId> free;
  for (ParamId x = 0; x < np; ++x) {
    const auto& name = a.params()[x];
    if (auto it = opts.pinned.find(name); it != opts.pinned.end()) {
      gamma[x] = it->second;
    } else if (tested[x]) {
      auto bt = opts.param_bounds.find(name);
      limit[x] = bt == opts.param_bounds.end() ? bound : bt->second;
      free.push_back(x);
    }
  }
  Value top = 0;
  for (ParamId x : free) top = std::max(top, limit[x]);

  // Valuations ordered by their largest free value, then lexicographically.
  for (Value m = 0; m <= top; ++m) {
    for (ParamId x : free) gamma[x] = 0;
    while (true) {
      bool reaches_m = free.empty() && m == 0;
      for (ParamId x : free) reaches_m = reaches_m || gamma[x] == m;
      if (reaches_m) {
        Value c = cap;
        for (Value g : gamma) c = std::max(c, g);
        if (auto run = search_levels(aug, sink, gamma, c)) {
          auto cut = std::find_if(run->configs.begin(), run->configs.end(),
                                  [&](const Configuration& x) { return x.state == target; });
          std::size_t len = static_cast<std::size_t>(cut - run->configs.begin());
          run->configs.resize(len + 1);
          run->steps.resize(len);
          run->gamma = a.unbind(gamma);
          if (auto diag = validate_run(a, *run))
            throw InternalError("ocap_reach produced an invalid run: " + diag->reason);
          return run;
        }
      }
      // Next tuple with every free value at most min(limit, m).
      std::size_t k = free.size();
      while (k > 0) {
        ParamId x = free[k - 1];
        if (gamma[x] < std::min(limit[x], m)) {
          ++gamma[x];
          break;
        }
        gamma[x] = 0;
        --k;
      }
      if (k == 0) break;
    }
  }
  return std::nullopt;
}

std::optional<Run> solve_reach(const CounterMachine& a, StateId target, Value bound, ReachOptions opts) {
  if (!has_constant_tests(a)) return ocap_reach(a, target, bound, opts);
  FoldResult f = fold_constants(a);
  for (const auto& [x, v] : f.pinned) opts.pinned[x] = v;
  auto run = ocap_reach(f.machine, target, bound, opts);
  if (!run) return run;
  ParamInstantiation g;
  for (const auto& x : a.params()) g[x] = run->gamma.at(x);
  run->gamma = g;
  if (auto diag = validate_run(a, *run)) throw InternalError("folded witness does not replay: " + diag->reason);
  return run;
}

Value default_rep_cap(const CounterMachine& m, Value k) {
  Value q = static_cast<Value>(m.num_states());
  return k * q * q * q;
}

namespace {

// Configuration graph of a test-free machine extended with downward
// edges (q, v) -> (q, v - 1).  Because the machine has no tests, a run
// from (q, v) can always be replayed from (q, v') for v' >= v, so every
// cycle of this graph lifts to a genuine infinite run.
struct CoverGraph {
  const CounterMachine& m;
  Value cap;
  std::size_t width() const { return static_cast<std::size_t>(cap + 1); }
  std::size_t count() const { return m.num_states() * width(); }
  std::size_t id(Configuration c) const { return c.state * width() + c.value; }
  Configuration config(std::size_t i) const { return {i / width(), static_cast<Value>(i % width())}; }

  // Successors: (transition index or kNone for a downward edge, node).
  template <class F> void each(std::size_t u, F&& f) const {
    Configuration c = config(u);
    for (std::size_t t : m.outgoing(c.state)) {
      Value v = c.value + std::get<Update>(m.transitions()[t].op).delta;
      if (v < 0 || v > cap) continue;
      f(t, id({m.transitions()[t].to, v}));
    }
    if (c.value > 0) f(kNone, u - 1);
  }

  // Component ids and whether each component contains a cycle.
  std::pair<std::vector<std::size_t>, std::vector<char>> components() const {
    const std::size_t n = count();
    std::vector<std::size_t> comp(n, kNone), num(n, kNone), low(n, 0);
    std::vector<char> on(n, 0), cyclic;
    std::vector<std::size_t> stack;
    std::size_t counter = 0;
    for (std::size_t root = 0; root < n; ++root) {
      if (num[root] != kNone) continue;
      std::vector<std::pair<std::size_t, std::vector<std::size_t>>> frames;
      auto push = [&](std::size_t u) {
        num[u] = low[u] = counter++;
        stack.push_back(u);
        on[u] = 1;
        std::vector<std::size_t> succ;
        each(u, [&](std::size_t, std::size_t w) { succ.push_back(w); });
        frames.emplace_back(u, std::move(succ));
      };
      push(root);
      while (!frames.empty()) {
        auto& [u, succ] = frames.back();
        if (!succ.empty()) {
          std::size_t w = succ.back();
          succ.pop_back();
          if (num[w] == kNone)
            push(w);
          else if (on[w])
            low[u] = std::min(low[u], num[w]);
          continue;
        }
        std::size_t done = u;
        frames.pop_back();
        if (!frames.empty()) low[frames.back().first] = std::min(low[frames.back().first], low[done]);
        if (low[done] == num[done]) {
          std::size_t cid = cyclic.size(), size = 0, w;
          do {
            w = stack.back();
            stack.pop_back();
            on[w] = 0;
            comp[w] = cid;
            ++size;
          } while (w != done);
          bool self = false;
          each(done, [&](std::size_t, std::size_t x) { self = self || x == done; });
          cyclic.push_back(size > 1 || self);
        }
      }
    }
    return {comp, cyclic};
  }

  // Shortest path from `from` to a node satisfying `goal`, staying inside
  // `allowed` when given.  Returned as (transition or kNone, node) pairs.
  std::optional<std::vector<std::pair<std::size_t, std::size_t>>>
  path(std::size_t from, const std::function<bool(std::size_t)>& goal, bool nonempty,
       const std::function<bool(std::size_t)>& allowed) const {
    if (!nonempty && goal(from)) return std::vector<std::pair<std::size_t, std::size_t>>{};
    std::vector<std::size_t> par(count(), kNone), via(count(), kNone);
    std::vector<char> seen(count(), 0);
    std::deque<std::size_t> q{from};
    seen[from] = 1;
    while (!q.empty()) {
      std::size_t u = q.front();
      q.pop_front();
      std::optional<std::size_t> hit;
      std::size_t hit_via = kNone;
      each(u, [&](std::size_t t, std::size_t w) {
        if (hit || !allowed(w)) return;
        if (goal(w)) {
          hit = w;
          hit_via = t;
          return;
        }
        if (seen[w]) return;
        seen[w] = 1;
        par[w] = u;
        via[w] = t;
        q.push_back(w);
      });
      if (hit) {
        std::vector<std::pair<std::size_t, std::size_t>> out{{hit_via, *hit}};
        for (std::size_t w = u; w != from; w = par[w]) out.push_back({via[w], w});
        std::reverse(out.begin(), out.end());
        return out;
      }
    }
    return std::nullopt;
  }
};

void require_test_free(const CounterMachine& m) {
  for (const auto& t : m.transitions())
    if (!std::holds_alternative<Update>(t.op)) throw ClassError("machine must not contain tests");
}

} // namespace

std::vector<bool> oca_rep_reach_all(const CounterMachine& m, const std::set<StateId>& good, Value cap) {
  require_test_free(m);
  if (cap < 0) throw ArgumentError("negative cap");
  CoverGraph g{m, cap};
  auto [comp, cyclic] = g.components();
  const std::size_t n = g.count();
  // Nodes that can reach a cyclic component holding a good configuration.
  std::vector<char> live_comp(cyclic.size(), 0);
  for (std::size_t u = 0; u < n; ++u)
    if (cyclic[comp[u]] && good.count(g.config(u).state)) live_comp[comp[u]] = 1;
  std::vector<std::vector<std::size_t>> pred(n);
  for (std::size_t u = 0; u < n; ++u) g.each(u, [&](std::size_t, std::size_t w) { pred[w].push_back(u); });
  std::vector<char> live(n, 0);
  std::deque<std::size_t> q;
  for (std::size_t u = 0; u < n; ++u)
    if (live_comp[comp[u]]) {
      live[u] = 1;
      q.push_back(u);
    }
  while (!q.empty()) {
    std::size_t u = q.front();
    q.pop_front();
    for (std::size_t p : pred[u])
      if (!live[p]) {
        live[p] = 1;
        q.push_back(p);
      }
  }
  std::vector<bool> out(m.num_states());
  for (StateId t = 0; t < m.num_states(); ++t) out[t] = live[g.id({t, 0})];
  return out;
}

bool oca_rep_reach(const CounterMachine& m, StateId t, StateId good, std::optional<Value> cap) {
  if (t >= m.num_states() || good >= m.num_states()) throw ConfigError("state out of range");
  return oca_rep_reach_all(m, {good}, cap.value_or(default_rep_cap(m)))[t];
}

std::optional<LassoRun> oca_rep_lasso(const CounterMachine& m, StateId t, const std::set<StateId>& good, Value cap) {
  require_test_free(m);
  if (t >= m.num_states()) throw ConfigError("state out of range");
  CoverGraph g{m, cap};
  auto [comp, cyclic] = g.components();
  auto is_anchor = [&](std::size_t u) { return cyclic[comp[u]] && good.count(g.config(u).state) > 0; };
  auto anywhere = [](std::size_t) { return true; };
  std::size_t from = g.id({t, 0});
  auto prefix = g.path(from, is_anchor, false, anywhere);
  if (!prefix) return std::nullopt;
  std::size_t anchor = prefix->empty() ? from : prefix->back().second;
  auto loop = g.path(anchor, [&](std::size_t u) { return u == anchor; }, true,
                     [&](std::size_t u) { return comp[u] == comp[anchor]; });
  if (!loop) throw InternalError("cyclic component without a cycle");

  // Replay both paths, turning downward edges into an upward shift.
  LassoRun lasso;
  Value shift = 0;
  lasso.run.configs.push_back({t, 0});
  auto replay = [&](const std::vector<std::pair<std::size_t, std::size_t>>& p) {
    for (auto [tr, node] : p) {
      if (tr == kNone) {
        ++shift;
        continue;
      }
      Configuration c = g.config(node);
      c.value += shift;
      lasso.run.configs.push_back(c);
      lasso.run.steps.push_back(tr);
    }
  };
  replay(*prefix);
  lasso.loop_start = lasso.run.configs.size() - 1;
  replay(*loop);
  if (auto d = validate_lasso(m, lasso)) throw InternalError("test-free lasso invalid: " + d->reason);
  return lasso;
}

} // namespace oca
