#include "oca/oracle.hpp"

#include <algorithm>
#include <deque>
#include <functional>

namespace oca {

namespace {

struct ConfigSpace {
  const CounterMachine& a;
  std::vector<Value> gamma;
  Value cap;

  std::size_t index(Configuration c) const { return c.state * static_cast<std::size_t>(cap + 1) + c.value; }
  Configuration config(std::size_t i) const {
    return {i / static_cast<std::size_t>(cap + 1), static_cast<Value>(i % static_cast<std::size_t>(cap + 1))};
  }
  std::size_t count() const { return a.num_states() * static_cast<std::size_t>(cap + 1); }

  template <class F> void for_each_step(Configuration c, F&& f, bool only_shift_safe = false) const {
    for (std::size_t t : a.outgoing(c.state)) {
      const auto& tr = a.transitions()[t];
      if (only_shift_safe && !shift_safe(tr.op)) continue;
      auto v = fire(tr.op, c.value, gamma);
      if (!v || *v > cap) continue;
      f(t, Configuration{tr.to, *v});
    }
  }
};

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

// Breadth-first search from `from`; returns the configs and steps of the
// first path to a node accepted by `goal` (excluding the trivial path when
// `nonempty`).
std::optional<std::pair<std::vector<Configuration>, std::vector<std::size_t>>>
bfs_path(const ConfigSpace& s, Configuration from, const std::function<bool(Configuration)>& goal, bool nonempty,
         const std::vector<char>* allowed = nullptr) {
  if (!nonempty && goal(from)) return std::make_pair(std::vector<Configuration>{from}, std::vector<std::size_t>{});
  std::vector<std::size_t> parent(s.count(), kNone), via(s.count(), kNone);
  std::vector<char> seen(s.count(), 0);
  std::deque<std::size_t> queue{s.index(from)};
  seen[s.index(from)] = 1;
  auto build = [&](std::size_t last_parent, std::size_t last_via, Configuration last) {
    std::vector<Configuration> cs{last};
    std::vector<std::size_t> steps{last_via};
    for (std::size_t u = last_parent; u != kNone; u = parent[u]) {
      cs.push_back(s.config(u));
      if (via[u] != kNone) steps.push_back(via[u]);
    }
    std::reverse(cs.begin(), cs.end());
    std::reverse(steps.begin(), steps.end());
    return std::make_pair(cs, steps);
  };
  while (!queue.empty()) {
    std::size_t u = queue.front();
    queue.pop_front();
    std::optional<std::pair<std::vector<Configuration>, std::vector<std::size_t>>> found;
    s.for_each_step(s.config(u), [&](std::size_t t, Configuration n) {
      if (found) return;
      std::size_t ni = s.index(n);
      if (allowed && !(*allowed)[ni]) return;
      if (goal(n)) {
        found = build(u, t, n);
        return;
      }
      if (!seen[ni]) {
        seen[ni] = 1;
        parent[ni] = u;
        via[ni] = t;
        queue.push_back(ni);
      }
    });
    if (found) return found;
  }
  return std::nullopt;
}

} // namespace

std::optional<Run> bounded_reach_oracle(const CounterMachine& a, const ParamInstantiation& gamma, StateId target,
                                        Value cap) {
  if (target >= a.num_states()) throw ConfigError("target state out of range");
  if (cap < 0) throw ArgumentError("negative cap");
  ConfigSpace s{a, a.bind(gamma), cap};
  auto path = bfs_path(s, {a.initial(), 0}, [&](Configuration c) { return c.state == target; }, false);
  if (!path) return std::nullopt;
  Run run;
  for (const auto& x : a.params()) run.gamma[x] = gamma.at(x);
  run.configs = std::move(path->first);
  run.steps = std::move(path->second);
  return run;
}

std::optional<LassoRun> rep_reach_oracle(const CounterMachine& a, const ParamInstantiation& gamma,
                                         const std::set<StateId>& accepting, Value cap) {
  for (StateId f : accepting)
    if (f >= a.num_states()) throw ConfigError("accepting state out of range");
  if (cap < 0) throw ArgumentError("negative cap");
  ConfigSpace s{a, a.bind(gamma), cap};
  const std::size_t n = s.count();

  // Reachable configurations in breadth-first order.
  std::vector<char> reach(n, 0);
  std::vector<std::size_t> order;
  {
    std::deque<std::size_t> queue{s.index({a.initial(), 0})};
    reach[queue.front()] = 1;
    while (!queue.empty()) {
      std::size_t u = queue.front();
      queue.pop_front();
      order.push_back(u);
      s.for_each_step(s.config(u), [&](std::size_t, Configuration c) {
        std::size_t i = s.index(c);
        if (!reach[i]) {
          reach[i] = 1;
          queue.push_back(i);
        }
      });
    }
  }

  auto make_lasso = [&](Configuration anchor, std::vector<Configuration> loop_cs, std::vector<std::size_t> loop_steps) {
    auto prefix = bfs_path(s, {a.initial(), 0}, [&](Configuration c) { return c == anchor; }, false);
    LassoRun lasso;
    for (const auto& x : a.params()) lasso.run.gamma[x] = gamma.at(x);
    lasso.run.configs = prefix->first;
    lasso.run.steps = prefix->second;
    lasso.loop_start = lasso.run.configs.size() - 1;
    lasso.run.configs.insert(lasso.run.configs.end(), loop_cs.begin() + 1, loop_cs.end());
    lasso.run.steps.insert(lasso.run.steps.end(), loop_steps.begin(), loop_steps.end());
    return lasso;
  };

  // Exact repeats: strongly connected components of the reachable graph.
  std::vector<std::size_t> comp(n, kNone), low(n, 0), num(n, kNone);
  {
    std::vector<std::size_t> stack;
    std::vector<char> on_stack(n, 0);
    std::size_t counter = 0, comps = 0;
    // Iterative Tarjan.
    for (std::size_t root : order) {
      if (num[root] != kNone) continue;
      std::vector<std::pair<std::size_t, std::vector<std::size_t>>> frames;
      auto push = [&](std::size_t u) {
        num[u] = low[u] = counter++;
        stack.push_back(u);
        on_stack[u] = 1;
        std::vector<std::size_t> succ;
        s.for_each_step(s.config(u), [&](std::size_t, Configuration c) { succ.push_back(s.index(c)); });
        std::reverse(succ.begin(), succ.end());
        frames.emplace_back(u, std::move(succ));
      };
      push(root);
      while (!frames.empty()) {
        auto& [u, succ] = frames.back();
        if (!succ.empty()) {
          std::size_t w = succ.back();
          succ.pop_back();
          if (num[w] == kNone) {
            push(w);
          } else if (on_stack[w]) {
            low[u] = std::min(low[u], num[w]);
          }
          continue;
        }
        std::size_t done = u;
        frames.pop_back();
        if (!frames.empty()) low[frames.back().first] = std::min(low[frames.back().first], low[done]);
        if (low[done] == num[done]) {
          std::size_t w;
          do {
            w = stack.back();
            stack.pop_back();
            on_stack[w] = 0;
            comp[w] = comps;
          } while (w != done);
          ++comps;
        }
      }
    }
  }
  std::vector<char> comp_has_f(order.size(), 0);
  for (std::size_t w : order)
    if (accepting.count(s.config(w).state)) comp_has_f[comp[w]] = 1;
  for (std::size_t u : order) {
    Configuration c = s.config(u);
    if (!comp_has_f[comp[u]]) continue;
    std::vector<char> in_comp(n, 0);
    for (std::size_t w : order)
      if (comp[w] == comp[u]) in_comp[w] = 1;
    auto to_f = bfs_path(s, c, [&](Configuration x) { return accepting.count(x.state) > 0; }, false, &in_comp);
    if (!to_f) continue;
    Configuration f = to_f->first.back();
    auto back = bfs_path(s, f, [&](Configuration x) { return x == c; }, true, &in_comp);
    if (!back) continue;
    auto cs = to_f->first;
    auto steps = to_f->second;
    cs.insert(cs.end(), back->first.begin() + 1, back->first.end());
    steps.insert(steps.end(), back->second.begin(), back->second.end());
    return make_lasso(c, cs, steps);
  }

  // Pumpable loops: from (q, v) back to (q, v') with v' > v through an
  // accepting state, using only shift-safe transitions.
  for (std::size_t u : order) {
    Configuration c = s.config(u);
    // Search over (configuration, visited-accepting) pairs.
    const std::size_t m = 2 * n;
    std::vector<std::size_t> parent(m, kNone), via(m, kNone);
    std::vector<char> seen(m, 0);
    auto idx = [&](Configuration x, bool flag) { return s.index(x) * 2 + (flag ? 1 : 0); };
    bool f0 = accepting.count(c.state) > 0;
    std::deque<std::size_t> queue{idx(c, f0)};
    seen[queue.front()] = 1;
    std::size_t hit = kNone;
    while (!queue.empty() && hit == kNone) {
      std::size_t node = queue.front();
      queue.pop_front();
      Configuration x = s.config(node / 2);
      bool flag = node % 2;
      s.for_each_step(x, [&](std::size_t t, Configuration y) {
        if (hit != kNone) return;
        bool g = flag || accepting.count(y.state) > 0;
        std::size_t ni = idx(y, g);
        if (seen[ni]) return;
        seen[ni] = 1;
        parent[ni] = node;
        via[ni] = t;
        if (g && y.state == c.state && y.value > c.value) {
          hit = ni;
          return;
        }
        queue.push_back(ni);
      }, true);
    }
    if (hit == kNone) continue;
    std::vector<Configuration> cs;
    std::vector<std::size_t> steps;
    for (std::size_t w = hit; w != kNone; w = parent[w]) {
      cs.push_back(s.config(w / 2));
      if (via[w] != kNone) steps.push_back(via[w]);
    }
    std::reverse(cs.begin(), cs.end());
    std::reverse(steps.begin(), steps.end());
    return make_lasso(c, cs, steps);
  }
  return std::nullopt;
}

} // namespace oca
