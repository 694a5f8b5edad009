#pragma once

// Reachability for machines with unary updates: value-bounded runs
// between levels, test stripping between consecutive levels, and the
// level-by-level solver for OCA(P) (constants folded into parameters).

#include "oca/machine.hpp"

namespace oca {

// Run from (q, v) to (q2, v2) whose intermediate values lie strictly
// between min(v, v2) and max(v, v2).  Machine must be of class OCA.
bool vv_run(const CounterMachine& a, StateId q, StateId q2, Value v, Value v2);
// Run from (q, v) back to (q2, v) whose intermediate values lie strictly
// between v and v2.
bool vv_return(const CounterMachine& a, StateId q, StateId q2, Value v, Value v2);

// Strictly increasing counter values starting at 0.
struct LevelSet {
  std::vector<Value> values;
  static LevelSet from(std::vector<Value> vs); // sorts, merges, adds 0
  std::size_t index_of(Value v) const;         // ArgumentError if absent
};

struct StrippedMachine {
  CounterMachine machine;
  std::vector<std::size_t> origin; // stripped transition -> source transition
};

// Test-free view of the machine for runs strictly inside the interval
// (levels[interval], levels[interval + 1]).  param_level[x] is the level
// holding the value of parameter x; every level strictly between 0 and the
// top must be assigned to some parameter.
StrippedMachine strip_tests(const CounterMachine& a, std::size_t interval, const LevelSet& levels,
                            std::span<const std::size_t> param_level);

struct FoldResult {
  CounterMachine machine;  // transition indices unchanged
  ParamInstantiation pinned;
};
// Replaces each constant test other than `=0` by a test against a fresh
// parameter pinned to that constant.
FoldResult fold_constants(const CounterMachine& a);

inline constexpr Value kDefaultBoundFactor = 8;
Value derive_bound(const CounterMachine& a, Value k = kDefaultBoundFactor);

struct ReachOptions {
  std::optional<Value> counter_cap;          // default: bound + |Q|^3
  std::map<std::string, Value> param_bounds; // overrides `bound` per parameter
  ParamInstantiation pinned;                 // fixed, never enumerated
};

// Searches parameter values up to `bound` for a run from (initial, 0) to
// `target`.  Requires unary updates and no constant tests besides `=0`.
std::optional<Run> ocap_reach(const CounterMachine& a, StateId target, Value bound, const ReachOptions& opts = {});

// Folds constants first when needed; the witness refers to `a`.
std::optional<Run> solve_reach(const CounterMachine& a, StateId target, Value bound, ReachOptions opts = {});

// Infinite run from (t, 0) visiting `good` infinitely often in a machine
// without tests; loops are searched with counter values up to `cap`.
bool oca_rep_reach(const CounterMachine& m, StateId t, StateId good, std::optional<Value> cap = std::nullopt);
// Same question for every start state at once.
std::vector<bool> oca_rep_reach_all(const CounterMachine& m, const std::set<StateId>& good, Value cap);
// Witness lasso starting at (t, 0).
std::optional<LassoRun> oca_rep_lasso(const CounterMachine& m, StateId t, const std::set<StateId>& good, Value cap);
Value default_rep_cap(const CounterMachine& m, Value k = kDefaultBoundFactor);

} // namespace oca
