#pragma once

// Brute-force references.  Both search the finite graph of configurations
// with counter values in [0, cap]; their answers are complete only relative
// to that cap.

#include "oca/machine.hpp"

namespace oca {

// Shortest run from (initial, 0) to a configuration with state `target`.
// Breadth-first, transitions tried in declaration order.
std::optional<Run> bounded_reach_oracle(const CounterMachine& a, const ParamInstantiation& gamma,
                                        StateId target, Value cap);

// Lasso from (initial, 0) visiting some state of `accepting` infinitely
// often.  Exact repeats are preferred; otherwise a loop made of updates and
// `>` tests that ends higher than it started is pumped.
std::optional<LassoRun> rep_reach_oracle(const CounterMachine& a, const ParamInstantiation& gamma,
                                         const std::set<StateId>& accepting, Value cap);

} // namespace oca
