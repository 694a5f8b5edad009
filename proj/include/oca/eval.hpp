#pragma once

// Exact satisfaction of freeze LTL on ultimately periodic data words.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "oca/formula.hpp"

namespace oca {

struct DataPoint {
  std::set<std::string> props;
  Value value;
  bool operator==(const DataPoint&) const = default;
};

// prefix . loop . (loop + drift) . (loop + 2 drift) ...  With drift 0 this
// is the plain lasso prefix . loop^omega.
struct LassoDataWord {
  std::vector<DataPoint> prefix;
  std::vector<DataPoint> loop; // nonempty
  Value drift = 0;

  // ArgumentError on an empty loop, negative values or negative drift.
  void check() const;
  DataPoint at(std::size_t i) const;
};

using RegisterAssignment = std::map<std::string, Value>;

// ArgumentError if nu misses a free register of phi.
bool eval(const LassoDataWord& w, std::size_t i, const RegisterAssignment& nu, const Formula& phi);
// Sentence at position 0.
bool holds(const LassoDataWord& w, const Formula& phi);

// Labels and counter values along a lasso of the machine.
LassoDataWord data_word(const CounterMachine& a, const LassoRun& lasso);

} // namespace oca
