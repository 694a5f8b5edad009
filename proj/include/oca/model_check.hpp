#pragma once

// Existential model checking of one-counter automata (unary or succinct
// updates) against flat freeze LTL sentences.

#include "oca/reductions.hpp"

namespace oca {

struct McWitness {
  ParamInstantiation gamma; // register parameters of the product
  LassoRun lasso;           // lasso of the input machine
  LassoDataWord word;       // its labels and counter values
};

struct McOptions {
  std::optional<Value> counter_cap; // default: the bound
  std::optional<Value> rep_cap;     // default: the bound
  std::size_t max_product_states = kDefaultProductLimit;
};

struct McStats {
  std::size_t product_states = 0;
  std::size_t candidates = 0; // accepting product states tried
};

// Searches register values and counter values up to `bound`.  An empty
// result means no witness within those limits.  Every returned witness has
// been re-validated against the machine and re-evaluated against phi.
std::optional<McWitness> model_check(const CounterMachine& a, const Formula& phi, Value bound,
                                     const McOptions& opts = {}, McStats* stats = nullptr);

} // namespace oca
