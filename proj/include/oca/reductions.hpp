#pragma once

// The chain from model checking down to reachability: Büchi acceptance as
// reachability, flat freeze LTL as a Büchi condition on a product machine,
// and succinct updates as binary counting gadgets checked by a formula.

#include <array>
#include <functional>

#include "oca/eval.hpp"
#include "oca/formula.hpp"
#include "oca/galil.hpp"

namespace oca {

// ---- Büchi to reachability ----------------------------------------------

enum class ReachEdge {
  Original, // copy of a transition of A
  Store,    // (q_f, =y, s)
  Enter,    // (s, op, q^) for a transition (q_f, op, q)
  Hatted,   // (q1^, op, q2^)
  Close,    // (q_f^, =y, s^)
  Escape,   // (t, 0, t_1) for t in T
  Above,    // (t_i, >x_i, t_{i+1})
};

struct BuchiReduction {
  CounterMachine machine; // A'
  StateId target = 0;     // s^
  StateId accepting = 0;  // q_f
  std::string y;
  std::optional<std::string> dummy; // parameter added when A has none
  CounterMachine repeat_machine;    // M: tests removed, > tests made 0
  std::vector<std::size_t> repeat_origin; // M transition -> A transition
  std::set<StateId> escape;               // T
  Value rep_cap = 0;
  std::vector<ReachEdge> edge;       // per A' transition
  std::vector<std::size_t> origin;   // A transition for Original / Enter / Hatted
  std::size_t source_transitions = 0;
};

// A must be of class OCA(P).  `rep_cap` bounds the counter when computing T
// (default: default_rep_cap(M)).
BuchiReduction buchi_to_reach(const CounterMachine& a, StateId q_f, std::optional<Value> rep_cap = std::nullopt);

// Lasso of A visiting q_f infinitely often, rebuilt from a run of A' that
// reaches the target.  Gamma is restricted to the parameters of A.
LassoRun lasso_from_reach(const CounterMachine& a, const BuchiReduction& r, const Run& reach);

// Tries every state of `accepting` in name order.  Constant tests are
// folded into pinned parameters.
std::optional<LassoRun> solve_buchi(const CounterMachine& a, const std::set<StateId>& accepting, Value bound,
                                    std::optional<Value> rep_cap = std::nullopt,
                                    std::optional<Value> counter_cap = std::nullopt);

// ---- Flat freeze LTL to Büchi ---------------------------------------------

struct Product {
  CounterMachine machine;
  std::set<StateId> accepting;
  Formula formula;                                // NNF, registers renamed
  std::map<std::string, std::string> param_of;    // register -> parameter
  std::vector<std::optional<StateId>> macro_of;   // product state -> A state, for macro states
  std::vector<std::optional<std::size_t>> step_of; // product transition -> A transition
  std::size_t tableau_nodes = 0;
  std::size_t untils = 0;
};

inline constexpr std::size_t kDefaultProductLimit = 500000;

// A must be a plain OCA (unary updates, only =0 tests, no parameters) and
// phi a flat sentence.
Product flat_mc_to_buchi(const CounterMachine& a, const Formula& phi, std::size_t max_states = kDefaultProductLimit);

// Lasso of A from a lasso of the product (rotated to start at a macro state).
LassoRun project_product_lasso(const CounterMachine& a, const Product& p, const LassoRun& lasso);

// ---- Succinct updates -------------------------------------------------------

std::size_t bits(Value z);                  // bits of |z|; bits(6) == 3
std::vector<bool> bit_vector(Value z);      // least significant first
std::string delimiter_prop(Value z);        // "#6", "#n6" for -6
inline const std::string kBitOne = "#b1";
inline const std::string kBitZero = "#b0";

Formula counter_formula(const std::set<Value>& zs);
// T(phi); phi in NNF.  Returns phi itself when lambda is empty.
Formula translate_formula(const Formula& phi, const std::vector<std::string>& lambda);

// Transitions of one gadget replacing (q, z, q').  Bit states come in
// pairs carrying 0 / 1, indexed by the carried bit.
struct Gadget {
  Value z = 0;
  std::size_t enter = 0;                        // q -> first delimiter
  std::array<std::size_t, 2> first{};           // first delimiter -> bit 1
  std::vector<std::array<std::size_t, 4>> inner; // bit i (v) -> bit i+1 (w) at [2v + w]
  std::array<std::size_t, 2> exit{};            // bit n -> second delimiter, counter +-1
  std::size_t leave = 0;                        // second delimiter -> q'
  std::array<std::size_t, 2> again{};           // second delimiter -> bit 1
  std::vector<StateId> states;                  // the 2 bits(z) + 2 new states
};

struct UnaryReduction {
  CounterMachine machine;
  Formula formula; // T(nnf phi) & Counter, or phi when nothing is replaced
  std::vector<std::string> lambda;
  std::set<Value> zs;
  std::vector<std::optional<StateId>> state_origin; // A' state -> A state
  std::vector<std::size_t> step_origin;             // A' transition -> A transition
  std::map<std::size_t, Gadget> gadgets;            // keyed by A transition
};

UnaryReduction succinct_to_unary(const CounterMachine& a, const Formula& phi);

// A' transitions of the intended traversal of the gadget for A transition t.
std::vector<std::size_t> gadget_path(const UnaryReduction& u, std::size_t t);
// Label tokens of that traversal without the end points: "#6 100 #6 010 ... #6".
std::vector<std::string> counting_sequence(Value z);

LassoRun expand_lasso(const UnaryReduction& u, const LassoRun& lasso);
// ExtractionError if the lasso stays inside a gadget forever.
LassoRun project_unary_lasso(const CounterMachine& a, const UnaryReduction& u, const LassoRun& lasso);

// Moves the loop start forward until `pred` holds for its state.
LassoRun rotate_loop(const LassoRun& lasso, const std::function<bool(StateId)>& pred);

} // namespace oca
