#pragma once

// Alternating two-way automata over parameter words, and the simulation
// of an OCA(P) by such an automaton.

#include <string>
#include <vector>

#include "oca/machine.hpp"

namespace oca {

// Positive boolean formula over atoms (state, move) with move in {-1, 0, 1}.
struct Pbf {
  enum class Kind { True, False, Atom, And, Or };
  Kind kind = Kind::True;
  StateId state = 0;
  int move = 0;
  std::vector<Pbf> args; // exactly two for And / Or

  static Pbf top() { return {}; }
  static Pbf bottom() { return {Kind::False, 0, 0, {}}; }
  static Pbf atom(StateId s, int move) { return {Kind::Atom, s, move, {}}; }
  static Pbf conj(Pbf a, Pbf b) { return {Kind::And, 0, 0, {std::move(a), std::move(b)}}; }
  static Pbf disj(Pbf a, Pbf b) { return {Kind::Or, 0, 0, {std::move(a), std::move(b)}}; }

  // |true| = |false| = |atom| = 1, binary connectives add one.
  std::size_t size() const;
  bool operator==(const Pbf&) const = default;
};

using Atom = std::pair<StateId, int>;
bool pbf_eval(const Pbf& beta, const std::set<Atom>& chosen);

// Letter 0 is the delimiter; letter p + 1 stands for parameter p.
using Letter = std::size_t;
inline constexpr Letter kBox = 0;

struct A2ATransition {
  StateId from;
  std::optional<Letter> test; // empty: the test first?
  Pbf formula;
};

struct A2A {
  std::vector<std::string> states;
  std::vector<std::string> alphabet; // alphabet[0] is the delimiter
  StateId initial = 0;
  std::set<StateId> accepting;
  std::vector<A2ATransition> transitions;

  std::size_t size() const; // |S| + |alphabet| + sum of |beta|
  std::optional<StateId> find_state(std::string_view name) const;
};

// Finite prefix over {delimiter} + parameters, followed by delimiters forever.
class ParameterWord {
public:
  // FormatError unless the first letter is the delimiter and every
  // parameter occurs exactly once.
  ParameterWord(std::vector<std::string> params, std::vector<Letter> prefix);
  // Tokens separated by blanks; "#" is the delimiter.
  static ParameterWord parse(std::vector<std::string> params, std::string_view text);

  const std::vector<std::string>& params() const { return params_; }
  const std::vector<Letter>& prefix() const { return prefix_; }
  Letter at(Value position) const;
  // Position of the delimiter that encodes counter value v.
  Value position_of(Value v) const;
  std::string render() const;

private:
  std::vector<std::string> params_;
  std::vector<Letter> prefix_;
};

ParameterWord encode_gamma(const ParamInstantiation& gamma, const std::vector<std::string>& order, Value padding = 0);
ParamInstantiation decode(const ParameterWord& w);

inline constexpr StateId kNoState = static_cast<StateId>(-1);

// The automaton simulating (A, target), with the correspondence between
// its states / transitions and the machine kept alongside.
struct SimulationAutomaton {
  A2A automaton;
  CounterMachine machine;
  StateId target = 0;

  StateId init = 0;
  std::vector<StateId> sim, right, left;                       // per machine state
  std::vector<StateId> present, search, search_next, seen, past; // per parameter; past may be kNoState
  std::size_t init_transition = 0;
  std::size_t accept_transition = 0;
  std::vector<std::size_t> step_transition;                    // per machine transition
  std::map<std::pair<StateId, Letter>, std::size_t> scan;      // deterministic helper moves
};

SimulationAutomaton build_a2a(const CounterMachine& a, StateId target);

struct RunTreeNode {
  StateId state;
  Value position;
  std::optional<std::size_t> transition; // unset only for drift nodes
  std::vector<std::size_t> children;
  bool drift = false; // stands for an accepting state moving right forever
};

struct RunTree {
  std::vector<RunTreeNode> nodes; // nodes[0] is the root
};

std::optional<Diagnostic> validate_run_tree(const A2A& t, const ParameterWord& w, const RunTree& tree);

// Accepting run tree on encode_gamma(witness.gamma) for a run reaching the target.
RunTree construct_accepting_tree(const SimulationAutomaton& t, const Run& witness);
Run extract_run(const SimulationAutomaton& t, const RunTree& tree, const ParameterWord& w);

// Decides prefix followed by delimiters forever for automata built by build_a2a.
bool membership(const A2A& t, const std::vector<Letter>& prefix);
bool membership(const A2A& t, const ParameterWord& w);

// One transition per line: state, test, formula in prefix notation.
std::string dump(const A2A& t);
std::string render(const A2A& t, const Pbf& beta);

} // namespace oca
