#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "oca/error.hpp"

namespace oca {

using StateId = std::size_t;
using ParamId = std::size_t;
using Value = std::int64_t;

enum class Cmp { Less, Equal, Greater };

char cmp_symbol(Cmp c);
bool compare(Value lhs, Cmp c, Value rhs);

struct Update {
  Value delta;
  bool operator==(const Update&) const = default;
};
struct ParamTest {
  Cmp cmp;
  ParamId param;
  bool operator==(const ParamTest&) const = default;
};
struct ConstTest {
  Cmp cmp;
  Value constant;
  bool operator==(const ConstTest&) const = default;
};
using Operation = std::variant<Update, ParamTest, ConstTest>;

bool is_zero_test(const Operation& op);

struct Transition {
  StateId from;
  Operation op;
  StateId to;
};

// Parameter name to natural value.
using ParamInstantiation = std::map<std::string, Value>;

struct Configuration {
  StateId state;
  Value value;
  bool operator==(const Configuration&) const = default;
  auto operator<=>(const Configuration&) const = default;
};

// Immutable one-counter automaton with parameterized tests.  Built only
// through MachineBuilder.
class CounterMachine {
public:
  std::size_t num_states() const { return names_.size(); }
  const std::string& state_name(StateId q) const { return names_.at(q); }
  std::optional<StateId> find_state(std::string_view name) const;
  StateId state(std::string_view name) const;
  StateId initial() const { return initial_; }
  const std::set<std::string>& labels(StateId q) const { return labels_.at(q); }

  const std::vector<std::string>& params() const { return params_; }
  std::optional<ParamId> find_param(std::string_view name) const;

  const std::vector<Transition>& transitions() const { return transitions_; }
  // Transition indices leaving q, in declaration order.
  const std::vector<std::size_t>& outgoing(StateId q) const { return outgoing_.at(q); }

  // Dense parameter vector; ConfigError if some parameter has no value.
  std::vector<Value> bind(const ParamInstantiation& gamma) const;
  ParamInstantiation unbind(std::span<const Value> values) const;

  std::string render_op(const Operation& op) const;

private:
  friend class MachineBuilder;
  std::vector<std::string> names_;
  std::vector<std::set<std::string>> labels_;
  std::unordered_map<std::string, StateId> index_;
  StateId initial_ = 0;
  std::vector<std::string> params_;
  std::vector<Transition> transitions_;
  std::vector<std::vector<std::size_t>> outgoing_;
};

class MachineBuilder {
public:
  MachineBuilder() = default;
  // Copies states, parameters and transitions of an existing machine.
  explicit MachineBuilder(const CounterMachine& base);

  StateId add_state(const std::string& name, std::set<std::string> labels = {});
  ParamId add_param(const std::string& name);
  void add_label(StateId q, const std::string& prop);
  void set_initial(std::string_view name);
  void set_initial(StateId q);

  bool has_state(std::string_view name) const;
  bool has_param(std::string_view name) const;
  StateId state(std::string_view name) const;
  ParamId param(std::string_view name) const;
  std::size_t num_states() const { return names_.size(); }

  MachineBuilder& add_transition(StateId from, Operation op, StateId to);
  MachineBuilder& update(std::string_view from, Value delta, std::string_view to);
  MachineBuilder& param_test(std::string_view from, Cmp cmp, std::string_view param, std::string_view to);
  MachineBuilder& const_test(std::string_view from, Cmp cmp, Value c, std::string_view to);

  // Returns `base` if it is not yet a state or parameter name, otherwise
  // the first free variant `base_1`, `base_2`, ...
  std::string fresh_name(const std::string& base) const;

  CounterMachine build() const;

private:
  std::vector<std::string> names_;
  std::vector<std::set<std::string>> labels_;
  std::unordered_map<std::string, StateId> index_;
  std::optional<StateId> initial_;
  std::vector<std::string> params_;
  std::vector<Transition> transitions_;
};

bool valid_name(std::string_view name);

enum class MachineClass { OCA, OCA_S, OCA_P, OCA_PC, OCA_SP, OCA_SPC };
std::string to_string(MachineClass c);

// Tightest class containing the machine.
MachineClass classify(const CounterMachine& a);
bool is_unary(const CounterMachine& a);
bool has_param_tests(const CounterMachine& a);
// True if some constant test other than `=0` occurs.
bool has_constant_tests(const CounterMachine& a);

// ceil(log2 n) for n >= 2, 0 otherwise.
std::size_t log_size(Value n);
std::size_t size(const CounterMachine& a);

struct Step {
  std::size_t transition;
  Configuration target;
  bool operator==(const Step&) const = default;
};

// Value after firing `op` from v, or nothing if disabled.
std::optional<Value> fire(const Operation& op, Value v, std::span<const Value> gamma);

std::vector<Step> successors(const CounterMachine& a, std::span<const Value> gamma, Configuration c);
std::vector<Step> successors(const CounterMachine& a, const ParamInstantiation& gamma, Configuration c);

struct Run {
  ParamInstantiation gamma;
  std::vector<Configuration> configs;
  std::vector<std::size_t> steps; // steps[i] leads from configs[i] to configs[i+1]
};

// Ultimately periodic run.  The finite run ends in a configuration with the
// state of configs[loop_start] and a value at least as large; the steps
// loop_start..end repeat forever, shifted up by drift() each round.
struct LassoRun {
  Run run;
  std::size_t loop_start = 0;
  Value drift() const;
  // Unrolls `rounds` extra copies of the loop into a finite run.
  Run unroll(std::size_t rounds) const;
};

struct Diagnostic {
  std::size_t position;
  std::string reason;
};

// Empty result means the run is legal.
std::optional<Diagnostic> validate_run(const CounterMachine& a, const Run& run);
std::optional<Diagnostic> validate_lasso(const CounterMachine& a, const LassoRun& lasso);
// True if the operation stays enabled when the counter is shifted upwards.
bool shift_safe(const Operation& op);

} // namespace oca
