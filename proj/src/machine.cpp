#include "oca/machine.hpp"

#include <algorithm>

namespace oca {

char cmp_symbol(Cmp c) {
  switch (c) {
  case Cmp::Less: return '<';
  case Cmp::Equal: return '=';
  case Cmp::Greater: return '>';
  }
  return '?';
}

bool compare(Value lhs, Cmp c, Value rhs) {
  switch (c) {
  case Cmp::Less: return lhs < rhs;
  case Cmp::Equal: return lhs == rhs;
  case Cmp::Greater: return lhs > rhs;
  }
  return false;
}

bool is_zero_test(const Operation& op) {
  auto* t = std::get_if<ConstTest>(&op);
  return t && t->cmp == Cmp::Equal && t->constant == 0;
}

bool valid_name(std::string_view name) {
  if (name.empty()) return false;
  return std::all_of(name.begin(), name.end(), [](char ch) {
    return (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') || ch == '_';
  });
}

std::optional<StateId> CounterMachine::find_state(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

StateId CounterMachine::state(std::string_view name) const {
  auto q = find_state(name);
  if (!q) throw ConfigError("unknown state '" + std::string(name) + "'");
  return *q;
}

std::optional<ParamId> CounterMachine::find_param(std::string_view name) const {
  auto it = std::find(params_.begin(), params_.end(), name);
  if (it == params_.end()) return std::nullopt;
  return static_cast<ParamId>(it - params_.begin());
}

std::vector<Value> CounterMachine::bind(const ParamInstantiation& gamma) const {
  std::vector<Value> out;
  out.reserve(params_.size());
  for (const auto& x : params_) {
    auto it = gamma.find(x);
    if (it == gamma.end()) throw ConfigError("no value for parameter '" + x + "'");
    if (it->second < 0) throw ConfigError("negative value for parameter '" + x + "'");
    out.push_back(it->second);
  }
  return out;
}

ParamInstantiation CounterMachine::unbind(std::span<const Value> values) const {
  ParamInstantiation out;
  for (std::size_t i = 0; i < params_.size(); ++i) out[params_[i]] = values[i];
  return out;
}

std::string CounterMachine::render_op(const Operation& op) const {
  if (auto* u = std::get_if<Update>(&op)) {
    if (u->delta == 0) return "0";
    return (u->delta > 0 ? "+" : "") + std::to_string(u->delta);
  }
  if (auto* t = std::get_if<ParamTest>(&op))
    return std::string(1, cmp_symbol(t->cmp)) + "x:" + params_.at(t->param);
  auto& c = std::get<ConstTest>(op);
  if (c.cmp == Cmp::Equal && c.constant == 0) return "=0";
  return std::string(1, cmp_symbol(c.cmp)) + "c:" + std::to_string(c.constant);
}

MachineBuilder::MachineBuilder(const CounterMachine& base)
    : names_(base.names_), labels_(base.labels_), index_(base.index_), initial_(base.initial_),
      params_(base.params_), transitions_(base.transitions_) {}

StateId MachineBuilder::add_state(const std::string& name, std::set<std::string> labels) {
  if (!valid_name(name)) throw ConfigError("invalid state name '" + name + "'");
  if (index_.count(name)) throw ConfigError("duplicate state '" + name + "'");
  for (const auto& p : labels)
    if (p.empty()) throw ConfigError("empty proposition in labels of '" + name + "'");
  StateId q = names_.size();
  names_.push_back(name);
  labels_.push_back(std::move(labels));
  index_.emplace(name, q);
  return q;
}

ParamId MachineBuilder::add_param(const std::string& name) {
  if (!valid_name(name)) throw ConfigError("invalid parameter name '" + name + "'");
  if (has_param(name)) throw ConfigError("duplicate parameter '" + name + "'");
  params_.push_back(name);
  return params_.size() - 1;
}

void MachineBuilder::add_label(StateId q, const std::string& prop) { labels_.at(q).insert(prop); }

void MachineBuilder::set_initial(std::string_view name) { initial_ = state(name); }
void MachineBuilder::set_initial(StateId q) {
  if (q >= names_.size()) throw ConfigError("initial state out of range");
  initial_ = q;
}

bool MachineBuilder::has_state(std::string_view name) const { return index_.count(std::string(name)) > 0; }
bool MachineBuilder::has_param(std::string_view name) const {
  return std::find(params_.begin(), params_.end(), name) != params_.end();
}

StateId MachineBuilder::state(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw ConfigError("unknown state '" + std::string(name) + "'");
  return it->second;
}

ParamId MachineBuilder::param(std::string_view name) const {
  auto it = std::find(params_.begin(), params_.end(), name);
  if (it == params_.end()) throw ConfigError("unknown parameter '" + std::string(name) + "'");
  return static_cast<ParamId>(it - params_.begin());
}

MachineBuilder& MachineBuilder::add_transition(StateId from, Operation op, StateId to) {
  if (from >= names_.size() || to >= names_.size()) throw ConfigError("transition endpoint out of range");
  if (auto* t = std::get_if<ParamTest>(&op); t && t->param >= params_.size())
    throw ConfigError("transition references an undeclared parameter");
  if (auto* c = std::get_if<ConstTest>(&op); c && c->constant < 0)
    throw ConfigError("negative constant in test");
  transitions_.push_back({from, op, to});
  return *this;
}

MachineBuilder& MachineBuilder::update(std::string_view from, Value delta, std::string_view to) {
  return add_transition(state(from), Update{delta}, state(to));
}

MachineBuilder& MachineBuilder::param_test(std::string_view from, Cmp cmp, std::string_view x, std::string_view to) {
  return add_transition(state(from), ParamTest{cmp, param(x)}, state(to));
}

MachineBuilder& MachineBuilder::const_test(std::string_view from, Cmp cmp, Value c, std::string_view to) {
  return add_transition(state(from), ConstTest{cmp, c}, state(to));
}

std::string MachineBuilder::fresh_name(const std::string& base) const {
  if (!has_state(base) && !has_param(base)) return base;
  for (std::size_t k = 1;; ++k) {
    std::string candidate = base + "_" + std::to_string(k);
    if (!has_state(candidate) && !has_param(candidate)) return candidate;
  }
}

CounterMachine MachineBuilder::build() const {
  if (names_.empty()) throw ConfigError("machine has no states");
  CounterMachine m;
  m.names_ = names_;
  m.labels_ = labels_;
  m.index_ = index_;
  m.initial_ = initial_.value_or(0);
  m.params_ = params_;
  m.transitions_ = transitions_;
  m.outgoing_.assign(names_.size(), {});
  for (std::size_t i = 0; i < transitions_.size(); ++i) m.outgoing_[transitions_[i].from].push_back(i);
  return m;
}

std::string to_string(MachineClass c) {
  switch (c) {
  case MachineClass::OCA: return "OCA";
  case MachineClass::OCA_S: return "OCA(S)";
  case MachineClass::OCA_P: return "OCA(P)";
  case MachineClass::OCA_PC: return "OCA(P,C)";
  case MachineClass::OCA_SP: return "OCA(S,P)";
  case MachineClass::OCA_SPC: return "OCA(S,P,C)";
  }
  return "?";
}

bool is_unary(const CounterMachine& a) {
  return std::all_of(a.transitions().begin(), a.transitions().end(), [](const Transition& t) {
    auto* u = std::get_if<Update>(&t.op);
    return !u || (u->delta >= -1 && u->delta <= 1);
  });
}

bool has_param_tests(const CounterMachine& a) {
  return std::any_of(a.transitions().begin(), a.transitions().end(),
                     [](const Transition& t) { return std::holds_alternative<ParamTest>(t.op); });
}

bool has_constant_tests(const CounterMachine& a) {
  return std::any_of(a.transitions().begin(), a.transitions().end(), [](const Transition& t) {
    return std::holds_alternative<ConstTest>(t.op) && !is_zero_test(t.op);
  });
}

MachineClass classify(const CounterMachine& a) {
  bool s = !is_unary(a), p = has_param_tests(a), c = has_constant_tests(a);
  if (c) return s ? MachineClass::OCA_SPC : MachineClass::OCA_PC;
  if (s) return p ? MachineClass::OCA_SP : MachineClass::OCA_S;
  return p ? MachineClass::OCA_P : MachineClass::OCA;
}

std::size_t log_size(Value n) {
  if (n < 2) return 0;
  std::size_t bits = 0;
  Value m = n - 1;
  while (m > 0) {
    ++bits;
    m >>= 1;
  }
  return bits;
}

std::size_t size(const CounterMachine& a) {
  std::size_t total = a.num_states() + a.params().size() + a.transitions().size();
  for (StateId q = 0; q < a.num_states(); ++q) total += a.labels(q).size();
  for (const auto& t : a.transitions()) {
    if (auto* u = std::get_if<Update>(&t.op)) {
      if (u->delta != 0) total += log_size(u->delta < 0 ? -u->delta : u->delta);
    } else if (auto* c = std::get_if<ConstTest>(&t.op)) {
      total += log_size(c->constant);
    }
  }
  return total;
}

std::optional<Value> fire(const Operation& op, Value v, std::span<const Value> gamma) {
  if (auto* u = std::get_if<Update>(&op)) {
    if (v + u->delta < 0) return std::nullopt;
    return v + u->delta;
  }
  if (auto* t = std::get_if<ParamTest>(&op)) {
    if (t->param >= gamma.size()) throw ConfigError("no value for parameter");
    return compare(v, t->cmp, gamma[t->param]) ? std::optional<Value>(v) : std::nullopt;
  }
  auto& c = std::get<ConstTest>(op);
  return compare(v, c.cmp, c.constant) ? std::optional<Value>(v) : std::nullopt;
}

std::vector<Step> successors(const CounterMachine& a, std::span<const Value> gamma, Configuration c) {
  if (c.state >= a.num_states()) throw ConfigError("configuration state out of range");
  if (c.value < 0) throw ConfigError("negative counter value");
  if (gamma.size() != a.params().size()) throw ConfigError("parameter vector has wrong length");
  std::vector<Step> out;
  for (std::size_t i : a.outgoing(c.state)) {
    const auto& t = a.transitions()[i];
    if (auto v = fire(t.op, c.value, gamma)) out.push_back({i, {t.to, *v}});
  }
  return out;
}

std::vector<Step> successors(const CounterMachine& a, const ParamInstantiation& gamma, Configuration c) {
  auto dense = a.bind(gamma);
  return successors(a, dense, c);
}

Value LassoRun::drift() const {
  return run.configs.back().value - run.configs.at(loop_start).value;
}

Run LassoRun::unroll(std::size_t rounds) const {
  Run out = run;
  Value d = drift();
  std::size_t end = run.configs.size() - 1;
  for (std::size_t r = 1; r <= rounds; ++r) {
    for (std::size_t i = loop_start; i < end; ++i) {
      out.steps.push_back(run.steps[i]);
      Configuration c = run.configs[i + 1];
      c.value += d * static_cast<Value>(r);
      out.configs.push_back(c);
    }
  }
  return out;
}

std::optional<Diagnostic> validate_run(const CounterMachine& a, const Run& run) {
  if (run.configs.empty()) return Diagnostic{0, "empty run"};
  if (run.steps.size() + 1 != run.configs.size())
    return Diagnostic{0, "run has " + std::to_string(run.configs.size()) + " configurations but " +
                             std::to_string(run.steps.size()) + " steps"};
  std::vector<Value> gamma;
  for (const auto& x : a.params()) {
    auto it = run.gamma.find(x);
    if (it == run.gamma.end()) return Diagnostic{0, "no value for parameter '" + x + "'"};
    if (it->second < 0) return Diagnostic{0, "negative value for parameter '" + x + "'"};
    gamma.push_back(it->second);
  }
  for (std::size_t i = 0; i < run.configs.size(); ++i) {
    const auto& c = run.configs[i];
    if (c.state >= a.num_states()) return Diagnostic{i, "state out of range"};
    if (c.value < 0) return Diagnostic{i, "negative counter"};
  }
  for (std::size_t i = 0; i < run.steps.size(); ++i) {
    if (run.steps[i] >= a.transitions().size()) return Diagnostic{i, "transition index out of range"};
    const auto& t = a.transitions()[run.steps[i]];
    const auto& c = run.configs[i];
    const auto& n = run.configs[i + 1];
    if (t.from != c.state) return Diagnostic{i, "transition does not leave " + a.state_name(c.state)};
    if (t.to != n.state) return Diagnostic{i, "transition does not enter " + a.state_name(n.state)};
    auto v = fire(t.op, c.value, gamma);
    if (!v) {
      if (std::holds_alternative<Update>(t.op)) return Diagnostic{i, "negative counter"};
      return Diagnostic{i, "test " + a.render_op(t.op) + " fails at value " + std::to_string(c.value)};
    }
    if (*v != n.value)
      return Diagnostic{i, "value " + std::to_string(n.value) + " does not follow from " + a.render_op(t.op)};
  }
  return std::nullopt;
}

bool shift_safe(const Operation& op) {
  if (std::holds_alternative<Update>(op)) return true;
  if (auto* t = std::get_if<ParamTest>(&op)) return t->cmp == Cmp::Greater;
  return std::get<ConstTest>(op).cmp == Cmp::Greater;
}

std::optional<Diagnostic> validate_lasso(const CounterMachine& a, const LassoRun& lasso) {
  if (auto d = validate_run(a, lasso.run)) return d;
  const auto& cs = lasso.run.configs;
  if (lasso.loop_start + 1 >= cs.size()) return Diagnostic{lasso.loop_start, "empty loop"};
  if (cs.back().state != cs[lasso.loop_start].state)
    return Diagnostic{cs.size() - 1, "loop does not return to its start state"};
  Value d = lasso.drift();
  if (d < 0) return Diagnostic{cs.size() - 1, "loop ends below its start value"};
  if (d > 0) {
    for (std::size_t i = lasso.loop_start; i + 1 < cs.size(); ++i)
      if (!shift_safe(a.transitions()[lasso.run.steps[i]].op))
        return Diagnostic{i, "pumped loop contains a test that fails once shifted"};
  }
  return std::nullopt;
}

} // namespace oca
