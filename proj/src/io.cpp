#include "oca/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace oca {

using nlohmann::json;

namespace {

Value parse_int(std::string_view s, const std::string& whole) {
  Value v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) throw FormatError("bad number in op '" + whole + "'");
  return v;
}

void only_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& what) {
  if (!j.is_object()) throw FormatError(what + " must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok |= k == a;
    if (!ok) throw FormatError("unknown key '" + k + "' in " + what);
  }
}

const json& need(const json& j, const char* key, const std::string& what) {
  auto it = j.find(key);
  if (it == j.end()) throw FormatError("missing key '" + std::string(key) + "' in " + what);
  return *it;
}

std::string need_string(const json& j, const std::string& what) {
  if (!j.is_string()) throw FormatError(what + " must be a string");
  return j.get<std::string>();
}

Value need_int(const json& j, const std::string& what) {
  if (!j.is_number_integer()) throw FormatError(what + " must be an integer");
  return j.get<Value>();
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
}

} // namespace

Operation parse_op(const std::string& text, const std::vector<std::string>& params) {
  if (text == "0") return Update{0};
  if (text == "=0") return ConstTest{Cmp::Equal, 0};
  if (text.empty()) throw FormatError("empty op");
  if (text[0] == '+' || text[0] == '-') {
    Value v = parse_int(std::string_view(text).substr(1), text);
    if (v < 0) throw FormatError("bad op '" + text + "'");
    return Update{text[0] == '-' ? -v : v};
  }
  Cmp cmp;
  switch (text[0]) {
  case '<': cmp = Cmp::Less; break;
  case '=': cmp = Cmp::Equal; break;
  case '>': cmp = Cmp::Greater; break;
  default: throw FormatError("bad op '" + text + "'");
  }
  if (text.size() < 3 || text[2] != ':') throw FormatError("bad op '" + text + "'");
  std::string rest = text.substr(3);
  if (text[1] == 'c') {
    if (rest.empty() || rest[0] == '-' || rest[0] == '+') throw FormatError("constant must be natural in '" + text + "'");
    return ConstTest{cmp, parse_int(rest, text)};
  }
  if (text[1] == 'x') {
    for (std::size_t i = 0; i < params.size(); ++i)
      if (params[i] == rest) return ParamTest{cmp, i};
    throw FormatError("unknown parameter '" + rest + "' in op '" + text + "'");
  }
  throw FormatError("bad op '" + text + "'");
}

CounterMachine parse_machine(const std::string& json_text) {
  json j = parse_json(json_text);
  const std::string what = "machine file";
  only_keys(j, {"states", "initial", "params", "labels", "transitions"}, what);
  MachineBuilder b;
  const json& states = need(j, "states", what);
  if (!states.is_array()) throw FormatError("'states' must be a list");
  for (const auto& s : states) b.add_state(need_string(s, "state name"));
  std::vector<std::string> params;
  if (j.contains("params")) {
    if (!j["params"].is_array()) throw FormatError("'params' must be a list");
    for (const auto& x : j["params"]) {
      params.push_back(need_string(x, "parameter name"));
      b.add_param(params.back());
    }
  }
  if (j.contains("labels")) {
    if (!j["labels"].is_object()) throw FormatError("'labels' must be a map");
    for (const auto& [q, props] : j["labels"].items()) {
      if (!b.has_state(q)) throw FormatError("labels for unknown state '" + q + "'");
      if (!props.is_array()) throw FormatError("labels of '" + q + "' must be a list");
      for (const auto& p : props) b.add_label(b.state(q), need_string(p, "proposition"));
    }
  }
  const json& ts = need(j, "transitions", what);
  if (!ts.is_array()) throw FormatError("'transitions' must be a list");
  for (const auto& t : ts) {
    only_keys(t, {"from", "op", "to"}, "transition");
    std::string from = need_string(need(t, "from", "transition"), "'from'");
    std::string to = need_string(need(t, "to", "transition"), "'to'");
    if (!b.has_state(from)) throw FormatError("transition from unknown state '" + from + "'");
    if (!b.has_state(to)) throw FormatError("transition to unknown state '" + to + "'");
    b.add_transition(b.state(from), parse_op(need_string(need(t, "op", "transition"), "'op'"), params), b.state(to));
  }
  std::string init = need_string(need(j, "initial", what), "'initial'");
  if (!b.has_state(init)) throw FormatError("unknown initial state '" + init + "'");
  b.set_initial(init);
  return b.build();
}

std::string write_machine(const CounterMachine& a) {
  json j;
  j["states"] = json::array();
  json labels = json::object();
  for (StateId q = 0; q < a.num_states(); ++q) {
    j["states"].push_back(a.state_name(q));
    if (!a.labels(q).empty()) labels[a.state_name(q)] = a.labels(q);
  }
  j["initial"] = a.state_name(a.initial());
  j["params"] = a.params();
  j["labels"] = labels;
  j["transitions"] = json::array();
  for (const auto& t : a.transitions())
    j["transitions"].push_back({{"from", a.state_name(t.from)}, {"op", a.render_op(t.op)}, {"to", a.state_name(t.to)}});
  return j.dump(2) + "\n";
}

std::string write_witness(const CounterMachine& a, const WitnessFile& w) {
  json j;
  j["kind"] = w.kind;
  if (w.bound) j["bound"] = *w.bound;
  j["gamma"] = json::object();
  for (const auto& [x, v] : w.gamma) j["gamma"][x] = v;
  j["run"] = json::array();
  for (std::size_t i = 0; i < w.run.configs.size(); ++i) {
    const auto& c = w.run.configs[i];
    json via = i == 0 ? json(nullptr) : json(w.run.steps[i - 1]);
    j["run"].push_back({{"state", a.state_name(c.state)}, {"value", c.value}, {"via", via}});
  }
  if (w.loop_start) j["loop_start"] = *w.loop_start;
  if (w.formula) j["formula"] = *w.formula;
  if (w.formula_holds) j["formula_holds"] = *w.formula_holds;
  if (!w.registers.empty()) {
    j["registers"] = json::object();
    for (const auto& [r, v] : w.registers) j["registers"][r] = v;
  }
  return j.dump(2) + "\n";
}

WitnessFile parse_witness(const std::string& json_text, const CounterMachine& a) {
  json j = parse_json(json_text);
  const std::string what = "witness file";
  only_keys(j, {"kind", "bound", "gamma", "run", "loop_start", "formula", "formula_holds", "registers"}, what);
  WitnessFile w;
  if (j.contains("kind")) w.kind = need_string(j["kind"], "'kind'");
  if (j.contains("bound")) w.bound = need_int(j["bound"], "'bound'");
  const json& gamma = need(j, "gamma", what);
  if (!gamma.is_object()) throw FormatError("'gamma' must be a map");
  for (const auto& [x, v] : gamma.items()) {
    if (!a.find_param(x)) throw FormatError("gamma names unknown parameter '" + x + "'");
    w.gamma[x] = need_int(v, "gamma value");
  }
  for (const auto& x : a.params())
    if (!w.gamma.count(x)) throw FormatError("gamma has no value for parameter '" + x + "'");
  const json& run = need(j, "run", what);
  if (!run.is_array() || run.empty()) throw FormatError("'run' must be a non-empty list");
  for (std::size_t i = 0; i < run.size(); ++i) {
    only_keys(run[i], {"state", "value", "via"}, "run entry");
    std::string name = need_string(need(run[i], "state", "run entry"), "'state'");
    auto q = a.find_state(name);
    if (!q) throw FormatError("run names unknown state '" + name + "'");
    w.run.configs.push_back({*q, need_int(need(run[i], "value", "run entry"), "'value'")});
    const json& via = run[i].contains("via") ? run[i]["via"] : json(nullptr);
    if (i == 0) {
      if (!via.is_null()) throw FormatError("first run entry must have \"via\": null");
      continue;
    }
    Value t = need_int(via, "'via'");
    if (t < 0 || static_cast<std::size_t>(t) >= a.transitions().size())
      throw FormatError("'via' " + std::to_string(t) + " is not a transition index");
    w.run.steps.push_back(static_cast<std::size_t>(t));
  }
  w.run.gamma = w.gamma;
  if (j.contains("loop_start")) {
    Value l = need_int(j["loop_start"], "'loop_start'");
    if (l < 0) throw FormatError("'loop_start' must be natural");
    w.loop_start = static_cast<std::size_t>(l);
  }
  if (j.contains("formula")) w.formula = need_string(j["formula"], "'formula'");
  if (j.contains("formula_holds")) {
    if (!j["formula_holds"].is_boolean()) throw FormatError("'formula_holds' must be a boolean");
    w.formula_holds = j["formula_holds"].get<bool>();
  }
  if (j.contains("registers")) {
    if (!j["registers"].is_object()) throw FormatError("'registers' must be a map");
    for (const auto& [r, v] : j["registers"].items()) w.registers[r] = need_int(v, "register value");
  }
  return w;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace oca
