#include "oca/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "oca/a2a.hpp"
#include "oca/galil.hpp"
#include "oca/io.hpp"
#include "oca/model_check.hpp"

namespace oca {

namespace {

constexpr int kPresent = 0;
constexpr int kAbsent = 1;
constexpr int kInputError = 2;
constexpr int kInternalError = 3;

struct Common {
  std::string machine;
  std::optional<Value> bound;
  std::optional<Value> cap;
  std::optional<std::uint64_t> seed; // accepted and echoed; nothing is randomized
  std::string witness_path;
  bool json = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("machine", c.machine, "machine file (JSON)")->required();
  cmd->add_option("--bound,-b", c.bound, "largest parameter value searched (default: derived from the machine)");
  cmd->add_option("--cap", c.cap, "largest counter value searched (default: the solver's own)");
  cmd->add_option("--seed", c.seed, "recorded in the report; results do not depend on it");
  cmd->add_option("--witness,-w", c.witness_path, "write the witness here instead of stdout");
  cmd->add_flag("--json", c.json, "machine-readable report");
}

Formula load_formula(const std::string& text) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(text, ec)) return parse_formula(read_file(text));
  return parse_formula(text);
}

std::set<StateId> state_list(const CounterMachine& a, const std::string& csv) {
  std::set<StateId> out;
  std::stringstream ss(csv);
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (name.empty()) continue;
    auto q = a.find_state(name);
    if (!q) throw ConfigError("unknown state '" + name + "'");
    out.insert(*q);
  }
  if (out.empty()) throw ConfigError("no states given");
  return out;
}

// Prints the verdict and writes or prints the witness.
int report(const Common& c, const std::string& command, const CounterMachine& a, Value bound,
           const std::optional<WitnessFile>& w, std::ostream& out) {
  std::string text = w ? write_witness(a, *w) : "";
  if (w && !c.witness_path.empty()) {
    std::ofstream f(c.witness_path);
    if (!f) throw FormatError("cannot write '" + c.witness_path + "'");
    f << text;
  }
  if (c.json) {
    nlohmann::json j{{"command", command}, {"verdict", w ? "present" : "absent"}, {"bound", bound}};
    if (c.seed) j["seed"] = *c.seed;
    if (w && c.witness_path.empty()) j["witness"] = nlohmann::json::parse(text);
    if (w && !c.witness_path.empty()) j["witness_file"] = c.witness_path;
    out << j.dump(2) << "\n";
  } else if (w) {
    out << "present (bound " << bound << ")\n";
    if (c.witness_path.empty()) out << text;
    else out << "witness written to " << c.witness_path << "\n";
  } else {
    out << "absent up to bound " << bound << " (parameter and register values <= " << bound
        << "); a larger bound may still find a witness\n";
  }
  return w ? kPresent : kAbsent;
}

int cmd_reach(const Common& c, const std::string& target, std::ostream& out) {
  auto a = parse_machine(read_file(c.machine));
  auto t = a.find_state(target);
  if (!t) throw ConfigError("unknown target state '" + target + "'");
  Value bound = c.bound.value_or(derive_bound(a));
  ReachOptions opts;
  opts.counter_cap = c.cap;
  auto run = solve_reach(a, *t, bound, opts);
  std::optional<WitnessFile> w;
  if (run) w = WitnessFile{"reach", bound, run->gamma, *run, std::nullopt, std::nullopt, std::nullopt, {}};
  return report(c, "reach", a, bound, w, out);
}

int cmd_buchi(const Common& c, const std::string& accepting, std::ostream& out) {
  auto a = parse_machine(read_file(c.machine));
  auto f = state_list(a, accepting);
  Value bound = c.bound.value_or(derive_bound(a));
  auto lasso = solve_buchi(a, f, bound, c.cap, c.cap);
  std::optional<WitnessFile> w;
  if (lasso)
    w = WitnessFile{"buchi", bound, lasso->run.gamma, lasso->run, lasso->loop_start, std::nullopt, std::nullopt, {}};
  return report(c, "buchi", a, bound, w, out);
}

int cmd_mc(const Common& c, const std::string& formula, std::ostream& out) {
  auto a = parse_machine(read_file(c.machine));
  auto phi = load_formula(formula);
  Value bound = c.bound.value_or(derive_bound(a));
  McOptions opts;
  opts.counter_cap = c.cap;
  auto res = model_check(a, phi, bound, opts);
  std::optional<WitnessFile> w;
  if (res) {
    w = WitnessFile{"mc", bound, res->lasso.run.gamma, res->lasso.run, res->lasso.loop_start, true, render(phi), {}};
    for (const auto& [r, v] : res->gamma) w->registers[r] = v;
  }
  return report(c, "mc", a, bound, w, out);
}

int cmd_translate(const std::string& machine, const std::string& mode, const std::string& target,
                  const std::string& formula, const std::string& formula_out, std::ostream& out, std::ostream& err) {
  auto a = parse_machine(read_file(machine));
  auto need_target = [&] {
    if (target.empty()) throw ConfigError("mode '" + mode + "' needs --target");
    auto t = a.find_state(target);
    if (!t) throw ConfigError("unknown target state '" + target + "'");
    return *t;
  };
  if (mode == "a2a") {
    auto sim = build_a2a(a, need_target());
    out << dump(sim.automaton);
    err << "a2a: " << sim.automaton.states.size() << " states, " << sim.automaton.transitions.size()
        << " transitions, size " << sim.automaton.size() << ", machine size " << size(a) << "\n";
    return 0;
  }
  if (mode == "unary") {
    auto phi = formula.empty() ? f_true() : load_formula(formula);
    auto u = succinct_to_unary(a, phi);
    out << write_machine(u.machine);
    std::size_t added = u.machine.num_states() - a.num_states();
    err << "unary: " << u.gadgets.size() << " gadgets, " << added << " new states\n";
    if (!formula_out.empty()) {
      std::ofstream f(formula_out);
      if (!f) throw FormatError("cannot write '" + formula_out + "'");
      f << render(u.formula) << "\n";
    } else if (!formula.empty()) {
      err << "formula: " << render(u.formula) << "\n";
    }
    return 0;
  }
  if (mode == "buchi2reach") {
    auto r = buchi_to_reach(a, need_target());
    out << write_machine(r.machine);
    err << "target: " << r.machine.state_name(r.target) << "\n";
    return 0;
  }
  if (mode == "foldconst") {
    auto f = fold_constants(a);
    out << write_machine(f.machine);
    for (const auto& [x, v] : f.pinned) err << "pinned: " << x << " = " << v << "\n";
    return 0;
  }
  throw ConfigError("unknown mode '" + mode + "' (expected a2a, unary, buchi2reach or foldconst)");
}

// Shares nothing with the solvers: only the validators and the evaluator.
int cmd_check(const std::string& witness, const std::string& machine, const std::string& formula,
              std::ostream& out) {
  auto a = parse_machine(read_file(machine));
  auto w = parse_witness(read_file(witness), a);
  std::optional<Formula> phi;
  if (!formula.empty()) {
    phi = load_formula(formula);
    if (!w.loop_start) throw ConfigError("a formula can only be checked against a lasso witness");
  }
  std::optional<Diagnostic> d;
  LassoRun lasso{w.run, w.loop_start.value_or(0)};
  if (w.loop_start) {
    if (*w.loop_start >= w.run.configs.size()) throw FormatError("'loop_start' is past the end of the run");
    d = validate_lasso(a, lasso);
  } else {
    d = validate_run(a, w.run);
  }
  if (d) {
    out << "invalid witness: position " << d->position << ": " << d->reason << "\n";
    return 1;
  }
  if (phi && !holds(data_word(a, lasso), *phi)) {
    out << "invalid witness: the run does not satisfy " << render(*phi) << "\n";
    return 1;
  }
  out << "valid " << (w.loop_start ? "lasso" : "run") << (phi ? ", formula holds" : "") << "\n";
  return 0;
}

} // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reachability, Büchi and flat freeze LTL model checking for one-counter automata"};
  app.require_subcommand(1);

  Common reach, buchi, mc;
  std::string target, accepting, formula;
  auto* r = app.add_subcommand("reach", "is the target state reachable from (initial, 0)?");
  add_common(r, reach);
  r->add_option("--target,-t", target, "target state")->required();

  auto* b = app.add_subcommand("buchi", "is some accepting state visited infinitely often?");
  add_common(b, buchi);
  b->add_option("--accepting,-a", accepting, "comma-separated accepting states")->required();

  auto* m = app.add_subcommand("mc", "does some run satisfy the flat freeze LTL sentence?");
  add_common(m, mc);
  m->add_option("--formula,-f", formula, "formula text or a file containing it")->required();

  std::string t_machine, mode, t_target, t_formula, t_formula_out;
  auto* t = app.add_subcommand("translate", "print an intermediate construction");
  t->add_option("machine", t_machine, "machine file (JSON)")->required();
  t->add_option("--mode", mode, "a2a, unary, buchi2reach or foldconst")->required();
  t->add_option("--target,-t", t_target, "target (a2a) or accepting (buchi2reach) state");
  t->add_option("--formula,-f", t_formula, "formula translated along with the machine (unary)");
  t->add_option("--formula-out", t_formula_out, "write the translated formula here");

  std::string c_witness, c_machine, c_formula;
  auto* c = app.add_subcommand("check", "re-validate a witness file");
  c->add_option("witness", c_witness, "witness file")->required();
  c->add_option("machine", c_machine, "machine file")->required();
  c->add_option("--formula,-f", c_formula, "formula the lasso must satisfy");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  try {
    if (r->parsed()) return cmd_reach(reach, target, out);
    if (b->parsed()) return cmd_buchi(buchi, accepting, out);
    if (m->parsed()) return cmd_mc(mc, formula, out);
    if (t->parsed()) return cmd_translate(t_machine, mode, t_target, t_formula, t_formula_out, out, err);
    return cmd_check(c_witness, c_machine, c_formula, out);
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
}

} // namespace oca
