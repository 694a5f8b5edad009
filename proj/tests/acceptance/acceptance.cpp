// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <unistd.h>

#include "oca/a2a.hpp"
#include "oca/cli.hpp"
#include "oca/galil.hpp"
#include "oca/io.hpp"
#include "oca/model_check.hpp"
#include "oca/oracle.hpp"
#include "support/formulas.hpp"
#include "support/generators.hpp"
#include "support/mc_suite.hpp"
#include "support/oracles.hpp"

using namespace oca;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok;
  std::string detail;
};

class Scratch {
public:
  Scratch() : dir_(fs::temp_directory_path() / ("ocaflat_acceptance_" + std::to_string(::getpid()))) {
    fs::create_directories(dir_);
  }
  ~Scratch() { fs::remove_all(dir_); }
  std::string write(const std::string& name, const std::string& text) const {
    auto p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

private:
  fs::path dir_;
};

// Runs `check` in-process on a witness written to disk.
int cmd_check(const Scratch& s, const CounterMachine& a, const WitnessFile& w, const std::string& formula = "") {
  std::vector<std::string> args{"ocaflat", "check", s.write("w.json", write_witness(a, w)),
                                s.write("m.json", write_machine(a))};
  if (!formula.empty()) {
    args.push_back("--formula");
    args.push_back(formula);
  }
  std::vector<char*> argv;
  for (auto& x : args) argv.push_back(x.data());
  std::ostringstream out, err;
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

ParameterWord padded(const ParamInstantiation& g, const std::vector<std::string>& order, Value boxes) {
  Value top = 0;
  for (auto& [_, v] : g) top = std::max(top, v);
  return encode_gamma(g, order, boxes - (top + 1));
}

Outcome a2a_suite() {
  testgen::Rng rng(3301);
  testgen::MachineShape shape;
  shape.max_states = 5;
  shape.max_params = 2;
  shape.max_transitions = 10;
  std::size_t cases = 0, agree = 0;
  for (int i = 0; i < 200; ++i) {
    auto a = testgen::random_machine(rng, shape);
    for (StateId target = 0; target < a.num_states(); ++target) {
      auto sim = build_a2a(a, target);
      for (const auto& g : testgen::all_gammas(a, 3)) {
        bool expect = bounded_reach_oracle(a, g, target, 6).has_value();
        agree += membership(sim.automaton, padded(g, a.params(), 6)) == expect;
        ++cases;
      }
    }
  }
  return {agree == cases, std::to_string(agree) + "/" + std::to_string(cases) + " (machine, target, valuation) cases agree"};
}

Outcome galil_suite() {
  testgen::Rng rng(3302);
  testgen::MachineShape shape;
  shape.max_states = 6;
  shape.max_transitions = 12;
  std::size_t cases = 0, agree = 0;
  for (int i = 0; i < 200; ++i) {
    auto a = testgen::random_machine(rng, shape);
    std::size_t n = a.num_states();
    for (StateId q = 0; q < n; ++q)
      for (Value v = 0; v <= 12; ++v)
        for (Value v2 = 0; v2 <= 12; ++v2) {
          Value lo = std::min(v, v2), hi = std::max(v, v2);
          auto ends = testoracle::interval_endpoints(a, q, v, lo, hi, static_cast<std::size_t>(hi - lo + 1) * n * n);
          for (StateId q2 = 0; q2 < n; ++q2) {
            agree += vv_run(a, q, q2, v, v2) == (ends.count({q2, v2}) > 0);
            agree += vv_return(a, q, q2, v, v2) == (ends.count({q2, v}) > 0);
            cases += 2;
          }
        }
  }
  return {agree == cases, std::to_string(agree) + "/" + std::to_string(cases) + " queries agree"};
}

Outcome solver_suite() {
  Scratch s;
  testgen::Rng rng(3303);
  testgen::MachineShape shape;
  shape.max_states = 5;
  shape.max_params = 2;
  shape.max_const = 3;
  shape.test_ratio = 0.45;
  const Value bound = 4;
  int agree = 0, present = 0, certified = 0;
  for (int i = 0; i < 200; ++i) {
    auto a = testgen::random_machine(rng, shape);
    StateId target = testgen::pick(rng, 0, a.num_states() - 1);
    Value q = static_cast<Value>(a.num_states());
    auto w = solve_reach(a, target, bound);
    agree += w.has_value() == testoracle::exists_gamma_reach(a, target, bound, bound + q * q * q);
    if (w) {
      ++present;
      WitnessFile f{"reach", bound, w->gamma, *w, std::nullopt, std::nullopt, std::nullopt, {}};
      certified += cmd_check(s, a, f) == 0 && w->configs.back().state == target;
    }
  }
  return {agree == 200 && certified == present, std::to_string(agree) + "/200 verdicts agree, " +
                                                    std::to_string(certified) + "/" + std::to_string(present) +
                                                    " witnesses accepted by check"};
}

Outcome buchi_suite() {
  testgen::Rng rng(41);
  testgen::MachineShape shape;
  shape.max_states = 4;
  shape.max_params = 2;
  shape.max_transitions = 8;
  int agree = 0, positive = 0, valid = 0;
  for (int i = 0; i < 100; ++i) {
    auto a = testgen::random_machine(rng, shape);
    StateId q_f = testgen::pick(rng, 0, a.num_states() - 1);
    Value n = static_cast<Value>(a.num_states());
    bool expect = false;
    for (const auto& g : testgen::all_gammas(a, 3))
      if (rep_reach_oracle(a, g, {q_f}, 3 + n * n * n)) expect = true;
    auto r = buchi_to_reach(a, q_f);
    ReachOptions opts;
    for (const auto& x : a.params()) opts.param_bounds[x] = 3;
    if (r.dummy) opts.param_bounds[*r.dummy] = 3;
    auto res = ocap_reach(r.machine, r.target, 3 + n, opts);
    agree += res.has_value() == expect;
    if (res) {
      ++positive;
      valid += !validate_lasso(a, lasso_from_reach(a, r, *res)).has_value();
    }
  }
  return {agree == 100 && valid == positive, std::to_string(agree) + "/100 verdicts agree, " +
                                                 std::to_string(valid) + "/" + std::to_string(positive) +
                                                 " lassos replay"};
}

Outcome counting_suite() {
  std::vector<std::string> expected{"#6", "100", "#6", "010", "#6", "110", "#6", "001", "#6", "101", "#6", "011", "#6"};
  bool six = counting_sequence(6) == expected;
  bool enumerates = true;
  for (Value z = 2; z <= 9; ++z) {
    std::vector<std::string> blocks;
    for (const auto& tok : counting_sequence(z))
      if (tok[0] != '#') blocks.push_back(tok);
    enumerates &= blocks.size() == static_cast<std::size_t>(z);
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      Value v = 0;
      for (std::size_t i = 0; i < blocks[k].size(); ++i) v += (blocks[k][i] == '1') << i;
      enumerates &= v == static_cast<Value>(k + 1);
    }
  }

  // Counter on gadget traversals, then on single-bit mutations of them.
  testgen::Rng rng(3305);
  int satisfied = 0, traversals = 0, falsified = 0, mutations = 0;
  for (Value z : {2, 3, 5, 6, 7, 9}) {
    MachineBuilder b;
    b.add_state("q");
    b.add_state("q2");
    b.update("q", z, "q2");
    b.update("q2", 0, "q2");
    auto a = b.build();
    auto u = succinct_to_unary(a, f_true());
    auto counter = counter_formula(u.zs);
    LassoRun l;
    l.run.configs = {{0, 0}, {1, z}, {1, z}};
    l.run.steps = {0, 1};
    l.loop_start = 1;
    auto word = data_word(u.machine, expand_lasso(u, l));
    ++traversals;
    satisfied += holds(word, counter);
    std::vector<std::size_t> bit_positions;
    for (std::size_t i = 0; i < word.prefix.size(); ++i)
      if (word.prefix[i].props.count(kBitOne) || word.prefix[i].props.count(kBitZero)) bit_positions.push_back(i);
    for (int m = 0; m < 9; ++m) {
      auto bad = word;
      auto& letter = bad.prefix[bit_positions[testgen::pick(rng, 0, bit_positions.size() - 1)]].props;
      bool one = letter.count(kBitOne) > 0;
      letter.erase(one ? kBitOne : kBitZero);
      letter.insert(one ? kBitZero : kBitOne);
      falsified += !holds(bad, counter);
      ++mutations;
    }
  }
  bool ok = six && enumerates && satisfied == traversals && falsified == mutations && mutations >= 50;
  return {ok, std::string("z=6 sequence ") + (six ? "matches" : "differs") + ", z=2..9 " +
                  (enumerates ? "enumerate 1..z" : "do not enumerate") + ", Counter holds on " +
                  std::to_string(satisfied) + "/" + std::to_string(traversals) + " traversals and fails on " +
                  std::to_string(falsified) + "/" + std::to_string(mutations) + " mutations"};
}

Outcome mc_suite() {
  Scratch s;
  auto suite = testgen::mc_suite();
  int agree = 0, present = 0, certified = 0;
  for (const auto& c : suite) {
    auto phi = parse_formula(c.formula);
    bool expect = testoracle::find_lasso_model(c.machine, phi, 12).has_value();
    auto w = model_check(c.machine, phi, 4);
    agree += w.has_value() == expect;
    if (w) {
      ++present;
      WitnessFile f{"mc", 4, w->lasso.run.gamma, w->lasso.run, w->lasso.loop_start, true, c.formula, {}};
      certified += cmd_check(s, c.machine, f, c.formula) == 0;
    }
  }
  int n = static_cast<int>(suite.size());
  return {n >= 10 && agree == n && certified == present,
          std::to_string(agree) + "/" + std::to_string(n) + " verdicts agree, " + std::to_string(certified) + "/" +
              std::to_string(present) + " witnesses accepted by check"};
}

Outcome semantics_suite() {
  testgen::Rng rng(3307);
  testgen::FormulaShape shape;
  shape.depth = 3;
  int pass = 0;
  for (int i = 0; i < 500; ++i) {
    auto a = testgen::random_sentence(rng, shape), b = testgen::random_sentence(rng, shape);
    auto w = testgen::random_word(rng, shape.props, 3, 3, 4, i % 2 ? 2 : 0);
    bool ok = is_flat(nnf(a)) == is_flat(a);
    for (std::size_t pos = 0; pos < 6; ++pos) {
      auto at = [&](const Formula& f) { return eval(w, pos, {}, f); };
      ok &= at(neg(until(a, b))) == at(release(neg(a), neg(b)));
      ok &= at(neg(release(a, b))) == at(until(neg(a), neg(b)));
      ok &= at(until(a, b)) == at(disj(b, conj(a, next(until(a, b)))));
      ok &= at(release(a, b)) == at(conj(b, disj(a, next(release(a, b)))));
      ok &= at(a) == at(nnf(a));
      ok &= at(neg(a)) == at(nnf(neg(a)));
    }
    pass += ok;
  }
  return {pass == 500, std::to_string(pass) + "/500 (formula, lasso) pairs satisfy every law"};
}

} // namespace

int main() {
  struct Criterion {
    std::string name;
    double limit;
    std::function<Outcome()> run;
  };
  std::vector<Criterion> criteria{
      {"A2A membership vs bounded reachability", 60, a2a_suite},
      {"vv_run/vv_return vs interval-run enumeration", 60, galil_suite},
      {"ocap_reach vs valuation enumeration, B=4", 120, solver_suite},
      {"repeated reachability through reachability", 120, buchi_suite},
      {"binary counting gadget and Counter formula", 30, counting_suite},
      {"end-to-end model checking vs lasso enumeration", 120, mc_suite},
      {"freeze LTL semantic laws", 60, semantics_suite},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = o.ok && secs < criteria[i].limit;
    failed += !ok;
    std::printf("%s %zu %s: %s; %.2fs (limit %.0fs)\n", ok ? "PASS" : "FAIL", i + 1, criteria[i].name.c_str(),
                o.detail.c_str(), secs, criteria[i].limit);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
