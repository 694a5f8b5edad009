#include <doctest.h>

#include "oca/a2a.hpp"
#include "oca/galil.hpp"
#include "oca/oracle.hpp"
#include "support/generators.hpp"

using namespace oca;

namespace {

// {(q,+1,q), (q,=x,q')}
CounterMachine up_then_equal() {
  MachineBuilder b;
  b.add_state("q");
  b.add_state("q2");
  b.add_param("x");
  b.update("q", 1, "q");
  b.param_test("q", Cmp::Equal, "x", "q2");
  return b.build();
}

Pbf random_pbf(testgen::Rng& rng, int depth) {
  if (depth == 0 || testgen::coin(rng, 0.3)) {
    switch (testgen::pick(rng, 0, 3)) {
    case 0: return Pbf::top();
    case 1: return Pbf::bottom();
    default: return Pbf::atom(testgen::pick(rng, 0, 3), static_cast<int>(testgen::pick(rng, 0, 2)) - 1);
    }
  }
  auto l = random_pbf(rng, depth - 1), r = random_pbf(rng, depth - 1);
  return testgen::coin(rng) ? Pbf::conj(l, r) : Pbf::disj(l, r);
}

std::size_t size_law(const Pbf& b) {
  if (b.kind == Pbf::Kind::And || b.kind == Pbf::Kind::Or) return size_law(b.args[0]) + size_law(b.args[1]) + 1;
  return 1;
}

std::size_t greater_params(const CounterMachine& a) {
  std::set<ParamId> out;
  for (const auto& t : a.transitions())
    if (auto* p = std::get_if<ParamTest>(&t.op); p && p->cmp == Cmp::Greater) out.insert(p->param);
  return out.size();
}

testgen::MachineShape ocap_shape() {
  testgen::MachineShape s;
  s.max_states = 5;
  s.max_params = 2;
  s.max_transitions = 10;
  return s;
}

// Pads the encoding so that the word holds `boxes` delimiters.
ParameterWord padded(const ParamInstantiation& g, const std::vector<std::string>& order, Value boxes) {
  Value top = 0;
  for (auto& [_, v] : g) top = std::max(top, v);
  return encode_gamma(g, order, boxes - (top + 1));
}

} // namespace

TEST_CASE("pbf_eval and size") {
  CHECK(pbf_eval(Pbf::top(), {}));
  CHECK_FALSE(pbf_eval(Pbf::conj(Pbf::atom(0, 1), Pbf::atom(1, -1)), {{0, 1}}));
  CHECK(pbf_eval(Pbf::disj(Pbf::atom(0, 1), Pbf::atom(1, 0)), {{1, 0}}));
  CHECK(Pbf::conj(Pbf::atom(0, 1), Pbf::disj(Pbf::top(), Pbf::atom(1, 0))).size() == 5);
  testgen::Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    auto b = random_pbf(rng, 5);
    CHECK(b.size() == size_law(b));
  }
}

TEST_CASE("encode and decode") {
  auto w = ParameterWord::parse({"x1", "x2", "x3"}, "# x2 # # x1 x3");
  CHECK(decode(w) == ParamInstantiation{{"x1", 2}, {"x2", 0}, {"x3", 2}});
  CHECK(encode_gamma({{"x", 0}}, {"x"}).render() == "# x");
  CHECK(encode_gamma({{"x1", 2}, {"x2", 0}, {"x3", 2}}, {"x1", "x2", "x3"}).render() == "# x2 # # x1 x3");
  CHECK(encode_gamma({{"x", 0}}, {"x"}, 2).render() == "# x # #");
  CHECK_THROWS_AS(ParameterWord::parse({"x"}, "x #"), FormatError);
  CHECK_THROWS_AS(ParameterWord::parse({"x"}, "# #"), FormatError);
  CHECK_THROWS_AS(ParameterWord::parse({"x"}, "# x x"), FormatError);
  CHECK_THROWS_AS(ParameterWord::parse({"x"}, "# y"), FormatError);
  CHECK(w.position_of(0) == 0);
  CHECK(w.position_of(2) == 3);
  CHECK(w.position_of(4) == 7);

  testgen::Rng rng(5);
  std::vector<std::string> order{"a", "b", "c", "d"};
  for (int i = 0; i < 100; ++i) {
    ParamInstantiation g;
    for (const auto& x : order) g[x] = static_cast<Value>(testgen::pick(rng, 0, 5));
    auto e = encode_gamma(g, order, static_cast<Value>(testgen::pick(rng, 0, 3)));
    CHECK(decode(e) == g);
    CHECK(e.prefix().front() == kBox);
  }
}

TEST_CASE("build_a2a state families") {
  auto t = build_a2a(up_then_equal(), 1);
  CHECK(t.automaton.states.size() == 2 + 1 + 4 + 4);
  CHECK(t.automaton.accepting == std::set<StateId>{t.seen[0]});
  MachineBuilder b;
  b.add_state("q");
  b.add_param("x");
  b.const_test("q", Cmp::Less, 3, "q");
  CHECK_THROWS_AS(build_a2a(b.build(), 0), ClassError);
  MachineBuilder s;
  s.add_state("q");
  s.update("q", 2, "q");
  CHECK_THROWS_AS(build_a2a(s.build(), 0), ClassError);

  testgen::Rng rng(17);
  for (int i = 0; i < 50; ++i) {
    auto a = testgen::random_machine(rng, ocap_shape());
    auto sim = build_a2a(a, 0);
    std::size_t q = a.num_states(), x = a.params().size();
    CHECK(sim.automaton.states.size() == q + 1 + 2 * q + 4 * x + greater_params(a));
    for (const auto& tr : sim.automaton.transitions) {
      std::vector<const Pbf*> stack{&tr.formula};
      while (!stack.empty()) {
        auto* f = stack.back();
        stack.pop_back();
        if (f->kind == Pbf::Kind::Atom) CHECK(f->state < sim.automaton.states.size());
        for (const auto& c : f->args) stack.push_back(&c);
      }
    }
  }
}

TEST_CASE("membership examples") {
  auto t = build_a2a(up_then_equal(), 1).automaton;
  CHECK(membership(t, ParameterWord::parse({"x"}, "# x")));
  CHECK(membership(t, ParameterWord::parse({"x"}, "# # x")));
  MachineBuilder b;
  b.add_state("q");
  b.add_state("q2");
  b.add_param("x");
  b.param_test("q", Cmp::Greater, "x", "q2");
  auto g = build_a2a(b.build(), 1).automaton;
  CHECK_FALSE(membership(g, ParameterWord::parse({"x"}, "# x")));
  CHECK(membership(g, ParameterWord::parse({"x"}, "# x #")) == false); // still at value 0
  CHECK(dump(t).find("q first?") == std::string::npos);
  CHECK(dump(t).find("q # (and (q2 0) (present(x) +1))") != std::string::npos);
}

TEST_CASE("membership matches bounded reachability") {
  testgen::Rng rng(2024);
  int agree = 0, positive = 0;
  for (int i = 0; i < 60; ++i) {
    auto a = testgen::random_machine(rng, ocap_shape());
    for (StateId target = 0; target < a.num_states(); ++target) {
      auto sim = build_a2a(a, target);
      for (const auto& g : testgen::all_gammas(a, 3)) {
        bool expect = bounded_reach_oracle(a, g, target, 6).has_value();
        bool got = membership(sim.automaton, padded(g, a.params(), 6));
        CHECK(got == expect);
        agree += got == expect;
        positive += expect;
      }
    }
  }
  CHECK(positive > 0);
  CHECK(agree > 0);
}

TEST_CASE("run tree for the equality example") {
  auto a = up_then_equal();
  auto sim = build_a2a(a, 1);
  Run run{{{"x", 0}}, {{0, 0}, {1, 0}}, {1}};
  auto tree = construct_accepting_tree(sim, run);
  auto w = encode_gamma(run.gamma, a.params());
  CHECK_FALSE(validate_run_tree(sim.automaton, w, tree).has_value());
  // root, main branch of two nodes, present(x) at 1, search(x) at 1, seen(x) drift at 2
  CHECK(tree.nodes.size() == 6);
  bool present = false;
  for (const auto& n : tree.nodes)
    if (n.state == sim.present[0]) present = n.position == 1;
  CHECK(present);
  auto back = extract_run(sim, tree, w);
  CHECK(back.configs == run.configs);
  CHECK(back.gamma == run.gamma);

  Run empty{{{"x", 0}}, {{0, 0}}, {}};
  auto sim0 = build_a2a(a, 0);
  auto t0 = construct_accepting_tree(sim0, empty);
  CHECK_FALSE(validate_run_tree(sim0.automaton, w, t0).has_value());
  CHECK(extract_run(sim0, t0, w).configs.size() == 1);
  CHECK_THROWS_AS(construct_accepting_tree(sim, empty), ArgumentError);
}

TEST_CASE("run tree diagnostics") {
  MachineBuilder b;
  b.add_state("q");
  b.add_state("q2");
  b.const_test("q", Cmp::Equal, 0, "q2");
  auto a = b.build();
  auto sim = build_a2a(a, 1);
  auto w = ParameterWord({}, {kBox, kBox, kBox, kBox});
  auto tree = construct_accepting_tree(sim, Run{{}, {{0, 0}, {1, 0}}, {0}});
  CHECK_FALSE(validate_run_tree(sim.automaton, w, tree).has_value());
  A2A walker{{"s"}, {"#"}, 0, {}, {{0, kBox, Pbf::atom(0, 1)}, {0, std::nullopt, Pbf::top()}}};
  RunTree late;
  for (Value p = 0; p <= 3; ++p) late.nodes.push_back({0, p, std::size_t{p == 3 ? 1u : 0u}, {}, false});
  for (std::size_t i = 0; i < 3; ++i) late.nodes[i].children.push_back(i + 1);
  auto d = validate_run_tree(walker, w, late);
  REQUIRE(d.has_value());
  CHECK(d->position == 3);
  CHECK(d->reason.find("first?") != std::string::npos);
  late.nodes[3].transition = 0;
  late.nodes[3].children.clear();
  CHECK(validate_run_tree(walker, w, late).has_value()); // (s,+1) unsatisfied
  auto rooted = tree;
  rooted.nodes[0].position = 1;
  CHECK(validate_run_tree(sim.automaton, w, rooted).has_value());
  auto cut = tree;
  cut.nodes[0].children.clear();
  CHECK(validate_run_tree(sim.automaton, w, cut).has_value());
  CHECK_THROWS_AS(extract_run(sim, cut, w), ExtractionError);
}

TEST_CASE("run tree round trip on random witnesses") {
  testgen::Rng rng(99);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    auto a = testgen::random_machine(rng, ocap_shape());
    StateId target = testgen::pick(rng, 0, a.num_states() - 1);
    auto res = solve_reach(a, target, 3);
    if (!res) continue;
    auto sim = build_a2a(a, target);
    auto tree = construct_accepting_tree(sim, *res);
    auto w = encode_gamma(res->gamma, a.params());
    auto d = validate_run_tree(sim.automaton, w, tree);
    CHECK_MESSAGE(!d.has_value(), (d ? d->reason : ""));
    auto back = extract_run(sim, tree, w);
    CHECK(back.configs == res->configs);
    CHECK(back.gamma == res->gamma);
    ++checked;
  }
  CHECK(checked > 50);
}

TEST_CASE("automaton size is quadratic") {
  // Measured on this suite: |T| / size(A)^2 stays below 4.
  testgen::Rng rng(3);
  double worst = 0;
  for (int i = 0; i < 200; ++i) {
    auto a = testgen::random_machine(rng, ocap_shape());
    auto t = build_a2a(a, 0).automaton;
    double s = static_cast<double>(size(a));
    worst = std::max(worst, t.size() / (s * s));
  }
  CHECK(worst <= 4.0);
}
