#include <doctest.h>

#include "oca/model_check.hpp"
#include "support/formulas.hpp"
#include "support/generators.hpp"
#include "support/mc_suite.hpp"
#include "support/oracles.hpp"

using namespace oca;
using testgen::self_loop;

namespace {

void check_witness(const CounterMachine& a, const Formula& phi, const McWitness& w) {
  REQUIRE_FALSE(validate_lasso(a, w.lasso).has_value());
  CHECK_NOTHROW(w.word.check());
  CHECK(holds(data_word(a, w.lasso), phi));
}

} // namespace

TEST_CASE("examples") {
  auto g = parse_formula("G p");
  auto w = model_check(self_loop(1, {"p"}), g, 4);
  REQUIRE(w);
  check_witness(self_loop(1, {"p"}), g, *w);

  for (Value b : {0, 3, 8})
    CHECK_FALSE(model_check(self_loop(1), parse_formula("F @r. G ([<r] | [=r])"), b));

  auto frozen = parse_formula("F @r. G [=r]");
  auto z = model_check(self_loop(0), frozen, 4);
  REQUIRE(z);
  check_witness(self_loop(0), frozen, *z);
  for (const auto& d : z->word.prefix) CHECK(d.value == 0);
  for (const auto& d : z->word.loop) CHECK(d.value == 0);
  CHECK(z->word.drift == 0);
}

TEST_CASE("input errors") {
  auto nonflat = parse_formula("G @r. (req -> F (serve & [=r]))");
  try {
    model_check(testgen::ticket_machine(), nonflat, 4);
    FAIL("expected an error");
  } catch (const ArgumentError& e) {
    std::string msg = e.what();
    CHECK(msg.find("not flat") != std::string::npos);
    CHECK(msg.find(" U ") != std::string::npos);
    CHECK(msg.find("polarity") != std::string::npos);
  }
  CHECK_THROWS_AS(model_check(self_loop(1), parse_formula("F [=r]"), 4), ArgumentError);
  MachineBuilder b;
  b.add_state("q");
  b.add_param("x");
  b.param_test("q", Cmp::Equal, "x", "q");
  CHECK_THROWS_AS(model_check(b.build(), parse_formula("true"), 4), ClassError);
}

TEST_CASE("handcrafted suite agrees with lasso enumeration") {
  int positive = 0;
  for (const auto& c : testgen::mc_suite()) {
    CAPTURE(c.name);
    auto phi = parse_formula(c.formula);
    bool expect = testoracle::find_lasso_model(c.machine, phi, 12).has_value();
    McStats stats;
    auto w = model_check(c.machine, phi, 4, {}, &stats);
    CHECK(w.has_value() == expect);
    CHECK(stats.product_states > 0);
    if (w) {
      check_witness(c.machine, phi, *w);
      ++positive;
    }
  }
  CHECK(positive >= 5);
}

TEST_CASE("random instances agree with lasso enumeration") {
  testgen::Rng rng(99);
  testgen::MachineShape ms;
  ms.max_states = 3;
  ms.max_transitions = 5;
  ms.props = {"p", "q"};
  testgen::FormulaShape fs;
  fs.regs = {"r"};
  fs.depth = 3;
  int checked = 0, positive = 0;
  for (int i = 0; i < 200; ++i) {
    ms.max_update = i % 4 == 3 ? 3 : 1;
    auto a = testgen::random_machine(rng, ms);
    auto phi = testgen::random_sentence(rng, fs);
    if (!is_flat(phi)) continue;
    bool gave_up = false;
    auto o = testoracle::find_lasso_model(a, phi, 10, 200000, &gave_up);
    if (gave_up) continue;
    auto w = model_check(a, phi, 4);
    CHECK_MESSAGE(w.has_value() == o.has_value(), render(phi));
    if (w) {
      check_witness(a, phi, *w);
      ++positive;
    }
    ++checked;
  }
  CHECK(checked >= 120);
  CHECK(positive >= 30);
}

TEST_CASE("accepting states are tried in name order") {
  // Two disjoint ways to satisfy G F p; the witness is the same every time.
  MachineBuilder b;
  b.add_state("s");
  b.add_state("a", {"p"});
  b.add_state("b", {"p"});
  b.update("s", 0, "a");
  b.update("s", 1, "b");
  b.update("a", 0, "a");
  b.update("b", 0, "b");
  auto a = b.build();
  auto phi = parse_formula("G F p");
  auto w1 = model_check(a, phi, 4);
  auto w2 = model_check(a, phi, 4);
  REQUIRE(w1);
  REQUIRE(w2);
  CHECK(w1->lasso.run.steps == w2->lasso.run.steps);
  CHECK(w1->lasso.loop_start == w2->lasso.loop_start);
}
