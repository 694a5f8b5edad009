#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "oca/cli.hpp"
#include "oca/galil.hpp"
#include "oca/io.hpp"
#include "oca/oracle.hpp"
#include "oca/reductions.hpp"
#include "support/generators.hpp"

using namespace oca;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ocaflat");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class Scratch {
public:
  Scratch() {
    static int n = 0;
    dir_ = fs::temp_directory_path() / ("ocaflat_test_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
    fs::create_directories(dir_);
  }
  ~Scratch() { fs::remove_all(dir_); }
  std::string write(const std::string& name, const std::string& text) const {
    auto p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

private:
  fs::path dir_;
};

const char* kEq = R"({"states":["q","q2"],"initial":"q","params":["x"],
  "transitions":[{"from":"q","op":"+1","to":"q"},{"from":"q","op":"=x:x","to":"q2"}]})";
const char* kUp = R"({"states":["q"],"initial":"q","labels":{"q":["p"]},
  "transitions":[{"from":"q","op":"+1","to":"q"}]})";
const char* kStay = R"({"states":["q"],"initial":"q","transitions":[{"from":"q","op":"0","to":"q"}]})";

} // namespace

TEST_CASE("machine files") {
  auto a = parse_machine(kEq);
  CHECK(a.num_states() == 2);
  CHECK(a.params() == std::vector<std::string>{"x"});
  CHECK(parse_machine(write_machine(a)).transitions().size() == 2);
  CHECK(write_machine(parse_machine(write_machine(a))) == write_machine(a));

  std::vector<std::string> ops{"+1", "-1", "0", "=0", "=c:4", "<c:2", ">c:0", "=x:x", "<x:x", ">x:x", "+7", "-12"};
  for (const auto& op : ops) CHECK(a.render_op(parse_op(op, a.params())) == op);
  for (std::string bad : {"", "+", "1", "=c:-1", "=c:", "=y:x", "=x:z", "~c:1", "+1x", "=c4"})
    CHECK_THROWS_AS(parse_op(bad, a.params()), FormatError);

  CHECK_THROWS_AS(parse_machine(R"({"states":["q"],"initial":"q","transitions":[],"extra":1})"), FormatError);
  CHECK_THROWS_AS(parse_machine(R"({"states":["q"],"initial":"r","transitions":[]})"), FormatError);
  CHECK_THROWS_AS(parse_machine(R"({"states":["q"],"initial":"q","transitions":[{"from":"q","op":"+1"}]})"),
                  FormatError);
  CHECK_THROWS_AS(parse_machine("{"), FormatError);
  CHECK_THROWS_AS(parse_machine(R"({"states":["q","q"],"initial":"q","transitions":[]})"), ConfigError);
}

TEST_CASE("reach command") {
  Scratch s;
  auto m = s.write("eq.json", kEq);
  auto r = cli({"reach", m, "--target", "q2", "--bound", "3", "--json"});
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["verdict"] == "present");
  CHECK(j["bound"] == 3);
  CHECK(j["witness"]["gamma"]["x"] == 0);

  auto init = cli({"reach", m, "--target", "q", "--json"});
  REQUIRE(init.code == 0);
  auto k = nlohmann::json::parse(init.out);
  CHECK(k["witness"]["run"].size() == 1);
  CHECK(k["bound"] == derive_bound(parse_machine(kEq)));

  auto bad = s.write("bad.json", R"({"states":["q"],"initial":"q","transitions":[{"from":"q","op":"+x","to":"q"}]})");
  CHECK(cli({"reach", bad, "--target", "q"}).code == 2);
  CHECK(cli({"reach", m, "--target", "nowhere"}).code == 2);
  CHECK(cli({"reach", s.path("missing.json"), "--target", "q"}).code == 2);

  auto lonely = s.write("lonely.json", R"({"states":["q","q2"],"initial":"q","transitions":[{"from":"q","op":"-1","to":"q2"}]})");
  auto no = cli({"reach", lonely, "--target", "q2", "--bound", "5"});
  CHECK(no.code == 1);
  CHECK(no.out.find("bound 5") != std::string::npos);
}

TEST_CASE("buchi command") {
  Scratch s;
  auto up = s.write("up.json", kUp);
  CHECK(cli({"buchi", up, "--accepting", "q"}).code == 0);
  auto dead = s.write("dead.json", R"({"states":["q","f"],"initial":"q",
    "transitions":[{"from":"q","op":"0","to":"f"},{"from":"q","op":"+1","to":"q"}]})");
  CHECK(cli({"buchi", dead, "--accepting", "f", "--bound", "4"}).code == 1);
  CHECK(cli({"buchi", dead, "--accepting", "g"}).code == 2);

  // Agreement with the brute-force oracle on small random machines.
  testgen::Rng rng(77);
  testgen::MachineShape shape;
  shape.max_states = 3;
  shape.max_params = 1;
  shape.max_transitions = 5;
  int agree = 0, total = 0;
  for (int i = 0; i < 40; ++i) {
    auto a = testgen::random_machine(rng, shape);
    auto f = a.state_name(a.num_states() - 1);
    bool expect = false;
    for (const auto& g : testgen::all_gammas(a, 3))
      expect |= rep_reach_oracle(a, g, {a.num_states() - 1}, 30).has_value();
    auto path = s.write("r" + std::to_string(i) + ".json", write_machine(a));
    auto r = cli({"buchi", path, "--accepting", f, "--bound", "3"});
    REQUIRE(r.code != 2);
    agree += (r.code == 0) == expect;
    ++total;
  }
  CHECK(agree == total);
}

TEST_CASE("mc command") {
  Scratch s;
  auto up = s.write("up.json", kUp);
  auto w = s.path("w.json");
  auto r = cli({"mc", up, "--formula", "G p", "--witness", w});
  CHECK(r.code == 0);
  CHECK(r.out.find("bound") != std::string::npos);
  CHECK(cli({"check", w, up, "--formula", "G p"}).code == 0);

  auto nonflat = cli({"mc", up, "--formula", "G @r. (req -> F (serve & [=r]))"});
  CHECK(nonflat.code == 2);
  CHECK(nonflat.err.find("not flat") != std::string::npos);
  CHECK(nonflat.err.find("U") != std::string::npos);
  CHECK(nonflat.err.find("polarity") != std::string::npos);

  auto stay = s.write("stay.json", kStay);
  auto f = s.write("frozen.ltl", "F @r. G [=r]\n");
  CHECK(cli({"mc", stay, "--formula", f, "--bound", "3"}).code == 0);
  CHECK(cli({"mc", up, "--formula", "F @r. G ([<r] | [=r])", "--bound", "3"}).code == 1);
  CHECK(cli({"mc", up, "--formula", "p U"}).code == 2);
  CHECK(cli({"mc", up, "--formula", "F [=r]"}).code == 2);
}

TEST_CASE("translate command") {
  Scratch s;
  auto six = s.write("six.json", R"({"states":["q","q2"],"initial":"q",
    "transitions":[{"from":"q","op":"+6","to":"q2"},{"from":"q2","op":"-1","to":"q"}]})");
  auto u = cli({"translate", six, "--mode", "unary"});
  REQUIRE(u.code == 0);
  auto m = parse_machine(u.out);
  CHECK(m.num_states() == 2 + 2 * bits(6) + 2);
  CHECK(is_unary(m));

  auto eq = s.write("eq.json", kEq);
  auto a2a = cli({"translate", eq, "--mode", "a2a", "--target", "q2"});
  REQUIRE(a2a.code == 0);
  CHECK(a2a.out.find("(q2") != std::string::npos);
  auto sz = size(parse_machine(kEq));
  auto pos = a2a.err.find("size ");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stoul(a2a.err.substr(pos + 5)) <= 4 * sz * sz);

  auto fold = cli({"translate", eq, "--mode", "foldconst"});
  REQUIRE(fold.code == 0);
  CHECK(fold.out == write_machine(parse_machine(kEq)));

  auto b2r = cli({"translate", eq, "--mode", "buchi2reach", "--target", "q"});
  REQUIRE(b2r.code == 0);
  CHECK(parse_machine(b2r.out).num_states() > 2);
  CHECK(cli({"translate", eq, "--mode", "pdf"}).code == 2);
  CHECK(cli({"translate", eq, "--mode", "a2a"}).code == 2);
}

TEST_CASE("check command") {
  Scratch s;
  auto m = s.write("eq.json", kEq);
  auto w = s.path("w.json");
  REQUIRE(cli({"reach", m, "--target", "q2", "--bound", "3", "--witness", w}).code == 0);
  CHECK(cli({"check", w, m}).code == 0);

  auto j = nlohmann::json::parse(read_file(w));
  auto corrupt = j;
  corrupt["run"].back()["value"] = 5;
  CHECK(cli({"check", s.write("c1.json", corrupt.dump()), m}).code == 1);
  auto missing = j;
  missing["gamma"].erase("x");
  CHECK(cli({"check", s.write("c2.json", missing.dump()), m}).code == 2);
  auto unknown = j;
  unknown["colour"] = "red";
  CHECK(cli({"check", s.write("c3.json", unknown.dump()), m}).code == 2);
  CHECK(cli({"check", w, m, "--formula", "true"}).code == 2); // not a lasso
}

TEST_CASE("check agrees with the validators") {
  Scratch s;
  testgen::Rng rng(31);
  testgen::MachineShape shape;
  shape.max_states = 4;
  shape.max_params = 2;
  shape.max_transitions = 8;
  shape.max_const = 2;
  int valid = 0, invalid = 0;
  for (int i = 0; i < 150; ++i) {
    auto a = testgen::random_machine(rng, shape);
    ParamInstantiation g;
    for (const auto& x : a.params()) g[x] = static_cast<Value>(testgen::pick(rng, 0, 3));
    // A random walk, sometimes corrupted.
    Run run{g, {{a.initial(), 0}}, {}};
    for (int k = 0; k < 6; ++k) {
      auto succ = successors(a, g, run.configs.back());
      if (succ.empty()) break;
      const auto& st = succ[testgen::pick(rng, 0, succ.size() - 1)];
      run.steps.push_back(st.transition);
      run.configs.push_back(st.target);
    }
    if (testgen::coin(rng) && !run.steps.empty()) {
      std::size_t k = testgen::pick(rng, 1, run.configs.size() - 1);
      if (testgen::coin(rng)) run.configs[k].value += testgen::coin(rng) ? 1 : -1;
      else run.steps[k - 1] = testgen::pick(rng, 0, a.transitions().size() - 1);
    }
    bool expect = !validate_run(a, run).has_value();
    WitnessFile w{"reach", std::nullopt, g, run, std::nullopt, std::nullopt, std::nullopt, {}};
    auto mp = s.write("m.json", write_machine(a));
    auto wp = s.write("w.json", write_witness(a, w));
    int code = cli({"check", wp, mp}).code;
    CHECK(code == (expect ? 0 : 1));
    (expect ? valid : invalid)++;
  }
  CHECK(valid >= 30);
  CHECK(invalid >= 30);
}

TEST_CASE("exit codes") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({"reach"}).code == 2);
}

TEST_CASE("installed binary") {
  const char* bin = std::getenv("OCAFLAT");
  if (!bin) return;
  Scratch s;
  auto m = s.write("stay.json", kStay);
  auto w = s.path("w.json");
  auto run = [&](const std::string& args) {
    int st = std::system((std::string(bin) + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(st);
  };
  CHECK(run("mc " + m + " -f 'F @r. G [=r]' -b 3 -w " + w) == 0);
  CHECK(run("check " + w + " " + m + " -f 'F @r. G [=r]'") == 0);
  CHECK(run("mc " + m + " -f 'F @r. X [>r]' -b 3") == 1);
  CHECK(run("reach " + m + " -t nowhere") == 2);
}
