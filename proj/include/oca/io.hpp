#pragma once

// JSON machine and witness files.

#include <string>

#include "oca/machine.hpp"

namespace oca {

// "+3", "-1", "0", "=0", "=c:4", "<c:2", ">x:y", ...  Parameter names are
// resolved against `params`.
Operation parse_op(const std::string& text, const std::vector<std::string>& params);

// FormatError on malformed JSON, unknown keys or a bad op string;
// ConfigError on an invalid machine.
CounterMachine parse_machine(const std::string& json_text);
std::string write_machine(const CounterMachine& a);

struct WitnessFile {
  std::string kind; // "reach", "buchi" or "mc"
  std::optional<Value> bound;
  ParamInstantiation gamma;
  Run run;                              // gamma is copied into run.gamma
  std::optional<std::size_t> loop_start; // set for lassos
  std::optional<bool> formula_holds;
  std::optional<std::string> formula;
  ParamInstantiation registers; // register values of the model-checking product
};

// States are named; "via" is the index of the transition taken to reach a
// position (null at position 0).
std::string write_witness(const CounterMachine& a, const WitnessFile& w);
WitnessFile parse_witness(const std::string& json_text, const CounterMachine& a);

std::string read_file(const std::string& path);

} // namespace oca
