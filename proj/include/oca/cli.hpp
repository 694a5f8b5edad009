#pragma once
#include <ostream>
namespace oca {
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);
}
