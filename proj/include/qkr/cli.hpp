#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qkr::cli {

enum ExitCode : int {
  kPass = 0,
  kFail = 1,          // a checked property did not hold
  kUsage = 2,         // bad flags or malformed matrix literal
  kInadmissible = 3,  // weight matrix fails the admissibility conditions
};

// One qkreduce invocation; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qkr::cli
