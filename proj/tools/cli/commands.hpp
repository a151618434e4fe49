#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"

namespace dicke::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Full command line without the program name, e.g. {"stability", "--config", "a.json"}.
/// Errors are reported as one JSON line on `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Executes an already parsed config.
void execute(const RunConfig& config, std::ostream& out);

}  // namespace dicke::cli
