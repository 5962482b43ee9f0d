#pragma once

// Experiment runner behind the frameforge executable.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "frameforge/serialize.hpp"

namespace frameforge::cli {

inline constexpr std::string_view kVersion = "0.1.0";

/// Exit codes: 0 success, 1 usage or input error, 2 a hypothesis of the requested
/// construction does not hold.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

const std::vector<std::string>& demo_ids();

/// One "path,index,value" row per scalar; arrays of scalars get a 1-based index column.
std::string to_csv(const Json& report);

}  // namespace frameforge::cli
