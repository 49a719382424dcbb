#pragma once

#include <string>
#include <string_view>

namespace krf {

// Shortest round-trip decimal form, locale independent.
std::string fmt_double(double x);
double parse_double(std::string_view text);

}  // namespace krf
