#pragma once

#include <string>
#include <vector>

namespace autores {

// Shortest-safe decimal form: 17 significant digits, round-trips exactly.
std::string fmt17(double value);

std::string join(const std::vector<std::string>& parts, char sep);

}  // namespace autores
