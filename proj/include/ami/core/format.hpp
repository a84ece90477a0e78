#pragma once

#include <string>

namespace ami {

// Shortest text that parses back to the same double. Non-finite values
// print as "nan", "inf" and "-inf".
std::string format_double(double v);

}  // namespace ami
