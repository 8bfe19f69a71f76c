#pragma once

#include <string>

namespace twopath {

// Shortest decimal text that parses back to exactly the same double
// ("inf", "-inf" and "nan" for non-finite values).
[[nodiscard]] std::string format_double(double value);

}  // namespace twopath
