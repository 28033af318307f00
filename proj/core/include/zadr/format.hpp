#pragma once

#include <string>
#include <string_view>

namespace zadr {

/// 17 significant digits ("%.17g"); round-trips every finite double.
std::string format_real(double v);

/// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_quote(std::string_view field);

}  // namespace zadr
