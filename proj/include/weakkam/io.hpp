#pragma once

#include <ostream>
#include <span>
#include <string>

namespace weakkam {

// Locale-independent shortest form with 17 significant digits ("nan" for NaN).
[[nodiscard]] std::string format_double(double value);

// Writes values separated by commas and terminated by a newline.
void write_csv_row(std::ostream& out, std::span<const double> values);

}  // namespace weakkam
