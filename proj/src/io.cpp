#include "weakkam/io.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

namespace weakkam {

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    char buffer[64];
    const auto result =
        std::to_chars(buffer, buffer + sizeof(buffer), value, std::chars_format::general, 17);
    return {buffer, result.ptr};
}

void write_csv_row(std::ostream& out, std::span<const double> values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i != 0) out << ',';
        out << format_double(values[i]);
    }
    out << '\n';
}

}  // namespace weakkam
