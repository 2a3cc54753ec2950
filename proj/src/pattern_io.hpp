#pragma once

#include <iosfwd>
#include <string>

#include "pattern.hpp"

namespace gibbsfit {

// Pattern CSV: header "x,y,mark" ("x,y" for unit marks), one point per row,
// '.' decimal separator, LF or CRLF line endings.

PointPattern read_pattern(std::istream& in, const MarkSpace& marks,
                          const Window& window);
PointPattern read_pattern_file(const std::string& path, const MarkSpace& marks,
                               const Window& window);

void write_pattern(std::ostream& out, const PointPattern& pattern);
void write_pattern_file(const std::string& path, const PointPattern& pattern);

/// Round-trip-safe decimal rendering (17 significant digits).
std::string format_coordinate(double v);

}  // namespace gibbsfit
