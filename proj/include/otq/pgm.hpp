#pragma once

#include "otq/density.hpp"

#include <string>
#include <string_view>

namespace otq {

/// Parses an 8-bit PGM (P2 ASCII or P5 binary, maxval ≤ 255). Comments
/// starting with '#' are skipped in the header. Throws ParseError.
GrayImage parse_pgm(std::string_view bytes);
GrayImage read_pgm(const std::string& path);

/// Writes binary P5.
void write_pgm(const std::string& path, const GrayImage& image);

}  // namespace otq
