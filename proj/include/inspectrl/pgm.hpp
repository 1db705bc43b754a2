#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "inspectrl/grid_codec.hpp"

namespace inspectrl {

// Reads "P2" (ASCII) or "P5" (binary) PGM with maxval 255. Header comments
// are skipped. Throws InputFormatError on anything else.
MaskImage decode_pgm(std::string_view bytes);
MaskImage read_pgm(const std::filesystem::path& path);

enum class PgmFlavor { Ascii, Binary };
std::string encode_pgm(const MaskImage& mask, PgmFlavor flavor = PgmFlavor::Binary);
void write_pgm(const std::filesystem::path& path, const MaskImage& mask, PgmFlavor flavor = PgmFlavor::Binary);

}  // namespace inspectrl
