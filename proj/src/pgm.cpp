#include "inspectrl/pgm.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <iterator>

namespace inspectrl {
namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char ch = bytes_[pos_];
      if (ch == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(ch))) {
        ++pos_;
      } else {
        return;
      }
    }
  }

  long number(const char* what) {
    skip_space_and_comments();
    long v = 0;
    auto [p, ec] = std::from_chars(bytes_.data() + pos_, bytes_.data() + bytes_.size(), v);
    if (ec != std::errc{} || v < 0) throw InputFormatError(std::string("PGM: bad ") + what);
    pos_ = static_cast<std::size_t>(p - bytes_.data());
    return v;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

MaskImage decode_pgm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
    throw InputFormatError("PGM: expected P2 or P5 magic");
  }
  const bool binary = bytes[1] == '5';
  HeaderReader in(bytes);
  in.advance(2);
  const long width = in.number("width");
  const long height = in.number("height");
  const long maxval = in.number("maxval");
  if (width < 1 || height < 1 || width * height > (1L << 28)) throw InputFormatError("PGM: bad dimensions");
  if (maxval != 255) throw InputFormatError("PGM: maxval must be 255, got " + std::to_string(maxval));

  MaskImage mask{static_cast<int>(width), static_cast<int>(height), {}};
  const auto count = static_cast<std::size_t>(width * height);
  mask.pixels.resize(count);
  if (binary) {
    // Exactly one whitespace byte separates maxval from the raster.
    if (in.pos() >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[in.pos()]))) {
      throw InputFormatError("PGM: missing separator before raster");
    }
    in.advance(1);
    if (bytes.size() - in.pos() < count) throw InputFormatError("PGM: truncated raster");
    for (std::size_t i = 0; i < count; ++i) mask.pixels[i] = static_cast<std::uint8_t>(bytes[in.pos() + i]);
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const long v = in.number("pixel value");
      if (v > 255) throw InputFormatError("PGM: pixel value exceeds maxval");
      mask.pixels[i] = static_cast<std::uint8_t>(v);
    }
  }
  return mask;
}

MaskImage read_pgm(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputFormatError("cannot open mask file " + path.string());
  const std::string bytes{std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
  try {
    return decode_pgm(bytes);
  } catch (const InputFormatError& e) {
    throw InputFormatError(path.string() + ": " + e.what());
  }
}

std::string encode_pgm(const MaskImage& mask, PgmFlavor flavor) {
  std::string out = flavor == PgmFlavor::Binary ? "P5\n" : "P2\n";
  out += std::to_string(mask.width) + " " + std::to_string(mask.height) + "\n255\n";
  if (flavor == PgmFlavor::Binary) {
    out.append(reinterpret_cast<const char*>(mask.pixels.data()), mask.pixels.size());
  } else {
    for (int y = 0; y < mask.height; ++y) {
      for (int x = 0; x < mask.width; ++x) {
        if (x) out += ' ';
        out += std::to_string(mask.at(x, y));
      }
      out += '\n';
    }
  }
  return out;
}

void write_pgm(const std::filesystem::path& path, const MaskImage& mask, PgmFlavor flavor) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputFormatError("cannot write " + path.string());
  f << encode_pgm(mask, flavor);
}

}  // namespace inspectrl
