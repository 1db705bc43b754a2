#include "inspectrl/grid_codec.hpp"

#include <cctype>
#include <charconv>

namespace inspectrl {

void GridSpec::validate() const {
  if (rows < 1 || cols < 1) {
    throw ContractError("grid dimensions must be positive, got " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  if (static_cast<long long>(rows) * cols > 65536) {
    throw ContractError("grid " + std::to_string(rows) + "x" + std::to_string(cols) + " exceeds 65536 cells");
  }
}

PatchSet::PatchSet(GridSpec grid) : grid_(grid) {
  grid_.validate();
  cells_ = Occupancy::Constant(grid_.rows, grid_.cols, false);
}

PatchSet::PatchSet(GridSpec grid, const std::vector<PatchCoord>& cells) : PatchSet(grid) {
  for (const auto& c : cells) insert(c);
}

bool PatchSet::in_bounds(PatchCoord c) const noexcept {
  return c.row >= 0 && c.row < grid_.rows && c.col >= 0 && c.col < grid_.cols;
}

void PatchSet::insert(PatchCoord c) {
  if (!in_bounds(c)) {
    throw ContractError("cell (" + std::to_string(c.row) + "," + std::to_string(c.col) + ") outside " +
                        std::to_string(grid_.rows) + "x" + std::to_string(grid_.cols) + " grid");
  }
  cells_(c.row, c.col) = true;
}

void PatchSet::erase(PatchCoord c) {
  if (in_bounds(c)) cells_(c.row, c.col) = false;
}

bool PatchSet::contains(PatchCoord c) const { return in_bounds(c) && cells_(c.row, c.col); }

std::vector<PatchCoord> PatchSet::sorted() const {
  std::vector<PatchCoord> out;
  out.reserve(size());
  for (int r = 0; r < grid_.rows; ++r)
    for (int c = 0; c < grid_.cols; ++c)
      if (cells_(r, c)) out.push_back({r, c});
  return out;
}

bool PatchSet::operator==(const PatchSet& other) const {
  return grid_ == other.grid_ && (cells_ == other.cells_).all();
}

std::size_t intersection_size(const PatchSet& a, const PatchSet& b) {
  if (!(a.grid() == b.grid())) throw ContractError("patch sets live on different grids");
  return static_cast<std::size_t>((a.occupancy() && b.occupancy()).count());
}

PatchSet rasterize_mask(const MaskImage& mask, GridSpec grid, int threshold) {
  grid.validate();
  if (threshold < 1 || threshold > 255) {
    throw ContractError("rasterization threshold must be in [1,255], got " + std::to_string(threshold));
  }
  if (mask.width < grid.cols || mask.height < grid.rows) {
    throw ContractError("mask " + std::to_string(mask.width) + "x" + std::to_string(mask.height) +
                        " is smaller than the " + std::to_string(grid.rows) + "x" + std::to_string(grid.cols) +
                        " grid");
  }
  if (mask.pixels.size() != static_cast<std::size_t>(mask.width) * mask.height) {
    throw ContractError("mask pixel buffer does not match its dimensions");
  }

  using PixelMap = Eigen::Map<const Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  const PixelMap pixels(mask.pixels.data(), mask.height, mask.width);
  const auto lit = (pixels >= static_cast<std::uint8_t>(threshold)).eval();

  PatchSet out(grid);
  const long long H = mask.height, W = mask.width;
  for (int r = 0; r < grid.rows; ++r) {
    const auto y0 = static_cast<Eigen::Index>(r * H / grid.rows);
    const auto y1 = static_cast<Eigen::Index>((r + 1) * H / grid.rows);
    for (int c = 0; c < grid.cols; ++c) {
      const auto x0 = static_cast<Eigen::Index>(c * W / grid.cols);
      const auto x1 = static_cast<Eigen::Index>((c + 1) * W / grid.cols);
      if (lit.block(y0, x0, y1 - y0, x1 - x0).any()) out.insert({r, c});
    }
  }
  return out;
}

std::string encode_patches(const PatchSet& patches) {
  std::string out;
  const auto& occ = patches.occupancy();
  auto cell = [](int r, int c) { return "(" + std::to_string(r) + "," + std::to_string(c) + ")"; };
  for (int r = 0; r < patches.grid().rows; ++r) {
    int c = 0;
    while (c < patches.grid().cols) {
      if (!occ(r, c)) {
        ++c;
        continue;
      }
      int end = c;
      while (end + 1 < patches.grid().cols && occ(r, end + 1)) ++end;
      if (!out.empty()) out += ", ";
      out += cell(r, c);
      if (end > c) out += "-" + cell(r, end);
      c = end + 1;
    }
  }
  return out;
}

std::string SegFormatError::message() const {
  return "malformed seg text at byte " + std::to_string(offset) + ": " + reason;
}

namespace {

class SegParser {
 public:
  SegParser(std::string_view text, GridSpec grid) : text_(text), grid_(grid) {}

  SegDecodeResult run() {
    PatchSet out(grid_);
    skip_ws();
    if (pos_ == text_.size()) return out;
    for (;;) {
      if (!item(out)) return error_;
      skip_ws();
      if (pos_ == text_.size()) return out;
      if (text_[pos_] != ',') {
        fail("expected ',' between cells");
        return error_;
      }
      ++pos_;
      skip_ws();
      if (pos_ == text_.size()) {
        fail("trailing ','");
        return error_;
      }
    }
  }

 private:
  bool item(PatchSet& out) {
    const std::size_t start = pos_;
    PatchCoord a;
    if (!coord(a)) return false;
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '-') {
      ++pos_;
      skip_ws();
      PatchCoord b;
      if (!coord(b)) return false;
      if (a.row != b.row) return fail_at(start, "run spans rows");
      if (a.col > b.col) return fail_at(start, "descending run");
      for (int c = a.col; c <= b.col; ++c) out.insert({a.row, c});
    } else {
      out.insert(a);
    }
    return true;
  }

  bool coord(PatchCoord& out) {
    const std::size_t start = pos_;
    if (!expect('(')) return false;
    skip_ws();
    if (!integer(out.row)) return false;
    skip_ws();
    if (!expect(',')) return false;
    skip_ws();
    if (!integer(out.col)) return false;
    skip_ws();
    if (!expect(')')) return false;
    if (out.row >= grid_.rows || out.col >= grid_.cols) return fail_at(start, "coordinate outside grid");
    return true;
  }

  bool integer(int& value) {
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    if (first == last || !std::isdigit(static_cast<unsigned char>(*first))) return fail("expected a non-negative integer");
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{}) return fail("integer out of range");
    pos_ += static_cast<std::size_t>(ptr - first);
    return true;
  }

  bool expect(char ch) {
    if (pos_ < text_.size() && text_[pos_] == ch) {
      ++pos_;
      return true;
    }
    return fail(std::string("expected '") + ch + "'");
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool fail(std::string reason) { return fail_at(pos_, std::move(reason)); }
  bool fail_at(std::size_t at, std::string reason) {
    error_ = SegFormatError{at, std::move(reason)};
    return false;
  }

  std::string_view text_;
  GridSpec grid_;
  std::size_t pos_ = 0;
  SegFormatError error_;
};

}  // namespace

SegDecodeResult decode_seg_text(std::string_view text, GridSpec grid) {
  grid.validate();
  return SegParser(text, grid).run();
}

PatchSet parse_seg_text(std::string_view text, GridSpec grid) {
  auto result = decode_seg_text(text, grid);
  if (auto* err = std::get_if<SegFormatError>(&result)) throw SegTextError(*err);
  return std::get<PatchSet>(std::move(result));
}

GridSpec parse_grid_spec(std::string_view text) {
  const auto sep = text.find_first_of("xX*,");
  GridSpec g{0, 0};
  auto num = [&](std::string_view s, int& v) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc{} && p == s.data() + s.size();
  };
  if (sep == std::string_view::npos || !num(text.substr(0, sep), g.rows) || !num(text.substr(sep + 1), g.cols)) {
    throw InputFormatError("grid must look like 16x16, got '" + std::string(text) + "'");
  }
  g.validate();
  return g;
}

}  // namespace inspectrl
