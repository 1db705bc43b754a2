#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "inspectrl/errors.hpp"

namespace inspectrl {

struct GridSpec {
  int rows = 16;
  int cols = 16;

  // Throws ContractError unless 1 <= rows, 1 <= cols and rows*cols <= 65536.
  void validate() const;
  bool operator==(const GridSpec&) const = default;
};

struct PatchCoord {
  int row = 0;
  int col = 0;
  auto operator<=>(const PatchCoord&) const = default;
};

/// Set of anomalous cells on a rows x cols grid.
///
/// Stored as a dense row-major occupancy array, so membership is O(1),
/// duplicates are impossible and set algebra maps onto coefficient-wise
/// Eigen expressions.
class PatchSet {
 public:
  using Occupancy = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  PatchSet() : PatchSet(GridSpec{}) {}
  explicit PatchSet(GridSpec grid);
  PatchSet(GridSpec grid, const std::vector<PatchCoord>& cells);

  const GridSpec& grid() const noexcept { return grid_; }
  const Occupancy& occupancy() const noexcept { return cells_; }

  // Throws ContractError when the coordinate lies outside the grid.
  void insert(PatchCoord c);
  void erase(PatchCoord c);
  bool contains(PatchCoord c) const;
  bool in_bounds(PatchCoord c) const noexcept;

  std::size_t size() const { return static_cast<std::size_t>(cells_.count()); }
  bool empty() const { return size() == 0; }

  // Members in (row, col) order.
  std::vector<PatchCoord> sorted() const;

  bool operator==(const PatchSet& other) const;

 private:
  GridSpec grid_;
  Occupancy cells_;
};

// |a ∩ b|; both sets must share a grid.
std::size_t intersection_size(const PatchSet& a, const PatchSet& b);

struct MaskImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, width*height

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

inline constexpr int kDefaultMaskThreshold = 128;

/// Marks every grid cell whose pixel block holds at least one pixel with
/// intensity >= threshold. Cell (r, c) covers rows
/// [floor(r*H/rows), floor((r+1)*H/rows)) and the analogous column span, so
/// sizes that are not a multiple of the grid partition without padding.
PatchSet rasterize_mask(const MaskImage& mask, GridSpec grid = {}, int threshold = kDefaultMaskThreshold);

/// Canonical run-length text: cells sorted by (row, col), maximal horizontal
/// runs of two or more cells written "(r,c1)-(r,c2)", singletons "(r,c)",
/// joined by ", ". The empty set encodes as "".
std::string encode_patches(const PatchSet& patches);

struct SegFormatError {
  std::size_t offset = 0;  // byte offset into the input
  std::string reason;

  std::string message() const;
};

using SegDecodeResult = std::variant<PatchSet, SegFormatError>;

/// Inverse of encode_patches. Whitespace around tokens and separators is
/// ignored; descending runs, runs spanning rows and out-of-grid coordinates
/// are format errors.
SegDecodeResult decode_seg_text(std::string_view text, GridSpec grid = {});

class SegTextError : public InputFormatError {
 public:
  explicit SegTextError(SegFormatError e) : InputFormatError(e.message()), error_(std::move(e)) {}
  const SegFormatError& error() const noexcept { return error_; }

 private:
  SegFormatError error_;
};

// Throwing form of decode_seg_text.
PatchSet parse_seg_text(std::string_view text, GridSpec grid = {});

// Parses "RxC" (also accepts "R*C" and "R,C").
GridSpec parse_grid_spec(std::string_view text);

}  // namespace inspectrl
