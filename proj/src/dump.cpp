#include "skimap/dump.hpp"

#include <cmath>

namespace skimap {

void writeTileLine(std::ostream& os, KeyIndex ix, KeyIndex iy, const TileData& tile) {
  os << ix << ' ' << iy << ' ' << tile.hits << ' ' << formatField(tile.heightSum) << ' '
     << formatField(tile.weight) << ' ' << (tile.navigable ? 1 : 0) << '\n';
}

KeyIndex parseKeyIndex(std::istream& is, std::size_t line, const char* axis) {
  long long value = 0;
  if (!(is >> value)) throw ParseError(line, std::string("expected integer ") + axis);
  if (value < kKeyMin || value > kKeyMax) {
    throw ParseError(line, std::string(axis) + " outside the 16-bit key range");
  }
  return static_cast<KeyIndex>(value);
}

TileData parseTileFields(std::istream& is, std::size_t line) {
  TileData tile;
  long long hits = 0;
  int navigable = 0;
  if (!(is >> hits >> tile.heightSum >> tile.weight >> navigable)) {
    throw ParseError(line, "expected tile fields 'hits heightSum weight navigable'");
  }
  if (hits <= 0 || hits > 0xffffffffLL || tile.weight < 0.0 || (navigable != 0 && navigable != 1) ||
      !std::isfinite(tile.heightSum)) {
    throw ParseError(line, "tile fields out of range");
  }
  std::string extra;
  if (is >> extra) throw ParseError(line, "trailing field '" + extra + "'");
  tile.hits = static_cast<std::uint32_t>(hits);
  tile.navigable = navigable == 1;
  return tile;
}

}  // namespace skimap
