#pragma once

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "skimap/errors.hpp"
#include "skimap/skimap.hpp"

namespace skimap {

// Voxel dump: one "ix iy iz <payload fields>" line per voxel, ascending
// (ix, iy, iz). Tile dump: one "ix iy hits heightSum weight navigable" line
// per tile, ascending (ix, iy). Both are canonical: equal maps produce equal
// bytes.

template <VoxelPayload P>
void writeVoxelDump(const SkiMap<P>& map, std::ostream& os) {
  for (const auto& x : map.root()) {
    for (const auto& y : x.value) {
      for (const auto& z : y.value.voxels) {
        os << x.key << ' ' << y.key << ' ' << z.key << ' ';
        writeFields(os, z.value);
        os << '\n';
      }
    }
  }
}

void writeTileLine(std::ostream& os, KeyIndex ix, KeyIndex iy, const TileData& tile);
TileData parseTileFields(std::istream& is, std::size_t line);
KeyIndex parseKeyIndex(std::istream& is, std::size_t line, const char* axis);

template <VoxelPayload P>
void writeTileDump(const SkiMap<P>& map, std::ostream& os) {
  map.visit2D([&](const Column& c) {
    if (c.tile != nullptr) writeTileLine(os, c.ix, c.iy, *c.tile);
  });
}

/// Loads voxel lines into `map`. Throws ParseError with the line number.
template <VoxelPayload P>
void readVoxelDump(SkiMap<P>& map, std::istream& is) {
  std::string text;
  std::size_t lineNo = 0;
  while (std::getline(is, text)) {
    ++lineNo;
    if (text.empty() || text[0] == '#') continue;
    std::istringstream line(text);
    VoxelKey key;
    key.ix = parseKeyIndex(line, lineNo, "ix");
    key.iy = parseKeyIndex(line, lineNo, "iy");
    key.iz = parseKeyIndex(line, lineNo, "iz");
    P payload;
    try {
      readFields(line, payload);
    } catch (const ArgumentError& e) {
      throw ParseError(lineNo, e.what());
    }
    std::string extra;
    if (line >> extra) throw ParseError(lineNo, "trailing field '" + extra + "'");
    if (map.getVoxel(key)) throw ParseError(lineNo, "duplicate voxel key");
    map.setVoxel(key, payload);
  }
}

template <VoxelPayload P>
void readTileDump(SkiMap<P>& map, std::istream& is) {
  std::string text;
  std::size_t lineNo = 0;
  while (std::getline(is, text)) {
    ++lineNo;
    if (text.empty() || text[0] == '#') continue;
    std::istringstream line(text);
    const KeyIndex ix = parseKeyIndex(line, lineNo, "ix");
    const KeyIndex iy = parseKeyIndex(line, lineNo, "iy");
    if (map.tile(ix, iy)) throw ParseError(lineNo, "duplicate tile key");
    map.setTile(ix, iy, parseTileFields(line, lineNo));
  }
}

template <VoxelPayload P>
std::string voxelDumpString(const SkiMap<P>& map) {
  std::ostringstream os;
  writeVoxelDump(map, os);
  return os.str();
}

template <VoxelPayload P>
std::string tileDumpString(const SkiMap<P>& map) {
  std::ostringstream os;
  writeTileDump(map, os);
  return os.str();
}

}  // namespace skimap
