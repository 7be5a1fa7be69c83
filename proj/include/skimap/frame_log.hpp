#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "skimap/pose.hpp"
#include "skimap/posegraph.hpp"

namespace skimap {

/// One record of a frame log. Kind::Frame carries a frame with its live pose
/// as the only queue entry; Kind::Optimized carries a pose update.
struct LogRecord {
  enum class Kind { Frame, Optimized };
  Kind kind = Kind::Frame;
  std::size_t line = 0;  // line of the header
  FrameRecord frame;     // Kind::Frame
  FrameId id = 0;        // Kind::Optimized
  Pose pose;             // Kind::Optimized
};

/// Streaming reader for the text frame log:
///
///   FRAME <id> <timestamp> <tx ty tz qx qy qz qw>
///   <x y z> | <x y z p w>        (point lines, any number)
///   OPT <id> <tx ty tz qx qy qz qw>
///
/// Blank lines and lines starting with '#' are ignored. A frame may not mix
/// plain and weighted point lines. Malformed input throws ParseError.
class FrameLogReader {
 public:
  explicit FrameLogReader(std::istream& is) : is_(is) {}

  /// Next record, or nullopt at end of input.
  std::optional<LogRecord> next();

  std::size_t line() const noexcept { return line_; }

 private:
  bool readLine(std::string& out);

  std::istream& is_;
  std::size_t line_ = 0;
  std::optional<std::string> pending_;
  std::size_t pendingLine_ = 0;
};

/// Shortest round-trip formatting for coordinates.
std::string formatExact(double value);

void writeFrameHeader(std::ostream& os, FrameId id, double timestamp, const Pose& pose);
void writePointLine(std::ostream& os, const Point3& p);
void writePointLine(std::ostream& os, const Point3& p, const Sample& sample);
void writeOptimized(std::ostream& os, FrameId id, const Pose& pose);

/// Header, then one line per point; weighted lines only when the frame has
/// per-point samples.
void writeFrame(std::ostream& os, const FrameRecord& frame, const Pose& pose);

}  // namespace skimap
