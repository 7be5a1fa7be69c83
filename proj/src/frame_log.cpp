#include "skimap/frame_log.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "skimap/errors.hpp"

namespace skimap {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream ss(line);
  std::string t;
  while (ss >> t) tokens.push_back(t);
  return tokens;
}

double parseDouble(const std::string& token, std::size_t line, const char* what) {
  double value = 0.0;
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ParseError(line, std::string("bad ") + what + " '" + token + "'");
  }
  return value;
}

FrameId parseId(const std::string& token, std::size_t line) {
  FrameId value = 0;
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ParseError(line, "bad frame id '" + token + "'");
  return value;
}

Pose parsePose(const std::vector<std::string>& tokens, std::size_t first, std::size_t line) {
  std::array<double, 7> v{};
  for (std::size_t i = 0; i < 7; ++i) v[i] = parseDouble(tokens[first + i], line, "pose value");
  const Eigen::Quaterniond q(v[6], v[3], v[4], v[5]);
  try {
    return Pose::fromQuaternion({v[0], v[1], v[2]}, q);
  } catch (const ArgumentError& e) {
    throw ParseError(line, e.what());
  }
}

bool isSkippable(const std::string& line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

}  // namespace

bool FrameLogReader::readLine(std::string& out) {
  while (std::getline(is_, out)) {
    ++line_;
    if (!isSkippable(out)) return true;
  }
  return false;
}

std::optional<LogRecord> FrameLogReader::next() {
  std::string text;
  std::size_t headerLine = 0;
  if (pending_) {
    text = std::move(*pending_);
    headerLine = pendingLine_;
    pending_.reset();
  } else {
    if (!readLine(text)) return std::nullopt;
    headerLine = line_;
  }

  const auto tokens = tokenize(text);
  LogRecord record;
  record.line = headerLine;
  if (tokens[0] == "OPT") {
    if (tokens.size() != 9) throw ParseError(headerLine, "OPT expects an id and 7 pose values");
    record.kind = LogRecord::Kind::Optimized;
    record.id = parseId(tokens[1], headerLine);
    record.pose = parsePose(tokens, 2, headerLine);
    return record;
  }
  if (tokens[0] != "FRAME") {
    throw ParseError(headerLine, "expected FRAME or OPT record, got '" + tokens[0] + "'");
  }
  if (tokens.size() != 10) {
    throw ParseError(headerLine, "FRAME expects an id, a timestamp and 7 pose values");
  }
  record.kind = LogRecord::Kind::Frame;
  record.frame.id = parseId(tokens[1], headerLine);
  record.frame.timestamp = parseDouble(tokens[2], headerLine, "timestamp");
  record.frame.poseQueue.push_back(parsePose(tokens, 3, headerLine));

  std::optional<bool> weighted;
  while (readLine(text)) {
    const auto point = tokenize(text);
    if (point[0] == "FRAME" || point[0] == "OPT") {
      pending_ = std::move(text);
      pendingLine_ = line_;
      break;
    }
    if (point.size() != 3 && point.size() != 5) {
      throw ParseError(line_, "point line expects 3 or 5 values");
    }
    const bool hasSample = point.size() == 5;
    if (weighted && *weighted != hasSample) {
      throw ParseError(line_, "frame mixes plain and weighted point lines");
    }
    weighted = hasSample;
    record.frame.points.emplace_back(parseDouble(point[0], line_, "x"), parseDouble(point[1], line_, "y"),
                                     parseDouble(point[2], line_, "z"));
    if (hasSample) {
      const double p = parseDouble(point[3], line_, "probability");
      const double w = parseDouble(point[4], line_, "weight");
      if (p < 0.0 || p > 1.0) throw ParseError(line_, "probability outside [0, 1]");
      if (!(w > 0.0)) throw ParseError(line_, "weight must be positive");
      record.frame.samples.push_back({p, w});
    }
  }
  return record;
}

std::string formatExact(double value) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  (void)ec;
  return std::string(buf.data(), ptr);
}

namespace {

void writePoseFields(std::ostream& os, const Pose& pose) {
  const Eigen::Quaterniond q = pose.quaternion();
  os << ' ' << formatExact(pose.translation.x()) << ' ' << formatExact(pose.translation.y()) << ' '
     << formatExact(pose.translation.z()) << ' ' << formatExact(q.x()) << ' ' << formatExact(q.y()) << ' '
     << formatExact(q.z()) << ' ' << formatExact(q.w());
}

}  // namespace

void writeFrameHeader(std::ostream& os, FrameId id, double timestamp, const Pose& pose) {
  os << "FRAME " << id << ' ' << formatExact(timestamp);
  writePoseFields(os, pose);
  os << '\n';
}

void writePointLine(std::ostream& os, const Point3& p) {
  os << formatExact(p.x()) << ' ' << formatExact(p.y()) << ' ' << formatExact(p.z()) << '\n';
}

void writePointLine(std::ostream& os, const Point3& p, const Sample& sample) {
  os << formatExact(p.x()) << ' ' << formatExact(p.y()) << ' ' << formatExact(p.z()) << ' '
     << formatExact(sample.probability) << ' ' << formatExact(sample.weight) << '\n';
}

void writeOptimized(std::ostream& os, FrameId id, const Pose& pose) {
  os << "OPT " << id;
  writePoseFields(os, pose);
  os << '\n';
}

void writeFrame(std::ostream& os, const FrameRecord& frame, const Pose& pose) {
  writeFrameHeader(os, frame.id, frame.timestamp, pose);
  for (std::size_t i = 0; i < frame.points.size(); ++i) {
    if (frame.samples.empty()) {
      writePointLine(os, frame.points[i]);
    } else {
      writePointLine(os, frame.points[i], frame.samples[i]);
    }
  }
}

}  // namespace skimap
