#pragma once

#include <stdexcept>
#include <string>

namespace skimap {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument (negative radius, non-positive resolution, lo > hi, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A metric coordinate quantizes outside the signed 16-bit key range.
class BoundsError : public Error {
 public:
  BoundsError(char axis, double coordinate)
      : Error(std::string("coordinate ") + std::to_string(coordinate) +
              " on axis " + axis + " is outside the addressable workspace"),
        axis_(axis) {}

  char axis() const noexcept { return axis_; }

 private:
  char axis_;
};

/// Erosion of a sample that was never fused into the voxel.
class ErosionUnderflow : public Error {
 public:
  using Error::Error;
};

/// Malformed input text (frame logs, dumps). Carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// No plane with enough support was found in the first frame.
class GroundDetectionError : public Error {
 public:
  using Error::Error;
};

/// Internal consistency check failed.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace skimap
