#pragma once

#include <stdexcept>
#include <string>

namespace fedmax {

// Base class for every error the library raises deliberately.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };
struct NumericalError : Error { using Error::Error; };
struct EmptyDatasetError : Error { using Error::Error; };
struct SingleClassError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

struct ParseError : Error {
  ParseError(const std::string& msg, long line_no)
      : Error(msg + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
  long line;
};

// Raised when an iterate stops being finite; carries where it happened.
struct DivergenceError : Error {
  DivergenceError(const std::string& msg, int stage_no, long iter_no)
      : Error(msg + " (stage " + std::to_string(stage_no) + ", iteration " +
              std::to_string(iter_no) + ")"),
        stage(stage_no),
        iter(iter_no) {}
  int stage;
  long iter;
};

}  // namespace fedmax
