#pragma once
// Exception hierarchy. Contract violations throw; recoverable per-request
// backend failures are returned as values (see backend.hpp).

#include <cstddef>
#include <stdexcept>
#include <string>

namespace silverforge {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error { using Error::Error; };
struct TemplateError : Error { using Error::Error; };
struct DelimiterError : Error { using Error::Error; };
struct MalformedJudgeOutput : Error { using Error::Error; };
struct BackendError : Error { using Error::Error; };

struct IoError : Error { using Error::Error; };
struct MissingFile : IoError { using IoError::IoError; };
struct StageMismatch : Error { using Error::Error; };

struct ParseError : Error {
  ParseError(size_t line_no, const std::string& what)
      : Error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
  size_t line;
};

struct EmptyReference : Error { using Error::Error; };

struct MissingDuration : Error { using Error::Error; };
struct SystemCountError : Error { using Error::Error; };
struct DegenerateData : Error { using Error::Error; };
struct ZeroBaseline : Error { using Error::Error; };
struct AllDrifted : Error { using Error::Error; };

}  // namespace silverforge
