#pragma once

#include <stdexcept>
#include <string>

namespace motifbench {

// One exit code per error class; the CLI maps a caught Error to its code.
enum class ExitCode : int {
  ok = 0,
  internal = 1,
  parameter = 2,
  parse = 3,
  io = 4,
  shape = 5,
  input_type = 6,
  empty_input = 7,
  degenerate_reference = 8,
  untunable = 9,
  evaluator = 10,
  tolerance_failed = 11,
};

class Error : public std::runtime_error {
public:
  Error(ExitCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ExitCode code() const { return code_; }

private:
  ExitCode code_;
};

struct ParameterError : Error {
  explicit ParameterError(const std::string& m) : Error(ExitCode::parameter, m) {}
};
struct ParseError : Error {
  explicit ParseError(const std::string& m) : Error(ExitCode::parse, m) {}
};
struct IoError : Error {
  explicit IoError(const std::string& m) : Error(ExitCode::io, m) {}
};
struct ShapeError : Error {
  explicit ShapeError(const std::string& m) : Error(ExitCode::shape, m) {}
};
struct InputTypeError : Error {
  explicit InputTypeError(const std::string& m) : Error(ExitCode::input_type, m) {}
};
struct EmptyInputError : Error {
  explicit EmptyInputError(const std::string& m) : Error(ExitCode::empty_input, m) {}
};
struct EmptyProfileError : Error {
  explicit EmptyProfileError(const std::string& m) : Error(ExitCode::empty_input, m) {}
};
struct DegenerateReferenceError : Error {
  explicit DegenerateReferenceError(const std::string& m)
      : Error(ExitCode::degenerate_reference, m) {}
};
struct UntunableMetricError : Error {
  explicit UntunableMetricError(const std::string& m) : Error(ExitCode::untunable, m) {}
};
struct EvaluatorError : Error {
  explicit EvaluatorError(const std::string& m) : Error(ExitCode::evaluator, m) {}
};

}  // namespace motifbench
