#pragma once

#include <stdexcept>
#include <string>

namespace lieflow {

/// Base for all library errors. The CLI maps subclasses to exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input outside the numerically supported range (e.g. huge algebra norm).
struct RangeError : Error {
  using Error::Error;
};

/// Logarithm requested at (or too close to) the cut locus.
struct CutLocusError : Error {
  using Error::Error;
};

/// Matrix too close to singular for the requested decomposition.
struct SingularityError : Error {
  using Error::Error;
};

/// Caller violated an API precondition (shape/spec mismatch, bad argument).
struct ContractError : Error {
  using Error::Error;
};

/// Malformed file or config; message names the first offending record.
struct ParseError : Error {
  using Error::Error;
};

/// Versioned artifact does not match the requested architecture/spec.
struct IncompatibleError : Error {
  using Error::Error;
};

/// Training produced a non-finite loss.
struct DivergenceError : Error {
  int batch_index = -1;
  DivergenceError(const std::string& msg, int batch) : Error(msg), batch_index(batch) {}
};

/// Non-finite network output during trajectory generation.
struct GenerationError : Error {
  int step = -1;
  GenerationError(const std::string& msg, int s) : Error(msg), step(s) {}
};

/// Filesystem failure; message carries the path.
struct IoError : Error {
  using Error::Error;
};

}  // namespace lieflow
