#pragma once

#include <stdexcept>
#include <string>

namespace dlab {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Input violates a data-model invariant or a precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Snapshot magic or version tag does not match this build.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Requested paper id does not exist in the corpus.
class UnknownPaperError : public Error {
 public:
  using Error::Error;
};

/// Design matrix is rank deficient; `what()` names the dependent columns.
class RankDeficientError : public Error {
 public:
  using Error::Error;
};

}  // namespace dlab
