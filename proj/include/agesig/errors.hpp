#pragma once

#include <stdexcept>
#include <string>

namespace agesig {

// Base for all recoverable toolkit failures. CLI maps subtypes to exit codes:
// input/parse problems exit 2, numerical/degenerate problems exit 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A string does not match the 3-character ICD-10 category pattern.
class CodeFormatError : public Error {
 public:
  explicit CodeFormatError(std::string offending)
      : Error("invalid ICD-10 category: \"" + offending + "\""),
        offending_(std::move(offending)) {}
  const std::string& offending() const { return offending_; }

 private:
  std::string offending_;
};

// Input stream cannot be read at all.
class IoError : public Error {
 public:
  using Error::Error;
};

// Column mapping in the schema descriptor does not match the input header.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class EmptyCohortError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

// Automatic bandwidth selection collapsed to zero; caller must pass an
// explicit bandwidth.
class ZeroBandwidthError : public Error {
 public:
  using Error::Error;
};

// The dispersion curve has no usable knee (all chord distances below
// threshold). Callers either default to the smallest k or abort.
class DegenerateElbowError : public Error {
 public:
  using Error::Error;
};

}  // namespace agesig
