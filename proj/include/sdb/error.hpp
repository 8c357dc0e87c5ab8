#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace sdb {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A wavelength or index outside the tabulated range.
class RangeError : public Error {
public:
  using Error::Error;
};

/// An argument outside the mathematical domain of a formula.
class DomainError : public Error {
public:
  using Error::Error;
};

/// A spectrum with zero norm, zero sum or an otherwise unusable shape.
class DegenerateError : public Error {
public:
  using Error::Error;
};

/// Caller misuse: empty inputs, mismatched dimensions, bad flags.
class UsageError : public Error {
public:
  using Error::Error;
};

/// Malformed or inconsistent files.
class DataError : public Error {
public:
  using Error::Error;
};

/// The numerical procedure could not produce a usable result.
class NumericalError : public Error {
public:
  using Error::Error;
};

using WarningSink = std::function<void(const std::string &)>;

/// Replaces the process-wide warning sink (default writes to stderr).
/// Returns the previous sink.
WarningSink set_warning_sink(WarningSink sink);

void warn(const std::string &message);

} // namespace sdb
