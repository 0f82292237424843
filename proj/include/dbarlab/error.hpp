#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace dbarlab {

using cplx = std::complex<double>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration file, domain spec or command-line value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Expression text that does not parse; carries the byte offset of the fault.
class ParseError : public ConfigError {
 public:
  ParseError(const std::string& what, std::size_t position)
      : ConfigError(what + " at position " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// An operation's documented precondition does not hold on the data
/// (e.g. |f| <= |g| violated, common zero of a Bezout tuple).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Expression evaluated on its declared pole set.
class PoleError : public Error {
 public:
  PoleError(const std::string& subtree, cplx at)
      : Error("pole hit in '" + subtree + "' at (" + std::to_string(at.real()) +
              ", " + std::to_string(at.imag()) + ")"),
        subtree_(subtree),
        at_(at) {}

  const std::string& subtree() const noexcept { return subtree_; }
  cplx at() const noexcept { return at_; }

 private:
  std::string subtree_;
  cplx at_;
};

/// Numerical procedure could not produce a result (rank deficiency,
/// unmet fit tolerance, disconnected grid graph).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace dbarlab
