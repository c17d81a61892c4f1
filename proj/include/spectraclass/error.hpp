#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spectraclass {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input. Line and column are 1-based; column is 0 when the
/// input format has no meaningful column (e.g. spectrum rows).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column = 0,
             std::string token = {})
      : Error(Format(what, line, column, token)),
        line_(line),
        column_(column),
        token_(std::move(token)) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& token() const noexcept { return token_; }

 private:
  static std::string Format(const std::string& what, std::size_t line,
                            std::size_t column, const std::string& token) {
    std::string msg = "line " + std::to_string(line);
    if (column != 0) msg += ", column " + std::to_string(column);
    msg += ": " + what;
    if (!token.empty()) msg += " (at '" + token + "')";
    return msg;
  }

  std::size_t line_;
  std::size_t column_;
  std::string token_;
};

/// A value outside its mathematical domain (negative abundance, membership
/// outside [0,1], ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class EmptySpectrum : public Error {
 public:
  EmptySpectrum() : Error("spectrum contains no data points") {}
};

class CannotNormalize : public Error {
 public:
  using Error::Error;
};

class InvalidThresholds : public Error {
 public:
  InvalidThresholds(double l, double h)
      : Error("membership thresholds require l < h (got l=" +
              std::to_string(l) + ", h=" + std::to_string(h) + ")") {}
};

class UnknownTerm : public Error {
 public:
  explicit UnknownTerm(std::string name)
      : Error("unknown term '" + name + "'"), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class DuplicateName : public Error {
 public:
  explicit DuplicateName(std::string name)
      : Error("duplicate name '" + name + "'"), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// A rule base that parsed but violates a structural invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class NoClasses : public Error {
 public:
  NoClasses() : Error("membership vector has no classes") {}
};

class EmptyEnsemble : public Error {
 public:
  EmptyEnsemble() : Error("ensemble contains no spectra") {}
};

class IncompatibleDBs : public Error {
 public:
  using Error::Error;
};

class BadIndex : public Error {
 public:
  explicit BadIndex(std::size_t index)
      : Error("spot index " + std::to_string(index) + " out of range") {}
};

}  // namespace spectraclass
