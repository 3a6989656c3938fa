#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace amagold {

// Root of everything the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition (wrong dimension, malformed record, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Input outside the mathematical domain of an operation (e.g. non-finite theta).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid hyperparameters or model options.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, std::ptrdiff_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

  std::ptrdiff_t step() const noexcept { return step_; }

 private:
  std::ptrdiff_t step_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  IoError(const std::string& what, std::string path)
      : Error(what + ": " + path), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Carries every problem found while validating a command line / config file.
class UsageError : public Error {
 public:
  explicit UsageError(std::vector<std::string> problems)
      : Error(join(problems)), problems_(std::move(problems)) {}

  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& problems) {
    std::string out = "invalid configuration:";
    for (const auto& p : problems) out += "\n  - " + p;
    return out;
  }

  std::vector<std::string> problems_;
};

}  // namespace amagold
