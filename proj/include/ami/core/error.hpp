#pragma once

#include <stdexcept>
#include <string>

namespace ami {

// Bad or inconsistent configuration. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed AMIE/AMIV input. Carries the byte offset where parsing stopped.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Numerical failure that may succeed on a fresh random draw (rank deficiency).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller broke an API precondition (missing gradient, empty list, shape mismatch).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace ami
