#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace dackrr {

/// Violated precondition on a caller-supplied argument.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A point outside the kernel's domain, or a non-finite input.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Factorization or inversion failure. Carries the failing pivot and, for
/// block solves, the block index.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what,
                        std::optional<std::size_t> pivot = std::nullopt,
                        std::optional<std::size_t> block = std::nullopt)
      : std::runtime_error(what), pivot_(pivot), block_(block) {}

  std::optional<std::size_t> pivot() const { return pivot_; }
  std::optional<std::size_t> block() const { return block_; }

 private:
  std::optional<std::size_t> pivot_;
  std::optional<std::size_t> block_;
};

/// Malformed or inconsistent experiment / CLI configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dackrr
