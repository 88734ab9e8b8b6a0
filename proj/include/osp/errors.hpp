#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace osp {

// Bad argument: wrong dimension, out-of-space element, wrong vector length.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Enumeration or table size above the configured cap.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Calls made out of the predict -> update order.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A Cholesky pivot stayed non-positive after the jitter retry.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::size_t round)
      : std::runtime_error(what + " (round " + std::to_string(round) + ")"),
        round_(round) {}

  std::size_t round() const noexcept { return round_; }

 private:
  std::size_t round_;
};

// Invalid experiment configuration or stream specification. `line` is
// 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::string field = {}, int line = 0)
      : std::runtime_error(format(what, field, line)),
        field_(std::move(field)),
        line_(line) {}

  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& what, const std::string& field,
                            int line) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!field.empty()) out += "'" + field + "': ";
    return out + what;
  }

  std::string field_;
  int line_;
};

// Malformed CSV input to `plot`, `check` or `replay`.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace osp
