#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace colearn {

// Raised when a caller breaks an operation's precondition (dimension
// mismatch, out-of-range parameter, non-finite input).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised by the position codec when a bitstream cannot be decoded.
class DecodeError : public std::runtime_error {
 public:
  DecodeError(const std::string& what, std::size_t bit_position)
      : std::runtime_error(what + " (bit " + std::to_string(bit_position) + ")"),
        bit_position_(bit_position) {}

  std::size_t bit_position() const noexcept { return bit_position_; }

 private:
  std::size_t bit_position_;
};

#define COLEARN_REQUIRE(cond, msg)                  \
  do {                                              \
    if (!(cond)) throw ::colearn::ContractViolation(msg); \
  } while (0)

}  // namespace colearn
