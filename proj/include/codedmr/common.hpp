#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace codedmr {

using Bytes = std::vector<std::uint8_t>;

/// Invalid user-supplied parameters. The CLI maps these to exit code 2.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Violation of the shuffle protocol contract (missing value, inconsistent
/// headers, malformed wire data). Indicates a bug or corrupted input.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace codedmr
