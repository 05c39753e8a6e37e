#pragma once

#include <stdexcept>
#include <string>

namespace risnc {

/// Raised for invalid inputs, dimension mismatches and configuration errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

}  // namespace risnc
