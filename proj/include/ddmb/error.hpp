#pragma once

#include <stdexcept>
#include <string>

namespace ddmb {

// Malformed or invalid input data (CLI exit code 2).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Data are valid but the requested statistical procedure is undefined on
// them, e.g. an interval without events (CLI exit code 3).
class InadmissibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ddmb
