#pragma once

#include <stdexcept>

namespace fspca {

// Error categories aligned with the CLI exit codes:
// validation -> 2, I/O -> 3, numerical failure -> 4.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fspca
