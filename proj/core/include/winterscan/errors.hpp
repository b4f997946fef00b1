#pragma once

#include <stdexcept>
#include <string>

namespace winterscan {

/// Base class for all toolkit errors. Subcommands map these to exit code 1.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class IoFailure : public Error {
  public:
    using Error::Error;
};

}  // namespace winterscan
