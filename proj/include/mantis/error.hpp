#pragma once

#include <stdexcept>
#include <string>

namespace mantis {

// Base of every error the toolchain reports to callers.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad user input: unreadable files, malformed data, invalid configuration.
class UserError : public Error {
public:
  using Error::Error;
};

// A broken internal invariant (e.g. an emitted slice that fails to check).
class InternalError : public Error {
public:
  using Error::Error;
};

} // namespace mantis
