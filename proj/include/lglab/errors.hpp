#pragma once

#include <stdexcept>
#include <string>

namespace lglab {

/// Base of every error raised by the library. The CLI maps these onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotPsd : public Error {
  using Error::Error;
};
class InvalidPovm : public Error {
  using Error::Error;
};
class InvalidConfig : public Error {
  using Error::Error;
};
class BadIndex : public Error {
  using Error::Error;
};
class BadPair : public Error {
  using Error::Error;
};
class UncoveredRegime : public Error {
  using Error::Error;
};
class UnknownParameter : public Error {
  using Error::Error;
};
class UnknownQuantity : public Error {
  using Error::Error;
};
class EmptyFeasibleRegion : public Error {
  using Error::Error;
};
class NoViolationAnywhere : public Error {
  using Error::Error;
};

}  // namespace lglab
