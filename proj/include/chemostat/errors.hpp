#pragma once

#include <stdexcept>
#include <string>

namespace chemostat {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// The Lotka-Sharpe residual has no sign change on [D_min, D_max].
class NoRootInBracket : public Error {
 public:
  using Error::Error;
};

class NonPositiveSample : public Error {
 public:
  using Error::Error;
};

/// A profile value is <= 0 or non-finite. `step` is -1 outside a time loop.
class NonPositiveProfile : public Error {
 public:
  NonPositiveProfile(const std::string& what, long step, long node)
      : Error(what), step_(step), node_(node) {}
  long step() const noexcept { return step_; }
  long node() const noexcept { return node_; }

 private:
  long step_;
  long node_;
};

class IncompatibleBoundary : public Error {
 public:
  using Error::Error;
};

class NonPositiveMeasurement : public Error {
 public:
  using Error::Error;
};

class SplitMassTooLarge : public Error {
 public:
  using Error::Error;
};

class IllPosedStep : public Error {
 public:
  using Error::Error;
};

class DegenerateMargin : public Error {
 public:
  using Error::Error;
};

}  // namespace chemostat
