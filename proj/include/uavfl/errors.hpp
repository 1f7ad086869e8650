#pragma once

#include <stdexcept>
#include <string>

namespace uavfl {

/// Base for every error raised by the simulator libraries.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration failed schema or range validation (CLI exit code 2).
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

/// A link rate of zero makes a transfer latency unbounded.
class ZeroRate : public Error {
 public:
  using Error::Error;
};

class EmptySelection : public Error {
 public:
  using Error::Error;
};

class EmptyDataset : public Error {
 public:
  using Error::Error;
};

class EmptyContribution : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// A gradient or parameter update produced NaN or Inf.
class NonFiniteGradient : public Error {
 public:
  using Error::Error;
};

/// The device does not hold the requested subchannel at its serving UAV.
class NotAllocated : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace uavfl
