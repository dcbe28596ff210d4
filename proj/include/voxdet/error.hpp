// Copyright 2026 The voxdet Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef VOXDET_ERROR_HPP
#define VOXDET_ERROR_HPP

#include <stdexcept>
#include <string>

namespace voxdet {

/// Base class for every domain error raised by the library. The CLI maps
/// these to exit code 1; anything else is treated as a usage error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A box or parameterization with a non-positive extent.
class InvalidBox : public Error {
 public:
  using Error::Error;
};

class NonDifferentiablePoint : public Error {
 public:
  using Error::Error;
};

class VolumeTooSmall : public Error {
 public:
  using Error::Error;
};

class ConfigMissing : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DuplicateScanId : public Error {
 public:
  using Error::Error;
};

// File format errors. Messages always carry the file name and the first
// offending location (byte offset or JSON path).
class HeaderMismatch : public Error {
 public:
  using Error::Error;
};

class TruncatedPayload : public Error {
 public:
  using Error::Error;
};

class UnsupportedDtype : public Error {
 public:
  using Error::Error;
};

class MalformedBox : public Error {
 public:
  using Error::Error;
};

class MissingField : public Error {
 public:
  using Error::Error;
};

}  // namespace voxdet

#endif  // VOXDET_ERROR_HPP
