// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace tslu {

// Every failure raised by the library derives from Error. The subclasses
// map onto the command-line exit-code contract (see tools/tslu.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes that do not compose.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Malformed corpus, config, checkpoint or annotation input.
class DataError : public Error {
 public:
  using Error::Error;
};

// A layer tape was consumed twice.
class TapeError : public Error {
 public:
  using Error::Error;
};

// Non-finite values reached a place where they must not appear.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

// A verification suite (gradient check, oracle sweep) failed.
class VerificationError : public Error {
 public:
  using Error::Error;
};

}  // namespace tslu
