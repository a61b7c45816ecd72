/* Copyright 2026 The Gicx Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef GICX_NUMERICS_ERRORS_H_
#define GICX_NUMERICS_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gicx {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible tensor or image shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Argument outside its documented domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Caller violated a precondition of an operation (e.g. backward on a
// non-scalar, optimizer step without gradients).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Malformed container, snapshot or checkpoint. `field()` names the first
// field that failed validation.
class FormatError : public Error {
 public:
  FormatError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Entropy decoder ran out of input.
class DecodeError : public Error {
 public:
  DecodeError(std::size_t position, const std::string& what)
      : Error(what + " at byte " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// A file or directory could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// A bitstream was produced for a different model than the one loaded.
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

// A NaN or infinity showed up where only finite values are allowed.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace gicx

#endif  // GICX_NUMERICS_ERRORS_H_
