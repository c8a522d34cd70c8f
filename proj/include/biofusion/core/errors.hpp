// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace biofusion {

/// Stable error categories. The numeric values are part of the C ABI.
enum class ErrorCode : int {
  kUsage = 1,
  kParse = 2,
  kAlphabet = 3,
  kShape = 4,
  kConfig = 5,
  kIo = 6,
  kCorruptCheckpoint = 7,
  kSchema = 8,
  kContextOverflow = 9,
  kMissingPrerequisite = 10,
  kFreezeViolation = 11,
  kEmptyInput = 12,
  kEmptyMask = 13,
  kNumeric = 14,
  kFormat = 15,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define BIOFUSION_DEFINE_ERROR(Name, Code)                                   \
  class Name : public Error {                                                \
   public:                                                                   \
    explicit Name(const std::string& what) : Error(ErrorCode::Code, what) {} \
  }

BIOFUSION_DEFINE_ERROR(UsageError, kUsage);
BIOFUSION_DEFINE_ERROR(ShapeError, kShape);
BIOFUSION_DEFINE_ERROR(ConfigError, kConfig);
BIOFUSION_DEFINE_ERROR(IoError, kIo);
BIOFUSION_DEFINE_ERROR(CorruptCheckpointError, kCorruptCheckpoint);
BIOFUSION_DEFINE_ERROR(MissingPrerequisiteError, kMissingPrerequisite);
BIOFUSION_DEFINE_ERROR(FreezeViolationError, kFreezeViolation);
BIOFUSION_DEFINE_ERROR(EmptyInputError, kEmptyInput);
BIOFUSION_DEFINE_ERROR(EmptyMaskError, kEmptyMask);
BIOFUSION_DEFINE_ERROR(NumericError, kNumeric);
BIOFUSION_DEFINE_ERROR(FormatError, kFormat);

#undef BIOFUSION_DEFINE_ERROR

/// SMILES grammar violation; `position` is the byte offset where parsing stopped.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(ErrorCode::kParse, what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class AlphabetError : public Error {
 public:
  AlphabetError(char offending, std::size_t position)
      : Error(ErrorCode::kAlphabet, std::string("invalid residue '") + offending +
                                        "' at position " + std::to_string(position)),
        offending_(offending),
        position_(position) {}
  char offending() const noexcept { return offending_; }
  std::size_t position() const noexcept { return position_; }

 private:
  char offending_;
  std::size_t position_;
};

class SchemaError : public Error {
 public:
  SchemaError(const std::string& what, std::size_t line)
      : Error(ErrorCode::kSchema, "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Raised when a prompt does not fit the context window. `excess` is the number
/// of modality rows that would have to be dropped to fit.
class ContextOverflowError : public Error {
 public:
  ContextOverflowError(std::size_t required, std::size_t limit, std::size_t excess,
                       bool truncatable)
      : Error(ErrorCode::kContextOverflow,
              "prompt needs " + std::to_string(required) + " positions, context holds " +
                  std::to_string(limit) + "; truncate " + std::to_string(excess) +
                  " modality tokens" + (truncatable ? "" : " (not enough modality tokens)")),
        excess_(excess),
        truncatable_(truncatable) {}
  std::size_t excess() const noexcept { return excess_; }
  bool truncatable() const noexcept { return truncatable_; }

 private:
  std::size_t excess_;
  bool truncatable_;
};

}  // namespace biofusion
