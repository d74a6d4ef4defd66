/*
 * Copyright 2026 The tldr Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef TLDR_ERRORS_HPP_
#define TLDR_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace tldr {

// Broad failure class. The CLI maps these onto process exit codes.
enum class ErrorClass {
  kUsage,      // bad flags or arguments
  kData,       // malformed or inconsistent input files
  kNumerical,  // factorization failures, divergence, degenerate statistics
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, std::string name, const std::string& what)
      : std::runtime_error(name + ": " + what), cls_(cls), name_(std::move(name)) {}

  ErrorClass error_class() const noexcept { return cls_; }
  const std::string& name() const noexcept { return name_; }

 private:
  ErrorClass cls_;
  std::string name_;
};

#define TLDR_DEFINE_ERROR(Type, Class)                               \
  class Type : public Error {                                        \
   public:                                                           \
    explicit Type(const std::string& what) : Error(Class, #Type, what) {} \
  }

TLDR_DEFINE_ERROR(FormatError, ErrorClass::kData);
TLDR_DEFINE_ERROR(ShapeError, ErrorClass::kData);
TLDR_DEFINE_ERROR(DataError, ErrorClass::kData);
TLDR_DEFINE_ERROR(IoError, ErrorClass::kData);
TLDR_DEFINE_ERROR(PairingError, ErrorClass::kData);
TLDR_DEFINE_ERROR(SchemaError, ErrorClass::kData);
TLDR_DEFINE_ERROR(EmptyInputError, ErrorClass::kData);
TLDR_DEFINE_ERROR(MissingEmbeddingError, ErrorClass::kData);
TLDR_DEFINE_ERROR(EmptyCategoryError, ErrorClass::kData);
TLDR_DEFINE_ERROR(DomainError, ErrorClass::kData);
TLDR_DEFINE_ERROR(InsufficientSamplesError, ErrorClass::kData);
TLDR_DEFINE_ERROR(SingularMatrixError, ErrorClass::kNumerical);
TLDR_DEFINE_ERROR(DegenerateGapError, ErrorClass::kNumerical);
TLDR_DEFINE_ERROR(DegenerateReferenceError, ErrorClass::kNumerical);
TLDR_DEFINE_ERROR(SearchFailedError, ErrorClass::kNumerical);
TLDR_DEFINE_ERROR(DivergenceError, ErrorClass::kNumerical);
TLDR_DEFINE_ERROR(UsageError, ErrorClass::kUsage);

#undef TLDR_DEFINE_ERROR

}  // namespace tldr

#endif  // TLDR_ERRORS_HPP_
