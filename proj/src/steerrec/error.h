// Copyright 2026 The steerrec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STEERREC_ERROR_H_
#define STEERREC_ERROR_H_

#include <stdexcept>
#include <string>

namespace steerrec {

// Error categories. The C API maps these one-to-one onto status codes, so
// the numeric values are part of the ABI.
enum class ErrorCode {
  kInvalidArgument = 1,
  kNotFound = 2,
  kParse = 3,
  kDuplicate = 4,
  kIo = 5,
  kComprehension = 6,
  kTransient = 7,
  kProvider = 8,
  kFingerprintMismatch = 9,
  kNumerical = 10,
  kConfig = 11,
  kInternal = 12,
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

  // Transport hiccups and rate limits; everything else is final.
  bool retryable() const { return code_ == ErrorCode::kTransient; }

 private:
  ErrorCode code_;
};

// The judge saw too little probability mass on the grade tokens to trust
// the rating.
class ComprehensionError : public Error {
 public:
  explicit ComprehensionError(double observed_mass);

  double observed_mass() const { return observed_mass_; }

 private:
  double observed_mass_;
};

}  // namespace steerrec

#endif  // STEERREC_ERROR_H_
