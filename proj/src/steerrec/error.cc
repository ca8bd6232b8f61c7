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

#include "steerrec/error.h"

#include <cstdio>

namespace steerrec {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kDuplicate: return "duplicate";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kComprehension: return "comprehension";
    case ErrorCode::kTransient: return "transient";
    case ErrorCode::kProvider: return "provider";
    case ErrorCode::kFingerprintMismatch: return "fingerprint_mismatch";
    case ErrorCode::kNumerical: return "numerical";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

namespace {

std::string MassMessage(double mass) {
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "grade tokens carry probability mass %.6f, need > 0.9", mass);
  return buf;
}

}  // namespace

ComprehensionError::ComprehensionError(double observed_mass)
    : Error(ErrorCode::kComprehension, MassMessage(observed_mass)),
      observed_mass_(observed_mass) {}

}  // namespace steerrec
