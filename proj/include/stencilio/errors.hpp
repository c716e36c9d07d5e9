/*
Copyright 2026 <Project Authors>

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
#pragma once

#include <stdexcept>
#include <string>

namespace stencilio {

enum class ErrorCode {
  InvalidArgument,
  OutOfRange,
  Overflow,
  CapacityExceeded,
  AlreadyResident,
  NotResident,
  MissingInput,
  MissingOutputSlot,
  AlreadyEvaluated,
  UnusableConfiguration,
  BudgetExceeded,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::CapacityExceeded: return "CapacityExceeded";
    case ErrorCode::AlreadyResident: return "AlreadyResident";
    case ErrorCode::NotResident: return "NotResident";
    case ErrorCode::MissingInput: return "MissingInput";
    case ErrorCode::MissingOutputSlot: return "MissingOutputSlot";
    case ErrorCode::AlreadyEvaluated: return "AlreadyEvaluated";
    case ErrorCode::UnusableConfiguration: return "UnusableConfiguration";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace stencilio
