// Copyright (c) 2026 DoGCLR Authors. All Rights Reserved.
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

#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace dogclr {

enum class ErrorKind {
  // parsing / data
  MalformedHeader,
  JointCountMismatch,
  EmptyFile,
  NoFrames,
  UnknownTemplate,
  EmptySplit,
  MissingParentMap,
  // graph
  IndexOutOfRange,
  DegenerateGraph,
  // encoder / math
  ShapeMismatch,
  ZeroVector,
  NonDifferentiableConfig,
  InvalidTheta,
  // memory bank
  EmptyBank,
  BankNotFull,
  InvalidDistribution,
  // trainer / eval
  EmptyBatch,
  LabelMismatch,
  EmptyTrain,
  MisalignedStreams,
  // surface
  ConfigError,
  IoError,
};

const char* error_kind_name(ErrorKind kind);

/// Single exception type carrying a machine-checkable kind plus a message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedHeader: return "MalformedHeader";
    case ErrorKind::JointCountMismatch: return "JointCountMismatch";
    case ErrorKind::EmptyFile: return "EmptyFile";
    case ErrorKind::NoFrames: return "NoFrames";
    case ErrorKind::UnknownTemplate: return "UnknownTemplate";
    case ErrorKind::EmptySplit: return "EmptySplit";
    case ErrorKind::MissingParentMap: return "MissingParentMap";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::DegenerateGraph: return "DegenerateGraph";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::NonDifferentiableConfig: return "NonDifferentiableConfig";
    case ErrorKind::InvalidTheta: return "InvalidTheta";
    case ErrorKind::EmptyBank: return "EmptyBank";
    case ErrorKind::BankNotFull: return "BankNotFull";
    case ErrorKind::InvalidDistribution: return "InvalidDistribution";
    case ErrorKind::EmptyBatch: return "EmptyBatch";
    case ErrorKind::LabelMismatch: return "LabelMismatch";
    case ErrorKind::EmptyTrain: return "EmptyTrain";
    case ErrorKind::MisalignedStreams: return "MisalignedStreams";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "UnknownError";
}

/// Non-fatal diagnostic on stderr. Used where the contract says "warning, not
/// an error" (isolated joints, zero-variance style statistics).
inline void warn(const std::string& message) {
  std::fprintf(stderr, "[dogclr] warning: %s\n", message.c_str());
}

}  // namespace dogclr
