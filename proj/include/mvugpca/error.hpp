// Copyright 2026 The mvugpca Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace mvugpca {

/// Failure category. The CLI maps these onto its exit codes.
enum class ErrorKind {
  Input,         // I/O, parse, or argument errors
  Graph,         // disconnected or malformed neighbor graphs
  Solver,        // SDP non-convergence or infeasibility
  Segmentation,  // GPCA could not produce a segmentation
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace mvugpca
