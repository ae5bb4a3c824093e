// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace preim {

/// A linear solve or factorization did not produce a usable result.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A combination of options that the model cannot evaluate
/// (e.g. a gradient nonlinearity sampled at mesh nodes).
class UnsupportedConfiguration : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Appending an interpolation term requires a residual with a nonzero maximum.
class DegenerateResidual : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The offline greedy exceeded its iteration cap.
class NonTermination : public std::runtime_error {
 public:
  NonTermination(const std::string& what, std::string diagnostic)
      : std::runtime_error(what), diagnostic_(std::move(diagnostic)) {}
  const std::string& diagnostic() const noexcept { return diagnostic_; }

 private:
  std::string diagnostic_;
};

}  // namespace preim
