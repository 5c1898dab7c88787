// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace otacal {

/// Structural or numerical model failure: disconnected graph, noise
/// covariance that is not positive definite, ill-conditioned reduced system.
/// The CLI maps this to exit code 2; configuration errors are reported as
/// std::invalid_argument and map to exit code 1.
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace otacal
