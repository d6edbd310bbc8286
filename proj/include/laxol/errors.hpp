#pragma once

#include <stdexcept>
#include <string>

namespace laxol {

// Rejected argument or configuration (bad shapes, failed preconditions).
struct InvalidInput : std::runtime_error {
    explicit InvalidInput(const std::string& what) : std::runtime_error(what) {}
};

// A numeric evaluation produced something unusable (non-finite sample, empty
// candidate set at a grid point).
struct EvaluationError : std::runtime_error {
    explicit EvaluationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace laxol
