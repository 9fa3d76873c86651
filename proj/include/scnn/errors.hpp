#pragma once

#include <stdexcept>
#include <string>

namespace scnn {

// Semantic/validation failures: bad configs, bad model descriptors, shape
// mismatches, constraint violations. The CLI maps these to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// File-level failures: missing files, short reads, bad magic, parse errors.
// The CLI maps these to exit code 2.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace scnn
