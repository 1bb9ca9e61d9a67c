#pragma once

#include <stdexcept>
#include <string>

namespace guslite {

// Bad user input: malformed documents, dangling references, missing files.
// The CLI maps these to exit code 1.
struct input_error : std::runtime_error {
  explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

// Broken internal invariant (overflow, monotonicity violation under
// --assert-invariants, impossible state). The CLI maps these to exit code 2.
struct internal_error : std::logic_error {
  explicit internal_error(const std::string& what) : std::logic_error(what) {}
};

}  // namespace guslite
