#pragma once

#include <stdexcept>
#include <string>

namespace s2v {

// Problems with input data or file formats. The CLI maps this to exit code 2.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Bad command-line usage. The CLI maps this to exit code 1.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace s2v
