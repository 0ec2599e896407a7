#pragma once

#include <stdexcept>
#include <string>

namespace refrec {

// Bad input the user can fix: malformed files, out-of-range parameters,
// inconsistent manifests. The CLI maps this to exit code 2.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// A pipeline stage failed after validation passed. Exit code 3.
struct StageError : std::runtime_error {
  StageError(const std::string& stage, const std::string& cause)
      : std::runtime_error("stage '" + stage + "' failed: " + cause),
        stage_name(stage) {}
  std::string stage_name;
};

}  // namespace refrec
