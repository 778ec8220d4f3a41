#pragma once

// JSON-in, JSON-out command layer shared by the C API and the CLI.

#include <string>

#include <json.hpp>

#include "bachgeom/error.hpp"

namespace bachgeom::cmd {

inline constexpr const char* kSchemaVersion = "1";

struct Outcome {
  nlohmann::json doc;
  /// 0 or an ErrorCode value.
  int status = 0;
};

/// Runs one of curvature, deform, conformal, eigen, normalize, construct, verify, catalog.
/// Never throws; failures are reported in doc["error"] and status.
Outcome run(const std::string& command, const nlohmann::json& config);

/// Error codes that mean a mathematical hypothesis did not hold rather than a malfunction.
bool is_hypothesis_failure(int status);

}  // namespace bachgeom::cmd
