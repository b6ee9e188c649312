#pragma once

// Just enough JSON Schema to check our own artifacts: type, required,
// properties, additionalProperties: false, items, enum, and numeric bounds.
// Not a general validator.

#include <string>
#include <vector>

#include "json.hpp"

namespace psos {

// Returns "path: problem" strings; empty means the value validates.
std::vector<std::string> schema_violations(const nlohmann::json& value,
                                           const nlohmann::json& schema);

}  // namespace psos
