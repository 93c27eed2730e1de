#pragma once

#include <string>
#include <variant>

#include "json.hpp"
#include "rb/core.hpp"

namespace rb {

using AnyInstance = std::variant<FeedbackInstance, MonotoneInstance, ProbeInstance, ReplenishInstance>;

const char* instance_type_name(const AnyInstance& inst);

// Schema errors carry the offending field path, e.g. "arms[2].alpha: ...".
AnyInstance instance_from_json(const nlohmann::json& j);
nlohmann::json instance_to_json(const AnyInstance& inst);

AnyInstance load_instance_file(const std::string& path);
AnyInstance parse_instance(const std::string& text);
std::string emit_instance(const AnyInstance& inst);  // pretty-printed, keys sorted

bool same_instance(const AnyInstance& a, const AnyInstance& b);

}  // namespace rb
