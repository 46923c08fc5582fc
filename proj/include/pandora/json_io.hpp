#pragma once

#include <string>

#include <json.hpp>

#include "pandora/model.hpp"

namespace pandora {

/// Parses the canonical instance document:
/// { "values": [...], "boxes": [{"id","cost","root_dist"}],
///   "edges": [{"from","to","transition"}], "transitions": {id: rows} }
/// and validates it. Throws ValidationError / PandoraError on bad input.
Instance instance_from_json(const nlohmann::json& doc);

Instance instance_from_string(const std::string& text);

Instance load_instance(const std::string& path);

nlohmann::json instance_to_json(const Instance& inst);

}  // namespace pandora
