#pragma once

#include <string>

#include <json.hpp>

#include "stableweb/aged_path.hpp"
#include "stableweb/cadlag.hpp"
#include "stableweb/collection.hpp"

namespace stableweb {

using json = nlohmann::json;

json to_json(const PiecewisePath& f);
PiecewisePath path_from_json(const json& j);

json to_json(const AgedPath& p);
AgedPath aged_path_from_json(const json& j);

// {"horizon":..., "label":..., "paths":[...]}; a bare array of paths is also accepted
// when the horizon can be read off the paths.
json to_json(const PathCollection& G);
PathCollection collection_from_json(const json& j);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace stableweb
