#include "stableweb/json_io.hpp"

#include <fstream>
#include <sstream>

#include "stableweb/error.hpp"

namespace stableweb {

json to_json(const PiecewisePath& f) {
  json segs = json::array();
  for (const Segment& s : f.segments()) segs.push_back({s.start, s.value, s.slope});
  return {{"lo", f.lo()}, {"hi", f.hi()}, {"segments", std::move(segs)}};
}

PiecewisePath path_from_json(const json& j) {
  try {
    std::vector<Segment> segs;
    for (const json& s : j.at("segments")) {
      if (!s.is_array() || s.size() != 3) throw ArgumentError("segment must be [start, value, slope]");
      segs.push_back({s[0].get<double>(), s[1].get<double>(), s[2].get<double>()});
    }
    return PiecewisePath(j.at("lo").get<double>(), j.at("hi").get<double>(), std::move(segs));
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("malformed path JSON: ") + e.what());
  }
}

json to_json(const AgedPath& p) {
  return {{"sigma", p.sigma()}, {"gamma", to_json(p.gamma())}, {"age", to_json(p.age())}};
}

AgedPath aged_path_from_json(const json& j) {
  try {
    return AgedPath(j.at("sigma").get<double>(), path_from_json(j.at("gamma")),
                    path_from_json(j.at("age")));
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("malformed aged path JSON: ") + e.what());
  }
}

json to_json(const PathCollection& G) {
  json paths = json::array();
  for (const AgedPath& p : G.paths()) paths.push_back(to_json(p));
  return {{"horizon", G.horizon()}, {"label", G.label()}, {"paths", std::move(paths)}};
}

PathCollection collection_from_json(const json& j) {
  try {
    const json& arr = j.is_array() ? j : j.at("paths");
    std::vector<AgedPath> paths;
    for (const json& p : arr) paths.push_back(aged_path_from_json(p));
    double horizon = 0.0;
    if (j.is_object() && j.contains("horizon"))
      horizon = j.at("horizon").get<double>();
    else if (!paths.empty())
      horizon = paths.front().horizon();
    else
      throw ArgumentError("empty collection without a horizon");
    std::string label = j.is_object() ? j.value("label", std::string{}) : std::string{};
    return PathCollection(std::move(paths), horizon, std::move(label));
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("malformed collection JSON: ") + e.what());
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ArgumentError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write " + path);
  out << text;
  if (!out) throw ArgumentError("write failed for " + path);
}

}  // namespace stableweb
