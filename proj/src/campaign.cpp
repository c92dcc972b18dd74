#include "cellsweep/campaign.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace cellsweep {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& what) {
  throw Error("SchemaError", what);
}

const json& require_key(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error("missing key '" + std::string(key) + "' in " + where);
  return *it;
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key()))
      schema_error("unknown key '" + item.key() + "' in " + where);
  }
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) schema_error(where + " must be a number");
  return v.get<double>();
}

std::uint64_t as_u64(const json& v, const std::string& where) {
  if (!v.is_number_unsigned()) schema_error(where + " must be an unsigned integer");
  return v.get<std::uint64_t>();
}

std::uint32_t as_u32(const json& v, const std::string& where) {
  const std::uint64_t raw = as_u64(v, where);
  if (raw > 0xffffffffULL) schema_error(where + " exceeds 32 bits");
  return static_cast<std::uint32_t>(raw);
}

void check_in_area(const Point2D& p, const AreaSize& area, const std::string& what) {
  if (!(p.x >= 0.0 && p.x <= area.width_m && p.y >= 0.0 && p.y <= area.height_m))
    throw Error("BoundsError", what + " at (" + std::to_string(p.x) + ", " +
                                   std::to_string(p.y) + ") outside area");
}

} // namespace

double path_length(const Point2D& start, const std::vector<MeasurementPoint>& order) {
  std::set<std::uint32_t> seen;
  double total = 0.0;
  Point2D at = start;
  for (const auto& point : order) {
    if (!seen.insert(point.id).second)
      throw Error("DuplicateVisit", "point " + std::to_string(point.id) + " visited twice");
    total += euclidean_distance(at, point.position);
    at = point.position;
  }
  return total;
}

double path_length_indexed(const Point2D& start,
                           const std::vector<MeasurementPoint>& points,
                           const std::vector<std::uint32_t>& order) {
  double total = 0.0;
  Point2D at = start;
  for (const std::uint32_t idx : order) {
    total += euclidean_distance(at, points[idx].position);
    at = points[idx].position;
  }
  return total;
}

Campaign parse_campaign(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    schema_error(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) schema_error("top level must be an object");
  reject_unknown_keys(doc, {"area", "seed", "sensors", "points", "base_stations"}, "document");

  Campaign campaign;

  const json& area = require_key(doc, "area", "document");
  if (!area.is_object()) schema_error("'area' must be an object");
  reject_unknown_keys(area, {"width_m", "height_m"}, "area");
  campaign.area.width_m = as_number(require_key(area, "width_m", "area"), "area.width_m");
  campaign.area.height_m = as_number(require_key(area, "height_m", "area"), "area.height_m");
  if (!(campaign.area.width_m > 0.0) || !(campaign.area.height_m > 0.0))
    schema_error("area dimensions must be positive");

  campaign.seed = as_u64(require_key(doc, "seed", "document"), "seed");

  const json& sensors = require_key(doc, "sensors", "document");
  if (!sensors.is_array() || sensors.empty())
    schema_error("'sensors' must be a non-empty array");
  std::set<std::uint32_t> sensor_ids;
  for (const json& s : sensors) {
    if (!s.is_object()) schema_error("sensor entries must be objects");
    reject_unknown_keys(s, {"id", "x", "y", "speed_kmh"}, "sensor");
    SensorNode node;
    node.id = as_u32(require_key(s, "id", "sensor"), "sensor.id");
    node.position.x = as_number(require_key(s, "x", "sensor"), "sensor.x");
    node.position.y = as_number(require_key(s, "y", "sensor"), "sensor.y");
    const double kmh = as_number(require_key(s, "speed_kmh", "sensor"), "sensor.speed_kmh");
    if (!(kmh > 0.0)) schema_error("sensor.speed_kmh must be positive");
    node.speed_mps = kmh_to_mps(kmh);
    if (!sensor_ids.insert(node.id).second)
      throw Error("DuplicateId", "duplicate sensor id " + std::to_string(node.id));
    check_in_area(node.position, campaign.area, "sensor " + std::to_string(node.id));
    campaign.sensors.push_back(node);
  }

  std::set<std::uint32_t> bs_ids;
  std::set<std::uint32_t> cell_ids;
  if (auto it = doc.find("base_stations"); it != doc.end()) {
    if (!it->is_array()) schema_error("'base_stations' must be an array");
    for (const json& b : *it) {
      if (!b.is_object()) schema_error("base station entries must be objects");
      reject_unknown_keys(b, {"id", "x", "y", "cell_id", "antenna"}, "base_station");
      BaseStation bs;
      bs.id = as_u32(require_key(b, "id", "base_station"), "base_station.id");
      bs.position.x = as_number(require_key(b, "x", "base_station"), "base_station.x");
      bs.position.y = as_number(require_key(b, "y", "base_station"), "base_station.y");
      bs.cell_id = as_u32(require_key(b, "cell_id", "base_station"), "base_station.cell_id");
      const json& antenna = require_key(b, "antenna", "base_station");
      if (!antenna.is_string()) schema_error("base_station.antenna must be a string");
      bs.antenna = antenna.get<std::string>();
      if (!bs_ids.insert(bs.id).second)
        throw Error("DuplicateId", "duplicate base station id " + std::to_string(bs.id));
      if (!cell_ids.insert(bs.cell_id).second)
        throw Error("DuplicateId", "duplicate cell id " + std::to_string(bs.cell_id));
      check_in_area(bs.position, campaign.area, "base station " + std::to_string(bs.id));
      campaign.base_stations.push_back(bs);
    }
  }

  if (auto it = doc.find("points"); it != doc.end()) {
    if (!it->is_array()) schema_error("'points' must be an array");
    std::set<std::uint32_t> point_ids;
    for (const json& p : *it) {
      if (!p.is_object()) schema_error("point entries must be objects");
      reject_unknown_keys(p, {"id", "x", "y", "target_bs"}, "point");
      MeasurementPoint point;
      point.id = as_u32(require_key(p, "id", "point"), "point.id");
      point.position.x = as_number(require_key(p, "x", "point"), "point.x");
      point.position.y = as_number(require_key(p, "y", "point"), "point.y");
      if (auto tb = p.find("target_bs"); tb != p.end()) {
        const std::uint32_t bs_id = as_u32(*tb, "point.target_bs");
        if (!bs_ids.count(bs_id))
          schema_error("point " + std::to_string(point.id) + " targets unknown base station " +
                       std::to_string(bs_id));
        point.target_bs = bs_id;
      }
      if (!point_ids.insert(point.id).second)
        throw Error("DuplicateId", "duplicate point id " + std::to_string(point.id));
      check_in_area(point.position, campaign.area, "point " + std::to_string(point.id));
      campaign.points.push_back(point);
    }
  }

  return campaign;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IoError", "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("IoError", "cannot write " + path);
  out << content;
  if (!out) throw Error("IoError", "short write to " + path);
}

Campaign load_campaign(const std::string& path) {
  return parse_campaign(read_text_file(path));
}

} // namespace cellsweep
