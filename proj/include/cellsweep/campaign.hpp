#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cellsweep/error.hpp"

namespace cellsweep {

// Planar position in meters. Campaigns work on a local tangent-plane
// projection, so all geometry is plain 2-D Euclidean.
struct Point2D {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2D&, const Point2D&) = default;
};

inline double squared_distance(const Point2D& a, const Point2D& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

inline double euclidean_distance(const Point2D& a, const Point2D& b) {
  return std::sqrt(squared_distance(a, b));
}

// A geographic position where a mobile sensor has to take network
// measurements, optionally bound to one base station.
struct MeasurementPoint {
  std::uint32_t id = 0;
  Point2D position;
  std::optional<std::uint32_t> target_bs;
  std::vector<std::string> required_fields; // empty = full standard field set

  friend bool operator==(const MeasurementPoint&, const MeasurementPoint&) = default;
};

struct BaseStation {
  std::uint32_t id = 0;
  Point2D position;
  std::uint32_t cell_id = 0;
  std::string antenna;

  friend bool operator==(const BaseStation&, const BaseStation&) = default;
};

// Mobile measuring agent. Speed is stored in m/s; config files carry km/h.
struct SensorNode {
  std::uint32_t id = 0;
  Point2D position;
  double speed_mps = 0.0;

  friend bool operator==(const SensorNode&, const SensorNode&) = default;
};

struct AreaSize {
  double width_m = 0.0;
  double height_m = 0.0;

  friend bool operator==(const AreaSize&, const AreaSize&) = default;
};

struct Campaign {
  AreaSize area;
  std::uint64_t seed = 0;
  std::vector<SensorNode> sensors;
  std::vector<MeasurementPoint> points;
  std::vector<BaseStation> base_stations;
};

inline double kmh_to_mps(double kmh) { return kmh / 3.6; }

// Sum of consecutive Euclidean legs from `start` through `order`. Routes are
// open paths: there is no return leg to the start.
double path_length(const Point2D& start, const std::vector<MeasurementPoint>& order);

// Same, over a permutation of indices into `points`.
double path_length_indexed(const Point2D& start,
                           const std::vector<MeasurementPoint>& points,
                           const std::vector<std::uint32_t>& order);

// Parse and validate a campaign config document (JSON, schema in README).
// Throws SchemaError / BoundsError / DuplicateId.
Campaign parse_campaign(const std::string& text);

// parse_campaign over a file's contents. Throws IoError when unreadable.
Campaign load_campaign(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace cellsweep
