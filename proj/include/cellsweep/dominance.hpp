#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cellsweep/campaign.hpp"

namespace cellsweep::dominance {

// Result of partitioning measurement points among sensors: every point is
// owned by exactly one sensor (its nearest; ties to the lowest sensor id).
struct DominanceAssignment {
  std::map<std::uint32_t, std::uint32_t> owner;                    // point id -> sensor id
  std::map<std::uint32_t, std::vector<std::uint32_t>> per_sensor;  // sensor id -> point ids, input order
};

// True iff x is at least as close to m1 as to m2 (non-strict, so bisector
// points dominate both ways). Compared on squared distances: exact, no sqrt
// rounding.
inline bool dominates(const SensorNode& m1, const SensorNode& m2, const Point2D& x) {
  return squared_distance(x, m1.position) <= squared_distance(x, m2.position);
}

struct AssignOptions {
  enum class Strategy {
    automatic,   // grid index for large instances, brute force otherwise
    brute_force, // O(k*p) scan; the reference implementation
    grid,        // uniform-grid nearest-sensor index
  };
  Strategy strategy = Strategy::automatic;
  bool parallel = false; // OpenMP over points; bit-identical to serial
};

// Assign every point to its nearest sensor (ties to lowest sensor id). All
// strategy/parallel combinations produce identical assignments.
// Throws EmptySensorSet.
DominanceAssignment assign_dominances(const std::vector<SensorNode>& sensors,
                                      const std::vector<MeasurementPoint>& points,
                                      const AssignOptions& options = {});

struct PartitionStats {
  std::map<std::uint32_t, std::size_t> counts; // sensor id -> owned points
  std::size_t max_load = 0;
  std::size_t min_load = 0;
};

PartitionStats partition_stats(const DominanceAssignment& assignment);

// CSV export: header then one `point_id,sensor_id` row per point, point-id order.
std::string assignment_to_csv(const DominanceAssignment& assignment);

// Approximate dominance cell of each sensor: the campaign rectangle clipped
// by the bisector half-plane against every other sensor. Visualization only.
struct CellPolygon {
  std::uint32_t sensor_id = 0;
  std::vector<Point2D> ring; // counter-clockwise, not closed; empty if degenerate
};

std::vector<CellPolygon> dominance_polygons(const std::vector<SensorNode>& sensors,
                                            const AreaSize& area);

std::string polygons_to_geojson(const std::vector<CellPolygon>& polygons);

} // namespace cellsweep::dominance
