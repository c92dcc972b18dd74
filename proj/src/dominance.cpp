#include "cellsweep/dominance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace cellsweep::dominance {

namespace {

// (squared distance, sensor id), lexicographic: nearest wins, ties to lowest id.
struct Best {
  double d2 = std::numeric_limits<double>::infinity();
  std::uint32_t sensor_id = 0;

  bool beats(double cand_d2, std::uint32_t cand_id) const {
    return cand_d2 < d2 || (cand_d2 == d2 && cand_id < sensor_id);
  }
};

std::uint32_t nearest_brute(const std::vector<SensorNode>& sensors, const Point2D& p) {
  Best best;
  for (const auto& sensor : sensors) {
    const double d2 = squared_distance(p, sensor.position);
    if (best.beats(d2, sensor.id)) best = {d2, sensor.id};
  }
  return best.sensor_id;
}

// Uniform-grid index over sensor positions. Queries expand cell rings around
// the point until the ring's lower distance bound exceeds the best squared
// distance found, which also guarantees every exact tie is visited.
class SensorGrid {
public:
  explicit SensorGrid(const std::vector<SensorNode>& sensors) : sensors_(sensors) {
    min_ = max_ = sensors.front().position;
    for (const auto& s : sensors) {
      min_.x = std::min(min_.x, s.position.x);
      min_.y = std::min(min_.y, s.position.y);
      max_.x = std::max(max_.x, s.position.x);
      max_.y = std::max(max_.y, s.position.y);
    }
    const double extent = std::max(max_.x - min_.x, max_.y - min_.y);
    const std::size_t side = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::sqrt(static_cast<double>(sensors.size()))));
    cell_ = extent > 0.0 ? extent / static_cast<double>(side) : 1.0;
    nx_ = cell_index(max_.x, min_.x) + 1;
    ny_ = cell_index(max_.y, min_.y) + 1;
    cells_.resize(nx_ * ny_);
    for (std::size_t i = 0; i < sensors.size(); ++i) {
      const auto& pos = sensors[i].position;
      cells_[cell_index(pos.x, min_.x) + nx_ * cell_index(pos.y, min_.y)].push_back(i);
    }
  }

  std::uint32_t nearest(const Point2D& p) const {
    // The query's own cell may lie outside the grid; rings are measured from
    // it so the (r-1)-cell distance bound stays valid for any query.
    const auto vx = static_cast<std::ptrdiff_t>(std::floor((p.x - min_.x) / cell_));
    const auto vy = static_cast<std::ptrdiff_t>(std::floor((p.y - min_.y) / cell_));
    const auto snx = static_cast<std::ptrdiff_t>(nx_);
    const auto sny = static_cast<std::ptrdiff_t>(ny_);

    // Rings below `first` cannot touch the grid; `last` covers every cell.
    const std::ptrdiff_t first =
        std::max({std::ptrdiff_t{0}, -vx, vx - snx + 1, -vy, vy - sny + 1});
    const std::ptrdiff_t last = std::max(std::max(std::abs(vx), std::abs(vx - snx + 1)),
                                         std::max(std::abs(vy), std::abs(vy - sny + 1)));

    Best best;
    for (std::ptrdiff_t ring = first; ring <= last; ++ring) {
      if (std::isfinite(best.d2)) {
        // Cells at Chebyshev ring r are at least (r-1) cell widths away; the
        // non-strict compare keeps exact ties reachable.
        const double bound = static_cast<double>(ring - 1) * cell_;
        if (bound > 0.0 && bound * bound > best.d2) break;
      }
      scan_ring(vx, vy, ring, p, best);
    }
    return best.sensor_id;
  }

private:
  std::size_t cell_index(double v, double origin) const {
    const double rel = (v - origin) / cell_;
    return rel <= 0.0 ? 0 : static_cast<std::size_t>(rel);
  }

  void scan_row(std::ptrdiff_t iy, std::ptrdiff_t x0, std::ptrdiff_t x1, const Point2D& p,
                Best& best) const {
    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(ny_)) return;
    x0 = std::max<std::ptrdiff_t>(x0, 0);
    x1 = std::min<std::ptrdiff_t>(x1, static_cast<std::ptrdiff_t>(nx_) - 1);
    for (std::ptrdiff_t ix = x0; ix <= x1; ++ix) {
      for (const std::size_t si : cells_[static_cast<std::size_t>(ix) +
                                         nx_ * static_cast<std::size_t>(iy)]) {
        const double d2 = squared_distance(p, sensors_[si].position);
        if (best.beats(d2, sensors_[si].id)) best = {d2, sensors_[si].id};
      }
    }
  }

  // One Chebyshev ring, clipped to the grid box.
  void scan_ring(std::ptrdiff_t cx, std::ptrdiff_t cy, std::ptrdiff_t ring,
                 const Point2D& p, Best& best) const {
    if (ring == 0) {
      scan_row(cy, cx, cx, p, best);
      return;
    }
    scan_row(cy - ring, cx - ring, cx + ring, p, best);
    scan_row(cy + ring, cx - ring, cx + ring, p, best);
    for (std::ptrdiff_t iy = std::max<std::ptrdiff_t>(cy - ring + 1, 0),
                        top = std::min<std::ptrdiff_t>(cy + ring - 1,
                                                       static_cast<std::ptrdiff_t>(ny_) - 1);
         iy <= top; ++iy) {
      scan_row(iy, cx - ring, cx - ring, p, best);
      scan_row(iy, cx + ring, cx + ring, p, best);
    }
  }

  const std::vector<SensorNode>& sensors_;
  Point2D min_, max_;
  double cell_ = 1.0;
  std::size_t nx_ = 1, ny_ = 1;
  std::vector<std::vector<std::size_t>> cells_;
};

} // namespace

DominanceAssignment assign_dominances(const std::vector<SensorNode>& sensors,
                                      const std::vector<MeasurementPoint>& points,
                                      const AssignOptions& options) {
  if (sensors.empty()) throw Error("EmptySensorSet", "no sensors to assign points to");

  using Strategy = AssignOptions::Strategy;
  Strategy strategy = options.strategy;
  if (strategy == Strategy::automatic) {
    strategy = (sensors.size() >= 32 && points.size() >= 1024) ? Strategy::grid
                                                               : Strategy::brute_force;
  }

  std::vector<std::uint32_t> owner_by_index(points.size());
  if (strategy == Strategy::grid) {
    SensorGrid grid(sensors);
#pragma omp parallel for schedule(static) if (options.parallel)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(points.size()); ++i)
      owner_by_index[i] = grid.nearest(points[i].position);
  } else {
#pragma omp parallel for schedule(static) if (options.parallel)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(points.size()); ++i)
      owner_by_index[i] = nearest_brute(sensors, points[i].position);
  }

  DominanceAssignment assignment;
  for (const auto& sensor : sensors) assignment.per_sensor[sensor.id];
  for (std::size_t i = 0; i < points.size(); ++i) {
    assignment.owner[points[i].id] = owner_by_index[i];
    assignment.per_sensor[owner_by_index[i]].push_back(points[i].id);
  }
  return assignment;
}

PartitionStats partition_stats(const DominanceAssignment& assignment) {
  PartitionStats stats;
  bool first = true;
  for (const auto& [sensor_id, point_ids] : assignment.per_sensor) {
    stats.counts[sensor_id] = point_ids.size();
    if (first) {
      stats.max_load = stats.min_load = point_ids.size();
      first = false;
    } else {
      stats.max_load = std::max(stats.max_load, point_ids.size());
      stats.min_load = std::min(stats.min_load, point_ids.size());
    }
  }
  return stats;
}

std::string assignment_to_csv(const DominanceAssignment& assignment) {
  std::ostringstream out;
  out << "point_id,sensor_id\n";
  for (const auto& [point_id, sensor_id] : assignment.owner)
    out << point_id << ',' << sensor_id << '\n';
  return out.str();
}

namespace {

// Clip a convex ring with the half plane of points at least as close to
// `keep` as to `other` (Sutherland-Hodgman against the bisector).
std::vector<Point2D> clip_halfplane(const std::vector<Point2D>& ring, const Point2D& keep,
                                    const Point2D& other) {
  // inside(p) <=> |p-keep|^2 <= |p-other|^2 <=> 2 p.(other-keep) <= |other|^2-|keep|^2
  const double ax = other.x - keep.x;
  const double ay = other.y - keep.y;
  const double c = 0.5 * (other.x * other.x + other.y * other.y - keep.x * keep.x -
                          keep.y * keep.y);
  auto side = [&](const Point2D& p) { return ax * p.x + ay * p.y - c; };

  std::vector<Point2D> out;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Point2D& a = ring[i];
    const Point2D& b = ring[(i + 1) % ring.size()];
    const double sa = side(a);
    const double sb = side(b);
    if (sa <= 0.0) out.push_back(a);
    if ((sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0)) {
      const double t = sa / (sa - sb);
      out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
    }
  }
  return out;
}

} // namespace

std::vector<CellPolygon> dominance_polygons(const std::vector<SensorNode>& sensors,
                                            const AreaSize& area) {
  std::vector<CellPolygon> polygons;
  polygons.reserve(sensors.size());
  for (const auto& sensor : sensors) {
    std::vector<Point2D> ring{{0.0, 0.0},
                              {area.width_m, 0.0},
                              {area.width_m, area.height_m},
                              {0.0, area.height_m}};
    for (const auto& other : sensors) {
      if (other.id == sensor.id) continue;
      if (other.position == sensor.position) {
        // Coincident pair: the tie rule gives everything to the lower id.
        if (other.id < sensor.id) ring.clear();
        continue;
      }
      if (ring.empty()) break;
      ring = clip_halfplane(ring, sensor.position, other.position);
    }
    polygons.push_back({sensor.id, std::move(ring)});
  }
  return polygons;
}

std::string polygons_to_geojson(const std::vector<CellPolygon>& polygons) {
  std::ostringstream out;
  out.precision(17);
  out << "{\"type\":\"FeatureCollection\",\"features\":[";
  bool first_feature = true;
  for (const auto& poly : polygons) {
    if (!first_feature) out << ',';
    first_feature = false;
    out << "{\"type\":\"Feature\",\"properties\":{\"sensor_id\":" << poly.sensor_id
        << "},\"geometry\":{\"type\":\"Polygon\",\"coordinates\":[[";
    for (std::size_t i = 0; i <= poly.ring.size(); ++i) {
      if (poly.ring.empty()) break;
      const Point2D& p = poly.ring[i % poly.ring.size()]; // close the ring
      if (i) out << ',';
      out << '[' << p.x << ',' << p.y << ']';
    }
    out << "]]}}";
  }
  out << "]}";
  return out.str();
}

} // namespace cellsweep::dominance
