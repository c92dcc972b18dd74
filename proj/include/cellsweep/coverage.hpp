#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cellsweep/campaign.hpp"
#include "cellsweep/protocol.hpp"

namespace cellsweep::coverage {

struct GridGeometry {
  double cell_m = 250.0;
  Point2D origin;
  std::size_t nx = 0;
  std::size_t ny = 0;

  std::size_t index(std::size_t ix, std::size_t iy) const { return iy * nx + ix; }

  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

// Smallest grid of `cell_m` cells covering the area from (0,0).
GridGeometry geometry_for_area(const AreaSize& area, double cell_m = 250.0);

// Rasterized measurements: per-cell arithmetic mean of rssi_dbm, plus sample
// counts. A value is present exactly where count > 0.
struct CoverageGrid {
  GridGeometry geom;
  std::vector<std::optional<double>> values; // mean dBm
  std::vector<std::uint32_t> counts;
};

struct DemandNodeMap {
  GridGeometry geom;
  std::vector<std::uint8_t> demand; // 0/1
};

struct PredictedCoverage {
  GridGeometry geom;
  std::vector<std::uint8_t> covered; // 0/1
};

enum class RasterMode { serial, parallel };

// Aggregate records into the grid. Records without an rssi value are skipped
// (counts tally the averaged samples). Cell sums run over value-sorted
// samples, so the result is independent of record order and of the
// serial/parallel mode. Throws OutOfExtent.
CoverageGrid rasterize(const std::vector<protocol::MeasurementRecord>& records,
                       const GridGeometry& geom, RasterMode mode = RasterMode::serial);

// Verification points per the frontier-of-intersection rule: centers of
// demand cells that are covered and 4-neighbor-adjacent to a non-covered
// cell. Row-major (y then x) order, ids 1..m. Throws GeometryMismatch.
std::vector<MeasurementPoint> select_verification_points(const PredictedCoverage& pred,
                                                         const DemandNodeMap& demand);

struct VerificationResult {
  Point2D position;
  bool covered = false;
};

// Clear each demand cell whose verification measurement confirmed coverage;
// keep everything else. Results must land on demand cells (UnknownCell).
DemandNodeMap correct_demand_map(const DemandNodeMap& demand,
                                 const std::vector<VerificationResult>& results);

// --- Grid file formats (3-line header: cell_m / origin_x / origin_y) -------

std::string grid_to_csv(const CoverageGrid& grid);       // empty field = no samples
std::string mask_to_csv(const CoverageGrid& grid);       // 1 where count > 0
std::string bool_grid_to_csv(const GridGeometry& geom, const std::vector<std::uint8_t>& cells);

// Parse a boolean grid matrix (demand or predicted coverage input).
// Throws MalformedField, MissingKey.
std::pair<GridGeometry, std::vector<std::uint8_t>> parse_bool_grid(const std::string& text);

// Grayscale PGM (P2): -113 dBm -> 0, -51 dBm -> 255, empty cells -> 0.
// Rows top-down (highest y first).
std::string grid_to_pgm(const CoverageGrid& grid);

} // namespace cellsweep::coverage
