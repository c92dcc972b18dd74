#include "cellsweep/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace cellsweep::coverage {

namespace {

std::string format_number(double v) { return nlohmann::json(v).dump(); }

// Cell index along one axis; the far edge belongs to the last cell.
std::size_t axis_index(double v, double origin, double cell_m, std::size_t n,
                       const char* axis) {
  const double rel = (v - origin) / cell_m;
  if (rel < 0.0 || rel > static_cast<double>(n))
    throw Error("OutOfExtent", std::string(axis) + " coordinate " + std::to_string(v) +
                                   " outside grid");
  const auto idx = static_cast<std::size_t>(rel);
  return std::min(idx, n - 1);
}

std::size_t cell_of(const GridGeometry& geom, const Point2D& p) {
  const std::size_t ix = axis_index(p.x, geom.origin.x, geom.cell_m, geom.nx, "x");
  const std::size_t iy = axis_index(p.y, geom.origin.y, geom.cell_m, geom.ny, "y");
  return geom.index(ix, iy);
}

std::string header_for(const GridGeometry& geom) {
  return "cell_m," + format_number(geom.cell_m) + "\norigin_x," +
         format_number(geom.origin.x) + "\norigin_y," + format_number(geom.origin.y) +
         "\n";
}

} // namespace

GridGeometry geometry_for_area(const AreaSize& area, double cell_m) {
  GridGeometry geom;
  geom.cell_m = cell_m;
  geom.origin = {0.0, 0.0};
  geom.nx = static_cast<std::size_t>(std::ceil(area.width_m / cell_m));
  geom.ny = static_cast<std::size_t>(std::ceil(area.height_m / cell_m));
  geom.nx = std::max<std::size_t>(geom.nx, 1);
  geom.ny = std::max<std::size_t>(geom.ny, 1);
  return geom;
}

CoverageGrid rasterize(const std::vector<protocol::MeasurementRecord>& records,
                       const GridGeometry& geom, RasterMode mode) {
  CoverageGrid grid;
  grid.geom = geom;
  grid.values.assign(geom.nx * geom.ny, std::nullopt);
  grid.counts.assign(geom.nx * geom.ny, 0);

  // Group sample values per cell, then reduce each cell over its values in
  // ascending order: one canonical summation order for any record order.
  std::vector<std::vector<double>> samples(geom.nx * geom.ny);
  for (const auto& record : records) {
    const std::size_t cell = cell_of(geom, record.position);
    if (record.cell.rssi_dbm) samples[cell].push_back(*record.cell.rssi_dbm);
  }

  auto reduce_cell = [&](std::size_t cell) {
    auto& values = samples[cell];
    if (values.empty()) return;
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (const double v : values) sum += v;
    grid.values[cell] = sum / static_cast<double>(values.size());
    grid.counts[cell] = static_cast<std::uint32_t>(values.size());
  };

  if (mode == RasterMode::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t cell = 0; cell < static_cast<std::ptrdiff_t>(samples.size()); ++cell)
      reduce_cell(static_cast<std::size_t>(cell));
  } else {
    for (std::size_t cell = 0; cell < samples.size(); ++cell) reduce_cell(cell);
  }
  return grid;
}

std::vector<MeasurementPoint> select_verification_points(const PredictedCoverage& pred,
                                                         const DemandNodeMap& demand) {
  if (pred.geom != demand.geom)
    throw Error("GeometryMismatch", "prediction and demand grids differ");
  const GridGeometry& geom = pred.geom;

  std::vector<MeasurementPoint> points;
  std::uint32_t next_id = 1;
  for (std::size_t iy = 0; iy < geom.ny; ++iy) {
    for (std::size_t ix = 0; ix < geom.nx; ++ix) {
      const std::size_t cell = geom.index(ix, iy);
      if (!demand.demand[cell] || !pred.covered[cell]) continue;
      // Frontier of the intersection: an in-bounds 4-neighbor is uncovered.
      const bool frontier =
          (ix > 0 && !pred.covered[geom.index(ix - 1, iy)]) ||
          (ix + 1 < geom.nx && !pred.covered[geom.index(ix + 1, iy)]) ||
          (iy > 0 && !pred.covered[geom.index(ix, iy - 1)]) ||
          (iy + 1 < geom.ny && !pred.covered[geom.index(ix, iy + 1)]);
      if (!frontier) continue;
      MeasurementPoint p;
      p.id = next_id++;
      p.position = {geom.origin.x + (static_cast<double>(ix) + 0.5) * geom.cell_m,
                    geom.origin.y + (static_cast<double>(iy) + 0.5) * geom.cell_m};
      points.push_back(std::move(p));
    }
  }
  return points;
}

DemandNodeMap correct_demand_map(const DemandNodeMap& demand,
                                 const std::vector<VerificationResult>& results) {
  DemandNodeMap corrected = demand;
  for (const auto& result : results) {
    std::size_t cell = 0;
    try {
      cell = cell_of(demand.geom, result.position);
    } catch (const Error&) {
      throw Error("UnknownCell", "verification point outside the demand grid");
    }
    if (!demand.demand[cell])
      throw Error("UnknownCell", "verification point maps to a non-demand cell");
    if (result.covered) corrected.demand[cell] = 0; // confirmed served: drop the node
  }
  return corrected;
}

std::string grid_to_csv(const CoverageGrid& grid) {
  std::ostringstream out;
  out << header_for(grid.geom);
  for (std::size_t iy = 0; iy < grid.geom.ny; ++iy) {
    for (std::size_t ix = 0; ix < grid.geom.nx; ++ix) {
      if (ix) out << ',';
      const auto& v = grid.values[grid.geom.index(ix, iy)];
      if (v) out << format_number(*v);
    }
    out << '\n';
  }
  return out.str();
}

std::string mask_to_csv(const CoverageGrid& grid) {
  std::ostringstream out;
  out << header_for(grid.geom);
  for (std::size_t iy = 0; iy < grid.geom.ny; ++iy) {
    for (std::size_t ix = 0; ix < grid.geom.nx; ++ix) {
      if (ix) out << ',';
      out << (grid.counts[grid.geom.index(ix, iy)] > 0 ? '1' : '0');
    }
    out << '\n';
  }
  return out.str();
}

std::string bool_grid_to_csv(const GridGeometry& geom, const std::vector<std::uint8_t>& cells) {
  std::ostringstream out;
  out << header_for(geom);
  for (std::size_t iy = 0; iy < geom.ny; ++iy) {
    for (std::size_t ix = 0; ix < geom.nx; ++ix) {
      if (ix) out << ',';
      out << (cells[geom.index(ix, iy)] ? '1' : '0');
    }
    out << '\n';
  }
  return out.str();
}

std::pair<GridGeometry, std::vector<std::uint8_t>> parse_bool_grid(const std::string& text) {
  std::istringstream in(text);
  std::string line;

  GridGeometry geom;
  const char* header_keys[3] = {"cell_m", "origin_x", "origin_y"};
  double header_values[3] = {0, 0, 0};
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(in, line))
      throw Error("MissingKey", std::string("'") + header_keys[i] + "' header line absent");
    const std::string prefix = std::string(header_keys[i]) + ",";
    if (line.rfind(prefix, 0) != 0)
      throw Error("MissingKey", std::string("expected '") + header_keys[i] + ",' header line");
    try {
      header_values[i] = std::stod(line.substr(prefix.size()));
    } catch (const std::exception&) {
      throw Error("MalformedField", "bad number in header line '" + line + "'");
    }
  }
  if (!(header_values[0] > 0.0)) throw Error("MalformedField", "cell_m must be positive");
  geom.cell_m = header_values[0];
  geom.origin = {header_values[1], header_values[2]};

  std::vector<std::uint8_t> cells;
  std::size_t nx = 0, ny = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t row_width = 0;
    std::size_t begin = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        const std::string field = line.substr(begin, i - begin);
        if (field == "1")
          cells.push_back(1);
        else if (field == "0")
          cells.push_back(0);
        else
          throw Error("MalformedField", "grid cell must be 0 or 1, got '" + field + "'");
        ++row_width;
        begin = i + 1;
      }
    }
    if (nx == 0)
      nx = row_width;
    else if (row_width != nx)
      throw Error("MalformedField", "ragged grid row");
    ++ny;
  }
  if (nx == 0) throw Error("MalformedField", "grid has no rows");
  geom.nx = nx;
  geom.ny = ny;
  return {geom, std::move(cells)};
}

std::string grid_to_pgm(const CoverageGrid& grid) {
  std::ostringstream out;
  out << "P2\n" << grid.geom.nx << ' ' << grid.geom.ny << "\n255\n";
  for (std::size_t row = 0; row < grid.geom.ny; ++row) {
    const std::size_t iy = grid.geom.ny - 1 - row; // image rows top-down
    for (std::size_t ix = 0; ix < grid.geom.nx; ++ix) {
      if (ix) out << ' ';
      const auto& v = grid.values[grid.geom.index(ix, iy)];
      int level = 0;
      if (v) {
        const double scaled = (*v + 113.0) * 255.0 / 62.0;
        level = static_cast<int>(std::lround(std::clamp(scaled, 0.0, 255.0)));
      }
      out << level;
    }
    out << '\n';
  }
  return out.str();
}

} // namespace cellsweep::coverage
