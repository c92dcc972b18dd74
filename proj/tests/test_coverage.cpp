#include <algorithm>
#include <map>

#include <doctest.h>

#include "cellsweep/coverage.hpp"
#include "helpers.hpp"

using namespace cellsweep;
using namespace cellsweep::coverage;

namespace {

protocol::MeasurementRecord record_at(double x, double y, double rssi) {
  protocol::MeasurementRecord r;
  r.position = {x, y};
  r.cell.rssi_dbm = rssi;
  return r;
}

GridGeometry small_geom(std::size_t nx, std::size_t ny, double cell = 100.0) {
  GridGeometry g;
  g.cell_m = cell;
  g.origin = {0, 0};
  g.nx = nx;
  g.ny = ny;
  return g;
}

} // namespace

TEST_CASE("rasterize aggregates by arithmetic mean") {
  const GridGeometry geom = small_geom(4, 4);

  const auto one = rasterize({record_at(50, 50, -61)}, geom);
  CHECK(*one.values[geom.index(0, 0)] == -61.0);
  CHECK(one.counts[geom.index(0, 0)] == 1);
  std::size_t populated = 0;
  for (const auto& v : one.values) populated += v.has_value();
  CHECK(populated == 1);

  const auto two = rasterize({record_at(50, 50, -60), record_at(60, 40, -70)}, geom);
  CHECK(*two.values[geom.index(0, 0)] == -65.0);
  CHECK(two.counts[geom.index(0, 0)] == 2);
}

TEST_CASE("rasterize matches a group-by-mean oracle and ignores record order") {
  const GridGeometry geom = small_geom(20, 20, 250.0);
  Rng rng(606);
  std::vector<protocol::MeasurementRecord> records;
  for (int i = 0; i < 1000; ++i)
    records.push_back(record_at(rng.next_double() * 5000, rng.next_double() * 5000,
                                -113.0 + static_cast<double>(rng.next_below(63))));

  const CoverageGrid grid = rasterize(records, geom);

  // Independent aggregation: per-cell running sums in record order over
  // sorted samples.
  std::map<std::size_t, std::vector<double>> cells;
  for (const auto& r : records) {
    const auto ix = static_cast<std::size_t>(r.position.x / geom.cell_m);
    const auto iy = static_cast<std::size_t>(r.position.y / geom.cell_m);
    cells[geom.index(ix, iy)].push_back(*r.cell.rssi_dbm);
  }
  for (auto& [cell, values] : cells) {
    double sum = 0;
    for (const double v : values) sum += v;
    REQUIRE(grid.counts[cell] == values.size());
    CHECK(*grid.values[cell] == doctest::Approx(sum / values.size()).epsilon(1e-12));
  }

  // Permutation invariance, bit for bit.
  std::vector<protocol::MeasurementRecord> shuffled = records;
  for (std::size_t i = shuffled.size(); i > 1; --i)
    std::swap(shuffled[i - 1], shuffled[rng.next_below(i)]);
  const CoverageGrid grid2 = rasterize(shuffled, geom);
  CHECK(grid.values == grid2.values);
  CHECK(grid.counts == grid2.counts);
}

TEST_CASE("rasterize rejects out-of-extent records") {
  const GridGeometry geom = small_geom(4, 4);
  CHECK_THROWS_WITH_AS(rasterize({record_at(1e6, 0, -60)}, geom),
                       doctest::Contains("OutOfExtent"), Error);
}

TEST_CASE("verification points sit on the frontier of the intersection") {
  const GridGeometry geom = small_geom(3, 1);
  PredictedCoverage pred{geom, {1, 1, 0}};
  DemandNodeMap demand{geom, {1, 1, 0}};

  // Demand cell fully outside coverage: nothing selected.
  DemandNodeMap outside{geom, {0, 0, 1}};
  CHECK(select_verification_points(pred, outside).empty());

  // Covered demand cell bordering an uncovered cell is selected.
  const auto points = select_verification_points(pred, demand);
  REQUIRE(points.size() == 1);
  CHECK(points[0].position == Point2D{150.0, 50.0}); // center of cell (1,0)
  CHECK(points[0].id == 1);

  GridGeometry other = small_geom(2, 2);
  PredictedCoverage mismatched{other, {1, 1, 1, 1}};
  CHECK_THROWS_WITH_AS(select_verification_points(mismatched, demand),
                       doctest::Contains("GeometryMismatch"), Error);
}

TEST_CASE("verification selection equals a cell-by-cell scan on random masks") {
  Rng rng(2025);
  for (int round = 0; round < 10; ++round) {
    const GridGeometry geom = small_geom(50, 50, 250.0);
    PredictedCoverage pred{geom, {}};
    DemandNodeMap demand{geom, {}};
    pred.covered.resize(geom.nx * geom.ny);
    demand.demand.resize(geom.nx * geom.ny);
    for (auto& c : pred.covered) c = rng.next_bool(0.6);
    for (auto& d : demand.demand) d = rng.next_bool(0.3);

    const auto points = select_verification_points(pred, demand);

    std::vector<std::pair<double, double>> expected;
    for (std::size_t iy = 0; iy < geom.ny; ++iy)
      for (std::size_t ix = 0; ix < geom.nx; ++ix) {
        if (!demand.demand[geom.index(ix, iy)] || !pred.covered[geom.index(ix, iy)])
          continue;
        bool frontier = false;
        if (ix > 0) frontier |= !pred.covered[geom.index(ix - 1, iy)];
        if (ix + 1 < geom.nx) frontier |= !pred.covered[geom.index(ix + 1, iy)];
        if (iy > 0) frontier |= !pred.covered[geom.index(ix, iy - 1)];
        if (iy + 1 < geom.ny) frontier |= !pred.covered[geom.index(ix, iy + 1)];
        if (frontier)
          expected.emplace_back((ix + 0.5) * geom.cell_m, (iy + 0.5) * geom.cell_m);
      }

    REQUIRE(points.size() == expected.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      CHECK(points[i].position.x == expected[i].first);
      CHECK(points[i].position.y == expected[i].second);
      CHECK(points[i].id == i + 1);
    }

    // Selection is a subset of demand-and-covered cells by construction.
    for (const auto& p : points) {
      const auto ix = static_cast<std::size_t>(p.position.x / geom.cell_m);
      const auto iy = static_cast<std::size_t>(p.position.y / geom.cell_m);
      CHECK(demand.demand[geom.index(ix, iy)]);
      CHECK(pred.covered[geom.index(ix, iy)]);
    }
  }
}

TEST_CASE("correct_demand_map clears exactly the confirmed cells") {
  const GridGeometry geom = small_geom(3, 3);
  DemandNodeMap demand{geom, {1, 0, 1, 0, 1, 0, 1, 0, 1}};

  CHECK(correct_demand_map(demand, {}).demand == demand.demand);

  const auto cleared = correct_demand_map(demand, {{{50, 50}, true}});
  CHECK(cleared.demand[geom.index(0, 0)] == 0);
  std::size_t diff = 0;
  for (std::size_t i = 0; i < demand.demand.size(); ++i)
    diff += demand.demand[i] != cleared.demand[i];
  CHECK(diff == 1);

  // Mixed batch: cleared set equals the confirmed-covered subset.
  const auto mixed = correct_demand_map(
      demand, {{{50, 50}, true}, {{250, 50}, false}, {{150, 150}, true}});
  CHECK(mixed.demand == std::vector<std::uint8_t>{0, 0, 1, 0, 0, 0, 1, 0, 1});

  // Results must land on demand cells.
  CHECK_THROWS_WITH_AS(correct_demand_map(demand, {{{150, 50}, true}}),
                       doctest::Contains("UnknownCell"), Error);
  CHECK_THROWS_WITH_AS(correct_demand_map(demand, {{{-5, 0}, true}}),
                       doctest::Contains("UnknownCell"), Error);

  // Never adds demand.
  Rng rng(11);
  for (int round = 0; round < 20; ++round) {
    DemandNodeMap base{geom, {}};
    base.demand.resize(9);
    for (auto& d : base.demand) d = rng.next_bool(0.5);
    std::vector<VerificationResult> results;
    for (std::size_t i = 0; i < 9; ++i)
      if (base.demand[i])
        results.push_back({{(i % 3 + 0.5) * 100.0, (i / 3 + 0.5) * 100.0},
                           rng.next_bool(0.5)});
    const auto out = correct_demand_map(base, results);
    for (std::size_t i = 0; i < 9; ++i) CHECK(out.demand[i] <= base.demand[i]);
  }
}

TEST_CASE("grid CSV and PGM exports") {
  const GridGeometry geom = small_geom(2, 2);
  CoverageGrid grid;
  grid.geom = geom;
  grid.values = {std::nullopt, -113.0, -51.0, -82.0};
  grid.counts = {0, 1, 2, 3};

  CHECK(grid_to_csv(grid) == "cell_m,100.0\norigin_x,0.0\norigin_y,0.0\n,-113.0\n-51.0,-82.0\n");
  CHECK(mask_to_csv(grid) == "cell_m,100.0\norigin_x,0.0\norigin_y,0.0\n0,1\n1,1\n");

  // Top row of the image is the highest-y grid row; -113 -> 0, -51 -> 255,
  // and -82 lands on round((31/62)*255) = 128.
  CHECK(grid_to_pgm(grid) == "P2\n2 2\n255\n255 128\n0 0\n");
}

TEST_CASE("bool grids round-trip through CSV") {
  const GridGeometry geom = small_geom(3, 2, 250.0);
  const std::vector<std::uint8_t> cells{1, 0, 1, 0, 1, 0};
  const std::string csv = bool_grid_to_csv(geom, cells);
  const auto [parsed_geom, parsed_cells] = parse_bool_grid(csv);
  CHECK(parsed_geom == geom);
  CHECK(parsed_cells == cells);

  CHECK_THROWS_WITH_AS(parse_bool_grid("cell_m,250\n1,2\n"),
                       doctest::Contains("MissingKey"), Error);
  CHECK_THROWS_WITH_AS(parse_bool_grid("cell_m,250\norigin_x,0\norigin_y,0\n1,7\n"),
                       doctest::Contains("MalformedField"), Error);
  CHECK_THROWS_WITH_AS(parse_bool_grid("cell_m,250\norigin_x,0\norigin_y,0\n1,0\n1\n"),
                       doctest::Contains("MalformedField"), Error);
}
