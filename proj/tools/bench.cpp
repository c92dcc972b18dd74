// Serial-vs-OpenMP benchmark for the data-parallel kernels, plus the spatial
// index against the quadratic scan. Every comparison also verifies that the
// fast path reproduces the reference output exactly.

#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cellsweep/coverage.hpp"
#include "cellsweep/dominance.hpp"
#include "cellsweep/ga.hpp"
#include "cellsweep/rng.hpp"
#include "cellsweep/simulator.hpp"

using namespace cellsweep;

namespace {

double seconds_of(const std::function<void()>& fn) {
  const auto begin = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
}

void row(const char* kernel, double reference_s, double candidate_s, bool identical) {
  std::printf("%-34s %9.1f ms %9.1f ms   x%-5.2f %s\n", kernel, reference_s * 1e3,
              candidate_s * 1e3, reference_s / candidate_s,
              identical ? "identical" : "MISMATCH");
}

std::vector<MeasurementPoint> uniform_points(std::size_t n, double side, Rng& rng) {
  std::vector<MeasurementPoint> points(n);
  for (std::size_t i = 0; i < n; ++i) {
    points[i].id = static_cast<std::uint32_t>(i + 1);
    points[i].position = {rng.next_double() * side, rng.next_double() * side};
  }
  return points;
}

} // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; parallel modes run serially\n\n");
#endif
  std::printf("%-34s %12s %12s   %-7s\n", "kernel", "reference", "candidate", "speedup");

  Rng rng(20250811);

  { // Nearest-sensor assignment: quadratic scan vs grid index vs OpenMP.
    std::vector<SensorNode> sensors(1000);
    for (std::size_t i = 0; i < sensors.size(); ++i) {
      sensors[i].id = static_cast<std::uint32_t>(i + 1);
      sensors[i].position = {rng.next_double() * 50000, rng.next_double() * 50000};
      sensors[i].speed_mps = 8.0;
    }
    const auto points = uniform_points(100000, 50000, rng);

    using dominance::AssignOptions;
    dominance::DominanceAssignment brute, grid, grid_par;
    const double brute_s = seconds_of([&] {
      brute = dominance::assign_dominances(sensors, points,
                                           {AssignOptions::Strategy::brute_force, false});
    });
    const double grid_s = seconds_of([&] {
      grid = dominance::assign_dominances(sensors, points,
                                          {AssignOptions::Strategy::grid, false});
    });
    const double grid_par_s = seconds_of([&] {
      grid_par = dominance::assign_dominances(sensors, points,
                                              {AssignOptions::Strategy::grid, true});
    });
    row("dominance 1e5x1e3: brute vs grid", brute_s, grid_s, brute.owner == grid.owner);
    row("dominance grid: serial vs omp", grid_s, grid_par_s, grid.owner == grid_par.owner);
  }

  { // GA population evaluation.
    const auto points = uniform_points(100, 50000, rng);
    std::vector<std::vector<std::uint32_t>> orders(2000);
    for (auto& order : orders) {
      order.resize(points.size());
      std::iota(order.begin(), order.end(), 0u);
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.next_below(i)]);
    }
    const Point2D start{25000, 25000};
    std::vector<double> serial, parallel;
    double serial_s = 0, parallel_s = 0;
    for (int rep = 0; rep < 20; ++rep) {
      serial_s += seconds_of(
          [&] { serial = ga::evaluate_lengths(start, points, orders, ga::EvalMode::serial); });
      parallel_s += seconds_of([&] {
        parallel = ga::evaluate_lengths(start, points, orders, ga::EvalMode::parallel);
      });
    }
    row("ga eval 2000x100: serial vs omp", serial_s, parallel_s, serial == parallel);
  }

  { // Rasterization.
    const auto geom = coverage::geometry_for_area({50000, 50000}, 250.0);
    std::vector<protocol::MeasurementRecord> records(200000);
    for (auto& record : records) {
      record.position = {rng.next_double() * 50000, rng.next_double() * 50000};
      record.cell.rssi_dbm = -113.0 + static_cast<double>(rng.next_below(63));
    }
    coverage::CoverageGrid serial, parallel;
    const double serial_s = seconds_of(
        [&] { serial = coverage::rasterize(records, geom, coverage::RasterMode::serial); });
    const double parallel_s = seconds_of([&] {
      parallel = coverage::rasterize(records, geom, coverage::RasterMode::parallel);
    });
    row("rasterize 2e5 records: serial/omp", serial_s, parallel_s,
        serial.values == parallel.values && serial.counts == parallel.counts);
  }

  { // Sweep repetitions.
    sim::SweepConfig base;
    base.area = {20000, 20000};
    base.ga.population_size = 60;
    base.ga.generations = 150;
    sim::SweepConfig par = base;
    par.jobs = 4;
    std::vector<sim::SweepRow> serial, parallel;
    const double serial_s =
        seconds_of([&] { serial = sim::sweep({30}, {1, 3}, 4, 7, base); });
    const double parallel_s =
        seconds_of([&] { parallel = sim::sweep({30}, {1, 3}, 4, 7, par); });
    row("sweep 8 reps: jobs=1 vs jobs=4", serial_s, parallel_s,
        sim::sweep_to_csv(serial) == sim::sweep_to_csv(parallel));
  }

  return 0;
}
