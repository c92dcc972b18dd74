#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cellsweep/campaign.hpp"
#include "cellsweep/rng.hpp"

namespace cellsweep::ga {

// One candidate solution: a visiting order over point ids, with its open-path
// length from the sensor start position.
struct Individual {
  std::vector<std::uint32_t> order;
  double cached_length = 0.0;
};

struct GAParams {
  std::size_t population_size = 100;
  std::size_t generations = 500;
  double crossover_rate = 0.9;
  double mutation_rate = 0.15; // per-position swap probability
  std::size_t elite_count = 2;
  std::size_t tournament_size = 4;
  std::uint64_t seed = 0;
};

// Best-ever path length after each generation. Non-increasing with elitism.
struct ConvergenceTrace {
  std::vector<double> best_length_m;
};

struct Route {
  Point2D start;
  std::vector<std::uint32_t> order; // point ids in visit order
  double length_m = 0.0;
};

enum class EvalMode { serial, parallel };

// Score strictly decreasing in path length: 1 / (1 + length). Ranking by
// fitness and ranking by length are equivalent.
inline double fitness(const Individual& ind) {
  return 1.0 / (1.0 + ind.cached_length);
}

// Cycle crossover over two permutations of the same value set. Children take
// whole parent cycles alternately (first cycle from p1 into child1), so every
// position keeps an allele from one of the two parents. Deterministic.
// Throws MismatchedIdSets.
std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>
cycle_crossover(const std::vector<std::uint32_t>& p1,
                const std::vector<std::uint32_t>& p2);

// Swap mutation: each position i < n-1 is, with probability `rate`, swapped
// with a uniformly chosen later position. Always returns a permutation.
std::vector<std::uint32_t> mutate(std::vector<std::uint32_t> order, double rate,
                                  Rng& rng);

// Batch open-path length evaluation for a population of orders, where each
// order is a permutation of indices into `points`. The parallel mode
// distributes individuals across OpenMP threads and is bit-identical to the
// serial mode (each order is an independent, fixed-order summation).
std::vector<double>
evaluate_lengths(const Point2D& start,
                 const std::vector<MeasurementPoint>& points,
                 const std::vector<std::vector<std::uint32_t>>& orders,
                 EvalMode mode = EvalMode::serial);

// Genetic search for the shortest open path from `start` through all points.
// Deterministic for a given (inputs, params, seed). Throws EmptyPointSet.
std::pair<Route, ConvergenceTrace>
optimize_route(const Point2D& start, const std::vector<MeasurementPoint>& points,
               const GAParams& params, EvalMode mode = EvalMode::serial);

// Exhaustive optimum for small instances (n <= 10, else TooManyPoints).
// Ties resolved to the lexicographically smallest id sequence.
Route brute_force_route(const Point2D& start,
                        const std::vector<MeasurementPoint>& points);

std::string trace_to_csv(const ConvergenceTrace& trace);

} // namespace cellsweep::ga
