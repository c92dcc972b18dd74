#include <algorithm>
#include <numeric>
#include <set>

#include <doctest.h>

#include "cellsweep/ga.hpp"
#include "helpers.hpp"

using namespace cellsweep;
using namespace cellsweep::ga;

namespace {

MeasurementPoint pt(std::uint32_t id, double x, double y) {
  MeasurementPoint p;
  p.id = id;
  p.position = {x, y};
  return p;
}

bool is_permutation_of(const std::vector<std::uint32_t>& order,
                       const std::vector<std::uint32_t>& ids) {
  return std::multiset<std::uint32_t>(order.begin(), order.end()) ==
         std::multiset<std::uint32_t>(ids.begin(), ids.end());
}

} // namespace

TEST_CASE("fitness ranks exactly like path length") {
  CHECK(fitness(Individual{{}, 0.0}) == 1.0);
  CHECK(fitness(Individual{{1}, 10.0}) > fitness(Individual{{1}, 20.0}));

  Rng rng(9);
  std::vector<Individual> population;
  for (int i = 0; i < 50; ++i)
    population.push_back(Individual{{}, rng.next_double() * 1e4});
  const auto by_fitness = std::max_element(
      population.begin(), population.end(),
      [](const Individual& a, const Individual& b) { return fitness(a) < fitness(b); });
  const auto by_length = std::min_element(
      population.begin(), population.end(), [](const Individual& a, const Individual& b) {
        return a.cached_length < b.cached_length;
      });
  CHECK(by_fitness == by_length);
}

TEST_CASE("cycle crossover identity case") {
  const std::vector<std::uint32_t> p{1, 2, 3, 4, 5};
  const auto [c1, c2] = cycle_crossover(p, p);
  CHECK(c1 == p);
  CHECK(c2 == p);
}

TEST_CASE("cycle crossover hand-traced example") {
  // First cycle from position 0 covers indices {0, 2}; child1 keeps p1 there
  // and takes p2 elsewhere.
  const std::vector<std::uint32_t> p1{1, 2, 3, 4, 5};
  const std::vector<std::uint32_t> p2{3, 4, 1, 5, 2};
  const auto [c1, c2] = cycle_crossover(p1, p2);
  CHECK(c1 == std::vector<std::uint32_t>{1, 4, 3, 5, 2});
  CHECK(c2 == std::vector<std::uint32_t>{3, 2, 1, 4, 5});
}

TEST_CASE("cycle crossover property fuzz") {
  Rng rng(1234);
  for (int round = 0; round < 10000; ++round) {
    const std::size_t n = 1 + rng.next_below(12);
    std::vector<std::uint32_t> p1(n);
    std::iota(p1.begin(), p1.end(), 100u);
    std::vector<std::uint32_t> p2 = p1;
    for (std::size_t i = n; i > 1; --i) {
      std::swap(p1[i - 1], p1[rng.next_below(i)]);
      std::swap(p2[i - 1], p2[rng.next_below(i)]);
    }
    const auto [c1, c2] = cycle_crossover(p1, p2);
    REQUIRE(is_permutation_of(c1, p1));
    REQUIRE(is_permutation_of(c2, p1));
    for (std::size_t i = 0; i < n; ++i) {
      REQUIRE((c1[i] == p1[i] || c1[i] == p2[i]));
      REQUIRE((c2[i] == p1[i] || c2[i] == p2[i]));
    }
  }
}

TEST_CASE("cycle crossover rejects mismatched id sets") {
  CHECK_THROWS_WITH_AS(cycle_crossover({1, 2, 3}, {1, 2}),
                       doctest::Contains("MismatchedIdSets"), Error);
  CHECK_THROWS_WITH_AS(cycle_crossover({1, 2, 3}, {1, 2, 4}),
                       doctest::Contains("MismatchedIdSets"), Error);
}

TEST_CASE("mutate endpoints") {
  Rng rng(5);
  const std::vector<std::uint32_t> order{1, 2, 3, 4, 5};
  CHECK(mutate(order, 0.0, rng) == order);

  Rng rng2(6);
  CHECK(mutate({1, 2}, 1.0, rng2) == std::vector<std::uint32_t>{2, 1});
}

TEST_CASE("mutate always yields a permutation") {
  Rng rng(31337);
  std::vector<std::uint32_t> base(9);
  std::iota(base.begin(), base.end(), 1u);
  for (int round = 0; round < 10000; ++round) {
    const auto mutated = mutate(base, 0.3, rng);
    REQUIRE(is_permutation_of(mutated, base));
  }
}

TEST_CASE("optimize_route on a single point") {
  GAParams params;
  params.generations = 10;
  params.seed = 1;
  const auto [route, trace] = optimize_route({0, 0}, {pt(42, 3, 4)}, params);
  CHECK(route.order == std::vector<std::uint32_t>{42});
  CHECK(route.length_m == doctest::Approx(5.0));
  CHECK(trace.best_length_m.size() == 10);
}

TEST_CASE("optimize_route reaches the exhaustive optimum on small instances") {
  Rng rng(2718);
  for (int round = 0; round < 3; ++round) {
    const auto points = testutil::random_points(8, 10000, 10000, rng);
    const Point2D start{5000, 5000};
    GAParams params;
    params.seed = 1000 + round;
    const auto [route, trace] = optimize_route(start, points, params);
    const Route best = brute_force_route(start, points);
    CHECK(route.length_m >= best.length_m - 1e-9);
    CHECK(route.length_m <= best.length_m * 1.02);
  }
}

TEST_CASE("optimize_route is deterministic and monotone") {
  Rng rng(99);
  const auto points = testutil::random_points(20, 10000, 10000, rng);
  GAParams params;
  params.generations = 120;
  params.seed = 77;

  const auto [route1, trace1] = optimize_route({0, 0}, points, params);
  const auto [route2, trace2] = optimize_route({0, 0}, points, params);
  CHECK(route1.order == route2.order);
  CHECK(route1.length_m == route2.length_m); // bitwise
  CHECK(trace1.best_length_m == trace2.best_length_m);

  for (std::size_t i = 1; i < trace1.best_length_m.size(); ++i)
    CHECK(trace1.best_length_m[i] <= trace1.best_length_m[i - 1]);

  // The reported route is the best-ever individual.
  CHECK(route1.length_m == trace1.best_length_m.back());
  CHECK(path_length_indexed({0, 0}, points, [&] {
          std::vector<std::uint32_t> idx;
          for (const auto id : route1.order) idx.push_back(id - 1);
          return idx;
        }()) == route1.length_m);
}

TEST_CASE("optimize_route validates inputs") {
  GAParams params;
  CHECK_THROWS_WITH_AS(optimize_route({0, 0}, {}, params),
                       doctest::Contains("EmptyPointSet"), Error);
  params.population_size = 1;
  CHECK_THROWS_WITH_AS(optimize_route({0, 0}, {pt(1, 1, 1)}, params),
                       doctest::Contains("InvalidParams"), Error);
}

TEST_CASE("brute_force_route basics") {
  const Route single = brute_force_route({0, 0}, {pt(9, 1, 1)});
  CHECK(single.order == std::vector<std::uint32_t>{9});

  // Collinear points: visiting by increasing y is optimal.
  const Route collinear =
      brute_force_route({0, 0}, {pt(2, 0, 20), pt(3, 0, 30), pt(1, 0, 10)});
  CHECK(collinear.order == std::vector<std::uint32_t>{1, 2, 3});
  CHECK(collinear.length_m == doctest::Approx(30.0));

  std::vector<MeasurementPoint> eleven;
  for (std::uint32_t i = 1; i <= 11; ++i) eleven.push_back(pt(i, i, 0));
  CHECK_THROWS_WITH_AS(brute_force_route({0, 0}, eleven),
                       doctest::Contains("TooManyPoints"), Error);
}

TEST_CASE("brute_force_route beats random permutations") {
  Rng rng(404);
  const auto points = testutil::random_points(7, 1000, 1000, rng);
  const Point2D start{0, 0};
  const Route best = brute_force_route(start, points);

  std::vector<std::uint32_t> idx(points.size());
  std::iota(idx.begin(), idx.end(), 0u);
  for (int round = 0; round < 500; ++round) {
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.next_below(i)]);
    CHECK(best.length_m <= path_length_indexed(start, points, idx) + 1e-9);
  }
}

TEST_CASE("trace CSV export") {
  ConvergenceTrace trace;
  trace.best_length_m = {12.5, 10.0};
  CHECK(trace_to_csv(trace) == "generation,best_length_m\n1,12.5\n2,10.0\n");
}
