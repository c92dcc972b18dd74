#include "cellsweep/ga.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "cellsweep/error.hpp"

namespace cellsweep::ga {

namespace {

void validate_params(const GAParams& params) {
  if (params.population_size < 2)
    throw Error("InvalidParams", "population_size must be at least 2");
  if (params.crossover_rate < 0.0 || params.crossover_rate > 1.0 ||
      params.mutation_rate < 0.0 || params.mutation_rate > 1.0)
    throw Error("InvalidParams", "rates must lie in [0, 1]");
  if (params.elite_count >= params.population_size)
    throw Error("InvalidParams", "elite_count must be below population_size");
  if (params.tournament_size < 1)
    throw Error("InvalidParams", "tournament_size must be at least 1");
}

// Cycle crossover over dense permutations of 0..n-1.
std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>
cx_dense(const std::vector<std::uint32_t>& p1, const std::vector<std::uint32_t>& p2) {
  const std::size_t n = p1.size();
  std::vector<std::uint32_t> pos_in_p1(n);
  for (std::size_t i = 0; i < n; ++i) pos_in_p1[p1[i]] = static_cast<std::uint32_t>(i);

  std::vector<std::uint32_t> c1(n), c2(n);
  std::vector<bool> visited(n, false);
  bool take_from_p1 = true; // alternates per cycle, first cycle keeps p1 in child1
  for (std::size_t start = 0; start < n; ++start) {
    if (visited[start]) continue;
    std::size_t idx = start;
    while (!visited[idx]) {
      visited[idx] = true;
      c1[idx] = take_from_p1 ? p1[idx] : p2[idx];
      c2[idx] = take_from_p1 ? p2[idx] : p1[idx];
      idx = pos_in_p1[p2[idx]];
    }
    take_from_p1 = !take_from_p1;
  }
  return {std::move(c1), std::move(c2)};
}


// Greedy nearest-neighbor construction from the start position, ties to the
// lower index. Used to seed the initial population.
std::vector<std::uint32_t> nearest_neighbor_order(const Point2D& start,
                                                  const std::vector<MeasurementPoint>& points) {
  const std::size_t n = points.size();
  std::vector<std::uint32_t> order;
  order.reserve(n);
  std::vector<bool> used(n, false);
  Point2D at = start;
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t best = n;
    double best_d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      const double d2 = squared_distance(at, points[i].position);
      if (best == n || d2 < best_d2) {
        best = i;
        best_d2 = d2;
      }
    }
    used[best] = true;
    order.push_back(static_cast<std::uint32_t>(best));
    at = points[best].position;
  }
  return order;
}
} // namespace

std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>
cycle_crossover(const std::vector<std::uint32_t>& p1,
                const std::vector<std::uint32_t>& p2) {
  if (p1.size() != p2.size())
    throw Error("MismatchedIdSets", "parents differ in length");

  // Map the (arbitrary) id alphabet onto 0..n-1.
  std::unordered_map<std::uint32_t, std::uint32_t> rank;
  rank.reserve(p1.size());
  for (const std::uint32_t id : p1) {
    if (!rank.emplace(id, static_cast<std::uint32_t>(rank.size())).second)
      throw Error("MismatchedIdSets", "duplicate id " + std::to_string(id) + " in parent");
  }
  std::vector<std::uint32_t> d1(p1.size()), d2(p2.size());
  for (std::size_t i = 0; i < p1.size(); ++i) d1[i] = rank.at(p1[i]);
  for (std::size_t i = 0; i < p2.size(); ++i) {
    auto it = rank.find(p2[i]);
    if (it == rank.end())
      throw Error("MismatchedIdSets", "id " + std::to_string(p2[i]) + " only in one parent");
    d2[i] = it->second;
  }
  {
    std::vector<bool> seen(p2.size(), false);
    for (const std::uint32_t r : d2) {
      if (seen[r]) throw Error("MismatchedIdSets", "duplicate id in second parent");
      seen[r] = true;
    }
  }

  auto [c1, c2] = cx_dense(d1, d2);
  std::vector<std::uint32_t> back(p1.size());
  for (const auto& [id, r] : rank) back[r] = id;
  for (auto& v : c1) v = back[v];
  for (auto& v : c2) v = back[v];
  return {std::move(c1), std::move(c2)};
}

std::vector<std::uint32_t> mutate(std::vector<std::uint32_t> order, double rate, Rng& rng) {
  const std::size_t n = order.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (rng.next_bool(rate)) {
      const std::size_t j = i + 1 + rng.next_below(n - 1 - i);
      std::swap(order[i], order[j]);
    }
  }
  return order;
}

std::vector<double>
evaluate_lengths(const Point2D& start, const std::vector<MeasurementPoint>& points,
                 const std::vector<std::vector<std::uint32_t>>& orders, EvalMode mode) {
  std::vector<double> lengths(orders.size());
  if (mode == EvalMode::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(orders.size()); ++i)
      lengths[i] = path_length_indexed(start, points, orders[i]);
  } else {
    for (std::size_t i = 0; i < orders.size(); ++i)
      lengths[i] = path_length_indexed(start, points, orders[i]);
  }
  return lengths;
}

std::pair<Route, ConvergenceTrace>
optimize_route(const Point2D& start, const std::vector<MeasurementPoint>& points,
               const GAParams& params, EvalMode mode) {
  if (points.empty()) throw Error("EmptyPointSet", "no points to route");
  validate_params(params);

  const std::size_t n = points.size();
  const std::size_t pop_size = params.population_size;
  Rng rng(params.seed);

  // Population of index permutations; ids only reappear at the boundary.
  // One individual starts from the greedy nearest-neighbor tour; everything
  // else is a uniform random permutation.
  std::vector<std::vector<std::uint32_t>> population(pop_size);
  population[0] = nearest_neighbor_order(start, points);
  for (std::size_t p = 1; p < pop_size; ++p) {
    auto& order = population[p];
    order.resize(n);
    std::iota(order.begin(), order.end(), 0u);
    for (std::size_t i = n; i > 1; --i) { // Fisher-Yates
      const std::size_t j = rng.next_below(i);
      std::swap(order[i - 1], order[j]);
    }
  }
  std::vector<double> lengths = evaluate_lengths(start, points, population, mode);

  std::vector<std::uint32_t> best_order = population[0];
  double best_length = lengths[0];
  for (std::size_t i = 1; i < pop_size; ++i) {
    if (lengths[i] < best_length) {
      best_length = lengths[i];
      best_order = population[i];
    }
  }

  // Tournament on the previous generation; winner by path length (fitness
  // ranking is identical), ties to the earliest draw.
  auto tournament = [&]() -> std::size_t {
    std::size_t winner = rng.next_below(pop_size);
    for (std::size_t t = 1; t < params.tournament_size; ++t) {
      const std::size_t cand = rng.next_below(pop_size);
      if (lengths[cand] < lengths[winner]) winner = cand;
    }
    return winner;
  };

  ConvergenceTrace trace;
  trace.best_length_m.reserve(params.generations);

  std::vector<std::size_t> ranking(pop_size);
  for (std::size_t gen = 0; gen < params.generations; ++gen) {
    std::iota(ranking.begin(), ranking.end(), std::size_t{0});
    std::stable_sort(ranking.begin(), ranking.end(),
                     [&](std::size_t a, std::size_t b) { return lengths[a] < lengths[b]; });

    std::vector<std::vector<std::uint32_t>> next_pop;
    next_pop.reserve(pop_size);
    std::vector<double> next_lengths;
    next_lengths.reserve(pop_size);
    for (std::size_t e = 0; e < params.elite_count; ++e) {
      next_pop.push_back(population[ranking[e]]);
      next_lengths.push_back(lengths[ranking[e]]);
    }

    std::vector<std::vector<std::uint32_t>> offspring;
    offspring.reserve(pop_size - next_pop.size());
    while (next_pop.size() + offspring.size() < pop_size) {
      const std::size_t pa = tournament();
      const std::size_t pb = tournament();
      std::vector<std::uint32_t> child1 = population[pa];
      std::vector<std::uint32_t> child2 = population[pb];
      if (rng.next_bool(params.crossover_rate))
        std::tie(child1, child2) = cx_dense(population[pa], population[pb]);
      child1 = mutate(std::move(child1), params.mutation_rate, rng);
      offspring.push_back(std::move(child1));
      if (next_pop.size() + offspring.size() < pop_size) {
        child2 = mutate(std::move(child2), params.mutation_rate, rng);
        offspring.push_back(std::move(child2));
      }
    }

    const std::vector<double> offspring_lengths =
        evaluate_lengths(start, points, offspring, mode);
    for (std::size_t i = 0; i < offspring.size(); ++i) {
      next_pop.push_back(std::move(offspring[i]));
      next_lengths.push_back(offspring_lengths[i]);
    }

    population = std::move(next_pop);
    lengths = std::move(next_lengths);

    for (std::size_t i = 0; i < pop_size; ++i) {
      if (lengths[i] < best_length) {
        best_length = lengths[i];
        best_order = population[i];
      }
    }
    trace.best_length_m.push_back(best_length);
  }

  Route route;
  route.start = start;
  route.length_m = best_length;
  route.order.reserve(n);
  for (const std::uint32_t idx : best_order) route.order.push_back(points[idx].id);
  return {std::move(route), std::move(trace)};
}

Route brute_force_route(const Point2D& start,
                        const std::vector<MeasurementPoint>& points) {
  if (points.empty()) throw Error("EmptyPointSet", "no points to route");
  if (points.size() > 10)
    throw Error("TooManyPoints",
                std::to_string(points.size()) + " points; exhaustive search capped at 10");

  // Enumerate index permutations in lexicographic order of the id sequence;
  // keeping strict improvements makes the first optimum (lex-smallest) win.
  std::vector<std::uint32_t> perm(points.size());
  std::iota(perm.begin(), perm.end(), 0u);
  std::sort(perm.begin(), perm.end(),
            [&](std::uint32_t a, std::uint32_t b) { return points[a].id < points[b].id; });

  std::vector<std::uint32_t> best_perm;
  double best_length = std::numeric_limits<double>::infinity();
  auto id_less = [&](std::uint32_t a, std::uint32_t b) { return points[a].id < points[b].id; };
  do {
    const double len = path_length_indexed(start, points, perm);
    if (len < best_length) {
      best_length = len;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end(), id_less));

  Route route;
  route.start = start;
  route.length_m = best_length;
  route.order.reserve(best_perm.size());
  for (const std::uint32_t idx : best_perm) route.order.push_back(points[idx].id);
  return route;
}

std::string trace_to_csv(const ConvergenceTrace& trace) {
  std::ostringstream out;
  out << "generation,best_length_m\n";
  for (std::size_t i = 0; i < trace.best_length_m.size(); ++i)
    out << (i + 1) << ',' << nlohmann::json(trace.best_length_m[i]).dump() << '\n';
  return out.str();
}

} // namespace cellsweep::ga
