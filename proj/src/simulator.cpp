#include "cellsweep/simulator.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

#include "cellsweep/rng.hpp"
#include "cellsweep/telemetry.hpp"
#include "cellsweep/wire_json.hpp"

namespace cellsweep::sim {

namespace {

using protocol::MessageEnvelope;

constexpr std::uint64_t points_salt = 0x706f696e7473ULL; // "points"
constexpr std::uint64_t sensor_salt = 0x73656e736f72ULL; // "sensor"
constexpr std::uint64_t modem_salt = 0x6d6f64656dULL;    // "modem"

// Piecewise-linear motion history of one sensor: travel segments separated by
// measurement dwells.
struct Segment {
  double depart_s = 0.0;
  double arrive_s = 0.0;
  Point2D from;
  Point2D to;
};

struct SensorRuntime {
  protocol::SensorState state;
  Point2D home;                 // position at campaign start
  double speed_mps = 0.0;
  std::vector<Segment> segments;
  std::vector<std::uint32_t> waypoint_ids; // point id per VECTOR entry
  double plan_received_s = 0.0;
  double last_measure_s = 0.0;
  bool has_plan = false;
  std::optional<telemetry::CellMeasurement> previous_cell;
};

struct Scheduled {
  double time_s;
  std::uint64_t seq;
  SimEvent event;
};

struct ScheduledAfter {
  bool operator()(const Scheduled& a, const Scheduled& b) const {
    return a.time_s > b.time_s || (a.time_s == b.time_s && a.seq > b.seq);
  }
};

Point2D position_at(const SensorRuntime& rt, double t) {
  if (rt.segments.empty() || t <= rt.segments.front().depart_s) return rt.home;
  for (const Segment& seg : rt.segments) {
    if (t <= seg.depart_s) return seg.from; // dwelling before this leg
    if (t < seg.arrive_s) {
      const double f = (t - seg.depart_s) / (seg.arrive_s - seg.depart_s);
      return {seg.from.x + f * (seg.to.x - seg.from.x),
              seg.from.y + f * (seg.to.y - seg.from.y)};
    }
  }
  return rt.segments.back().to;
}

} // namespace

std::vector<MeasurementPoint> generate_points(std::size_t n, const AreaSize& area,
                                              std::uint64_t seed) {
  Rng rng(seed);
  std::vector<MeasurementPoint> points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    MeasurementPoint p;
    p.id = static_cast<std::uint32_t>(i + 1);
    p.position.x = rng.next_double() * area.width_m;
    p.position.y = rng.next_double() * area.height_m;
    points.push_back(std::move(p));
  }
  return points;
}

CampaignReport run_campaign(const Campaign& campaign, const ga::GAParams& ga_params,
                            Mode mode, const SimConfig& config) {
  Campaign effective = campaign;
  if (mode == Mode::force_single_sensor) {
    const auto lowest =
        std::min_element(effective.sensors.begin(), effective.sensors.end(),
                         [](const SensorNode& a, const SensorNode& b) { return a.id < b.id; });
    effective.sensors = {*lowest};
  }

  protocol::CentralState central = protocol::make_central(effective);

  std::map<std::uint32_t, SensorRuntime> sensors;
  for (const SensorNode& node : effective.sensors) {
    SensorRuntime rt;
    rt.state.id = node.id;
    rt.home = node.position;
    rt.speed_mps = node.speed_mps;
    sensors.emplace(node.id, std::move(rt));
  }

  // Measurement points are identified on arrival by exact position match;
  // coincident positions hand out their ids lowest-first.
  std::map<std::pair<double, double>, std::vector<std::uint32_t>> ids_at;
  std::map<std::uint32_t, Point2D> point_by_id;
  for (const MeasurementPoint& p : effective.points) {
    ids_at[{p.position.x, p.position.y}].push_back(p.id);
    point_by_id[p.id] = p.position;
  }
  for (auto& entry : ids_at) std::sort(entry.second.begin(), entry.second.end());

  std::priority_queue<Scheduled, std::vector<Scheduled>, ScheduledAfter> queue;
  std::uint64_t next_seq = 0;
  auto schedule = [&](double t, SimEvent event) {
    event.time_s = t;
    queue.push(Scheduled{t, next_seq++, std::move(event)});
  };

  CampaignReport report;

  auto send_to_central = [&](double now, std::vector<MessageEnvelope> envelopes) {
    for (auto& env : envelopes)
      schedule(now + config.latency_s,
               SimEvent{0.0, MessageDelivery{std::nullopt, std::move(env)}});
  };
  auto send_to_sensors = [&](double now, std::vector<protocol::AddressedEnvelope> envelopes) {
    for (auto& addressed : envelopes)
      schedule(now + config.latency_s,
               SimEvent{0.0, MessageDelivery{addressed.to_sensor, std::move(addressed.env)}});
  };

  // Campaign kickoff: START everyone, then plan and distribute the routes.
  {
    ga::GAParams plan_params = ga_params;
    plan_params.seed = effective.seed;
    auto started = protocol::central_step(std::move(central), protocol::StartCommand{});
    central = std::move(started.state);
    send_to_sensors(0.0, std::move(started.out));

    auto planned = protocol::central_step(
        std::move(central), protocol::PlanCommand{effective.points, plan_params});
    central = std::move(planned.state);
    send_to_sensors(0.0, std::move(planned.out));
  }

  const double dwell = config.dwell_s;

  auto start_motion = [&](SensorRuntime& rt, double now) {
    rt.plan_received_s = now;
    rt.last_measure_s = now;
    rt.has_plan = true;
    rt.segments.clear();
    rt.waypoint_ids.clear();

    Point2D at = rt.home;
    double t = now;
    double distance = 0.0;
    for (std::size_t i = 0; i < rt.state.plan.size(); ++i) {
      const Point2D target = rt.state.plan[i];
      const double leg = euclidean_distance(at, target);
      Segment seg;
      seg.depart_s = t;
      seg.arrive_s = t + leg / rt.speed_mps;
      seg.from = at;
      seg.to = target;
      rt.segments.push_back(seg);
      distance += leg;

      auto& bucket = ids_at.at({target.x, target.y});
      rt.waypoint_ids.push_back(bucket.front());
      bucket.erase(bucket.begin());

      schedule(seg.arrive_s, SimEvent{0.0, ArrivalAtPoint{rt.state.id, i}});
      at = target;
      t = seg.arrive_s + dwell;
    }
    report.total_distance_m[rt.state.id] = distance;
  };

  while (!queue.empty()) {
    const Scheduled item = queue.top();
    queue.pop();
    const double now = item.time_s;

    if (const auto* delivery = std::get_if<MessageDelivery>(&item.event.kind)) {
      report.trace.push_back(TraceEntry{now, delivery->to_sensor, delivery->env});
      if (!delivery->to_sensor) {
        auto result = protocol::central_step(std::move(central),
                                             protocol::InboundMessage{delivery->env});
        central = std::move(result.state);
        send_to_sensors(now, std::move(result.out));
        continue;
      }
      SensorRuntime& rt = sensors.at(*delivery->to_sensor);
      const bool was_idle = rt.state.mode == protocol::SensorMode::idle;
      auto result = protocol::sensor_step(std::move(rt.state),
                                          protocol::InboundMessage{delivery->env});
      rt.state = std::move(result.state);
      send_to_central(now, std::move(result.out));

      if (std::holds_alternative<protocol::Start>(delivery->env.kind) && was_idle &&
          rt.state.mode == protocol::SensorMode::measuring) {
        schedule(now + config.position_period_s,
                 SimEvent{0.0, PositionTimerTick{rt.state.id}});
      }
      if (std::holds_alternative<protocol::Vector>(delivery->env.kind) &&
          rt.state.mode == protocol::SensorMode::measuring && !rt.has_plan) {
        start_motion(rt, now);
      }
      continue;
    }

    if (const auto* arrival = std::get_if<ArrivalAtPoint>(&item.event.kind)) {
      schedule(now + dwell, SimEvent{0.0, MeasurementDone{arrival->sensor_id,
                                                          arrival->plan_index}});
      continue;
    }

    if (const auto* done = std::get_if<MeasurementDone>(&item.event.kind)) {
      SensorRuntime& rt = sensors.at(done->sensor_id);
      const std::uint32_t point_id = rt.waypoint_ids.at(done->plan_index);
      const Point2D at = point_by_id.at(point_id);

      const std::uint64_t modem_seed =
          derive_seed(derive_seed(effective.seed, modem_salt + rt.state.id), point_id);
      telemetry::CellMeasurement cell =
          telemetry::parse_cell_info(telemetry::simulated_modem(at, effective.base_stations,
                                                                modem_seed));
      if (rt.previous_cell) {
        std::vector<telemetry::CellMeasurement> pair{*rt.previous_cell, cell};
        telemetry::apply_deltas(pair);
        cell = pair[1];
      } else {
        std::vector<telemetry::CellMeasurement> single{cell};
        telemetry::apply_deltas(single);
        cell = single[0];
      }
      rt.previous_cell = cell;

      protocol::MeasurementRecord record;
      record.point_id = point_id;
      record.position = at;
      record.time_s = now;
      record.cell = cell;

      rt.last_measure_s = now;
      auto result = protocol::sensor_step(std::move(rt.state),
                                          protocol::MeasurementComplete{record});
      rt.state = std::move(result.state);
      send_to_central(now, std::move(result.out));
      continue;
    }

    const auto& tick = std::get<PositionTimerTick>(item.event.kind);
    SensorRuntime& rt = sensors.at(tick.sensor_id);
    if (rt.state.mode != protocol::SensorMode::measuring) continue; // stopped: timer ends
    auto result = protocol::sensor_step(
        std::move(rt.state), protocol::PositionTimer{now, position_at(rt, now)});
    rt.state = std::move(result.state);
    send_to_central(now, std::move(result.out));
    schedule(now + config.position_period_s, SimEvent{0.0, PositionTimerTick{tick.sensor_id}});
  }

  report.overall_time_s = 0.0;
  for (const auto& [id, rt] : sensors) {
    const double elapsed = rt.has_plan ? rt.last_measure_s - rt.plan_received_s : 0.0;
    report.per_sensor_time_s[id] = elapsed;
    if (!report.total_distance_m.count(id)) report.total_distance_m[id] = 0.0;
    report.overall_time_s = std::max(report.overall_time_s, elapsed);
  }
  report.records = central.collected;
  report.convergence = central.last_plan_traces;
  return report;
}

Campaign make_sweep_campaign(std::size_t n, std::size_t k, std::uint64_t seed,
                             const AreaSize& area, double speed_kmh) {
  Campaign campaign;
  campaign.area = area;
  campaign.seed = seed;
  campaign.points = generate_points(n, area, derive_seed(seed, points_salt));

  Rng rng(derive_seed(seed, sensor_salt));
  for (std::size_t i = 0; i < k; ++i) {
    SensorNode node;
    node.id = static_cast<std::uint32_t>(i + 1);
    node.position.x = rng.next_double() * area.width_m;
    node.position.y = rng.next_double() * area.height_m;
    node.speed_mps = kmh_to_mps(speed_kmh);
    campaign.sensors.push_back(node);
  }

  // Base stations on a 10 km grid (at least one, centered), cell ids 1..m.
  constexpr double spacing = 10000.0;
  std::uint32_t next_id = 1;
  for (double y = spacing / 2; y < area.height_m || next_id == 1; y += spacing) {
    for (double x = spacing / 2; x < area.width_m || next_id == 1; x += spacing) {
      BaseStation bs;
      bs.id = next_id;
      bs.cell_id = next_id;
      bs.position = {std::min(x, area.width_m), std::min(y, area.height_m)};
      bs.antenna = "omni";
      campaign.base_stations.push_back(bs);
      ++next_id;
      if (x >= area.width_m) break;
    }
    if (y >= area.height_m) break;
  }
  return campaign;
}

std::vector<SweepRow> sweep(const std::vector<std::size_t>& ns,
                            const std::vector<std::size_t>& ks,
                            std::uint32_t repetitions, std::uint64_t base_seed,
                            const SweepConfig& config) {
  struct Cell {
    std::size_t n, k;
    std::uint32_t rep;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (const std::size_t n : ns)
    for (const std::size_t k : ks)
      for (std::uint32_t rep = 0; rep < repetitions; ++rep) {
        const std::uint64_t seed =
            derive_seed(derive_seed(derive_seed(base_seed, n), k), rep);
        cells.push_back({n, k, rep, seed});
      }

  std::vector<SweepRow> rows(cells.size());
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, config.jobs)) \
    if (config.jobs > 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(cells.size()); ++i) {
    try {
      const Cell& cell = cells[i];
      const Campaign campaign =
          make_sweep_campaign(cell.n, cell.k, cell.seed, config.area, config.speed_kmh);
      const CampaignReport report =
          run_campaign(campaign, config.ga, Mode::k_as_configured, config.sim);
      rows[i] = SweepRow{cell.n, cell.k, cell.rep, report.overall_time_s,
                         report.convergence};
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

// ---------------------------------------------------------------------------
// Exports

namespace {

using nlohmann::ordered_json;

std::string json_number(double v) { return ordered_json(v).dump(); }

} // namespace

std::string report_to_json(const CampaignReport& report) {
  ordered_json j;
  auto per_sensor = ordered_json::array();
  for (const auto& [id, time_s] : report.per_sensor_time_s) {
    per_sensor.push_back(ordered_json{{"sensor_id", id},
                                      {"distance_m", report.total_distance_m.at(id)},
                                      {"time_s", time_s}});
  }
  j["per_sensor"] = std::move(per_sensor);
  j["overall_time_s"] = report.overall_time_s;

  auto records = ordered_json::array();
  for (const auto& collected : report.records) {
    records.push_back(ordered_json{{"sensor_id", collected.sensor_id},
                                   {"record", protocol::record_to_json(collected.record)}});
  }
  j["records"] = std::move(records);

  auto convergence = ordered_json::array();
  for (const auto& [id, trace] : report.convergence) {
    convergence.push_back(
        ordered_json{{"sensor_id", id}, {"best_length_m", trace.best_length_m}});
  }
  j["convergence"] = std::move(convergence);

  auto trace = ordered_json::array();
  for (const auto& entry : report.trace) {
    std::string line = protocol::encode(entry.env);
    line.pop_back(); // strip the newline inside JSON
    trace.push_back(ordered_json{
        {"time_s", entry.time_s},
        {"to", entry.to_sensor ? "sensor/" + std::to_string(*entry.to_sensor)
                               : std::string("central")},
        {"line", std::move(line)}});
  }
  j["trace"] = std::move(trace);
  return j.dump(2) + "\n";
}

std::string report_times_to_csv(const CampaignReport& report) {
  std::ostringstream out;
  out << "sensor_id,distance_m,time_s\n";
  for (const auto& [id, time_s] : report.per_sensor_time_s)
    out << id << ',' << json_number(report.total_distance_m.at(id)) << ','
        << json_number(time_s) << '\n';
  return out.str();
}

std::string trace_to_text(const std::vector<TraceEntry>& trace) {
  std::string out;
  for (const auto& entry : trace)
    out += json_number(entry.time_s) + " " + protocol::encode(entry.env);
  return out;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "n,k,rep,overall_time_s\n";
  for (const auto& row : rows)
    out << row.n_points << ',' << row.k_sensors << ',' << row.rep << ','
        << json_number(row.overall_time_s) << '\n';
  return out.str();
}

std::string sweep_convergence_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "n,k,rep,sensor_id,generation,best_length_m\n";
  for (const auto& row : rows)
    for (const auto& [sensor_id, trace] : row.convergence)
      for (std::size_t g = 0; g < trace.best_length_m.size(); ++g)
        out << row.n_points << ',' << row.k_sensors << ',' << row.rep << ','
            << sensor_id << ',' << (g + 1) << ','
            << json_number(trace.best_length_m[g]) << '\n';
  return out.str();
}

} // namespace cellsweep::sim
