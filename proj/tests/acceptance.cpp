// Acceptance suite: seven end-to-end criteria, one pass/fail line each.
// Runs with no network and no hardware; exits non-zero if any criterion fails.

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cellsweep/campaign.hpp"
#include "cellsweep/dominance.hpp"
#include "cellsweep/ga.hpp"
#include "cellsweep/protocol.hpp"
#include "cellsweep/rng.hpp"
#include "cellsweep/simulator.hpp"
#include "cellsweep/telemetry.hpp"

#include "helpers.hpp"

using namespace cellsweep;

namespace {

int failures = 0;

void report(int index, bool pass, const std::string& detail) {
  std::printf("[%d/7] %s  %s\n", index, pass ? "PASS" : "FAIL", detail.c_str());
  if (!pass) ++failures;
}

// 1. GA against the exhaustive oracle on 30 seeded small instances.
void criterion_ga_vs_oracle() {
  Rng inst(0xACCE97ULL);
  int within = 0;
  bool never_below = true;
  const int total = 30;
  for (int i = 0; i < total; ++i) {
    const std::size_t n = 5 + (i % 5);
    const auto points = testutil::random_points(n, 50000, 50000, inst);
    const Point2D start{inst.next_double() * 50000, inst.next_double() * 50000};
    ga::GAParams params; // defaults
    params.seed = 9000 + i;
    const auto [route, trace] = ga::optimize_route(start, points, params);
    const ga::Route best = ga::brute_force_route(start, points);
    if (route.length_m < best.length_m - 1e-9) never_below = false;
    if (route.length_m <= best.length_m * 1.02) ++within;
  }
  std::ostringstream detail;
  detail << "GA vs brute-force oracle: " << within << "/" << total
         << " within 2% (need >= 27), none below optimum: "
         << (never_below ? "yes" : "NO");
  report(1, within >= 27 && never_below, detail.str());
}

// 2. Convergence by generation 130 against generation 1000, 50 points, 50 km.
void criterion_convergence() {
  Rng inst(0xC0117ULL);
  int converged = 0;
  const int seeds = 10;
  double worst = 0.0;
  for (int s = 0; s < seeds; ++s) {
    const auto points = testutil::random_points(50, 50000, 50000, inst);
    const Point2D start{inst.next_double() * 50000, inst.next_double() * 50000};
    ga::GAParams params;
    params.generations = 1000;
    params.seed = 40 + s;
    const auto [route, trace] = ga::optimize_route(start, points, params);
    const double ratio = trace.best_length_m[129] / trace.best_length_m[999];
    worst = std::max(worst, ratio);
    if (ratio <= 1.10) ++converged;
  }
  std::ostringstream detail;
  detail << "convergence: best@130 within 10% of best@1000 for " << converged << "/"
         << seeds << " seeds (need >= 8), worst ratio " << worst;
  report(2, converged >= 8, detail.str());
}

// 3. k=5 beats k=1 on the 100-point campaign; overall time is the max.
void criterion_mobility_reduction() {
  int reduced = 0;
  int sums_differ = 0;
  bool max_exact = true;
  const int seeds = 10;
  ga::GAParams params; // defaults; run_campaign derives per-sensor seeds
  for (int s = 0; s < seeds; ++s) {
    const Campaign campaign =
        sim::make_sweep_campaign(100, 5, 0xF160B0ULL + s, {50000, 50000}, 30.0);
    const auto multi = sim::run_campaign(campaign, params, sim::Mode::k_as_configured);
    const auto single = sim::run_campaign(campaign, params, sim::Mode::force_single_sensor);
    if (multi.overall_time_s < single.overall_time_s) ++reduced;
    double sum_of_sensor_times = 0.0;
    for (const auto& [id, t] : multi.per_sensor_time_s) sum_of_sensor_times += t;
    if (sum_of_sensor_times != single.overall_time_s) ++sums_differ;
    for (const auto* rep : {&multi, &single}) {
      double max_time = 0.0;
      for (const auto& [id, t] : rep->per_sensor_time_s) max_time = std::max(max_time, t);
      if (rep->overall_time_s != max_time) max_exact = false;
    }
  }
  std::ostringstream detail;
  detail << "mobility reduction: overall(k=5) < overall(k=1) for " << reduced << "/"
         << seeds << " seeds (need 10), overall == max(per-sensor) exactly: "
         << (max_exact ? "yes" : "NO") << ", sum(k=5 times) != k=1 time: " << sums_differ
         << "/" << seeds;
  report(3, reduced == seeds && max_exact && sums_differ == seeds, detail.str());
}

// 4. Dominance equals the brute-force nearest-sensor oracle, ties included.
void criterion_dominance_exactness() {
  Rng inst(0xD011ULL);
  int matched = 0;
  const int instances = 100;
  for (int i = 0; i < instances; ++i) {
    const std::size_t k = 1 + inst.next_below(32);
    const std::size_t n = inst.next_below(1000);
    const auto sensors = testutil::random_sensors(k, 50000, 50000, inst);
    const auto points = testutil::random_points(n, 50000, 50000, inst);
    const auto assignment = dominance::assign_dominances(sensors, points);
    if (assignment.owner == testutil::nearest_sensor_oracle(sensors, points)) ++matched;
  }

  // Engineered exact ties: points on the bisector of two sensors, plus a
  // coincident sensor pair; the lowest id must own them.
  bool ties_ok = true;
  {
    std::vector<SensorNode> sensors(2);
    sensors[0].id = 7, sensors[0].position = {0, 0};
    sensors[1].id = 3, sensors[1].position = {10, 0};
    std::vector<MeasurementPoint> points;
    for (std::uint32_t i = 0; i < 20; ++i) {
      MeasurementPoint p;
      p.id = i + 1;
      p.position = {5.0, static_cast<double>(i)};
      points.push_back(p);
    }
    for (const auto& [pid, sid] : dominance::assign_dominances(sensors, points).owner)
      ties_ok = ties_ok && sid == 3;

    std::vector<SensorNode> coincident(3);
    coincident[0].id = 9, coincident[0].position = {5, 5};
    coincident[1].id = 2, coincident[1].position = {5, 5};
    coincident[2].id = 4, coincident[2].position = {40, 40};
    MeasurementPoint near_pair;
    near_pair.id = 1;
    near_pair.position = {6, 5};
    for (const auto& [pid, sid] :
         dominance::assign_dominances(coincident, {near_pair}).owner)
      ties_ok = ties_ok && sid == 2;
  }

  std::ostringstream detail;
  detail << "dominance exactness: " << matched << "/" << instances
         << " random instances equal the oracle (need 100), engineered ties to lowest id: "
         << (ties_ok ? "yes" : "NO");
  report(4, matched == instances && ties_ok, detail.str());
}

// 5. Codec fuzz round-trip, closest-BS rule over a full run, duplicate tolerance.
void criterion_protocol() {
  Rng rng(0x9107ULL);
  bool roundtrip = true;
  for (int i = 0; i < 10000; ++i) {
    const auto env = testutil::random_envelope(rng);
    if (protocol::decode(protocol::encode(env)) != env) {
      roundtrip = false;
      break;
    }
  }

  // Closest-BS rule across a full simulated exchange, checked against a
  // from-the-trace distance oracle.
  const Campaign campaign = sim::make_sweep_campaign(40, 3, 0xBEEFULL, {50000, 50000}, 30.0);
  ga::GAParams params;
  params.population_size = 60;
  params.generations = 120;
  const auto report_run = sim::run_campaign(campaign, params, sim::Mode::k_as_configured);

  std::map<std::uint32_t, Point2D> last_known;
  for (const auto& sensor : campaign.sensors) last_known[sensor.id] = sensor.position;
  std::size_t central_msgs = 0;
  bool bs_rule = true;
  for (const auto& entry : report_run.trace) {
    if (entry.env.from.is_central()) {
      ++central_msgs;
      if (!entry.env.closest_bs) {
        bs_rule = false;
        continue;
      }
      const Point2D at = last_known.at(*entry.to_sensor);
      const BaseStation* best = nullptr;
      for (const auto& bs : campaign.base_stations) {
        if (!best || squared_distance(at, bs.position) < squared_distance(at, best->position) ||
            (squared_distance(at, bs.position) == squared_distance(at, best->position) &&
             bs.cell_id < best->cell_id))
          best = &bs;
      }
      if (entry.env.closest_bs->cell_id != best->cell_id ||
          !(entry.env.closest_bs->position == best->position))
        bs_rule = false;
    } else if (const auto* pos = std::get_if<protocol::Position>(&entry.env.kind)) {
      last_known[*entry.env.from.sensor_id] = pos->at;
    }
  }

  // Duplicate tolerance: re-delivering each inbound message leaves the final
  // sensor store unchanged.
  auto run_sequence = [](int duplicate_at) {
    protocol::SensorState sensor;
    sensor.id = 1;
    std::vector<protocol::SensorEvent> events;
    auto central_msg = [](std::uint64_t id, protocol::MessageKind kind) {
      protocol::MessageEnvelope env;
      env.msg_id = id;
      env.from = protocol::Sender::central();
      env.closest_bs = protocol::ClosestBs{{0, 0}, 1};
      env.kind = std::move(kind);
      return protocol::InboundMessage{env};
    };
    events.emplace_back(central_msg(1, protocol::Start{}));
    events.emplace_back(central_msg(2, protocol::Vector{{{10, 0}, {20, 0}}}));
    for (int m = 0; m < 2; ++m) {
      protocol::MeasurementRecord record;
      record.point_id = 100 + m;
      record.position = {10.0 * (m + 1), 0};
      record.time_s = m;
      events.emplace_back(protocol::MeasurementComplete{record});
    }
    events.emplace_back(central_msg(3, protocol::GetMeasure{}));
    events.emplace_back(central_msg(4, protocol::Stop{}));

    int index = 0;
    for (const auto& event : events) {
      auto result = protocol::sensor_step(std::move(sensor), event);
      sensor = std::move(result.state);
      if (index == duplicate_at && std::holds_alternative<protocol::InboundMessage>(event)) {
        auto dup = protocol::sensor_step(std::move(sensor), event);
        sensor = std::move(dup.state);
      }
      ++index;
    }
    return sensor.store;
  };
  const auto baseline = run_sequence(-1);
  bool duplicates_ok = true;
  for (int at = 0; at < 6; ++at) duplicates_ok = duplicates_ok && run_sequence(at) == baseline;

  std::ostringstream detail;
  detail << "protocol: 10^4 envelope round-trips " << (roundtrip ? "lossless" : "LOSSY")
         << ", closest-bs rule on " << central_msgs
         << " central messages: " << (bs_rule ? "exact" : "VIOLATED")
         << ", duplicate delivery idempotent: " << (duplicates_ok ? "yes" : "NO");
  report(5, roundtrip && bs_rule && duplicates_ok && central_msgs > 0, detail.str());
}

// 6. Parsers: GGA reference, modem round-trip over 10^3 seeds, CSQ mapping.
void criterion_parsers() {
  bool gga_ok = true;
  {
    const char* sentence = "$GPGGA,123519,4807.038,N,01131.000,E,1,08,0.9,545.4,M,46.9,M,,*47";
    const std::string_view body(sentence + 1, std::string_view(sentence).size() - 4);
    gga_ok = testutil::nmea_checksum(body) == 0x47;
    const auto fix = telemetry::parse_nmea(sentence);
    gga_ok = gga_ok && std::abs(fix.latitude - 48.1173) < 1e-6 &&
             std::abs(fix.longitude - 11.516667) < 1e-6;
  }

  bool modem_ok = true;
  {
    Rng rng(0x505ULL);
    std::vector<BaseStation> table(3);
    for (std::uint32_t i = 0; i < 3; ++i) {
      table[i].id = i + 1;
      table[i].cell_id = 100 + i;
      table[i].position = {15000.0 * i, 10000.0 * (i % 2)};
      table[i].antenna = "omni";
    }
    for (int s = 0; s < 1000 && modem_ok; ++s) {
      const Point2D at{rng.next_double() * 30000, rng.next_double() * 20000};
      const std::string block = telemetry::simulated_modem(at, table, rng.next_u64());
      const auto cell = telemetry::parse_cell_info(block);
      // Re-read the raw lines independently and compare each field.
      std::map<std::string, std::string> raw;
      std::istringstream lines(block);
      std::string line;
      while (std::getline(lines, line)) {
        const auto colon = line.find(':');
        if (colon != std::string::npos)
          raw[line.substr(0, colon)] = line.substr(colon + 1);
      }
      char ber[16];
      std::snprintf(ber, sizeof ber, "%.2f", *cell.ber_pct);
      modem_ok = raw.at("cid") == std::to_string(cell.cell_id) &&
                 raw.at("ta") == std::to_string(cell.timing_advance) &&
                 raw.at("mcc") == std::to_string(cell.mcc) &&
                 raw.at("mnc") == std::to_string(cell.mnc) &&
                 raw.at("lac") == std::to_string(cell.lac) &&
                 raw.at("rssi") == std::to_string(static_cast<int>(*cell.rssi_dbm)) &&
                 raw.at("ber") == ber && raw.at("bcc") == std::to_string(cell.bcc) &&
                 raw.at("btcc") == std::to_string(cell.btcc) &&
                 raw.at("ncc") == std::to_string(cell.ncc);
    }
  }

  bool csq_ok = true;
  for (int n = 0; n <= 31; ++n) {
    const auto reading = telemetry::parse_at_csq("+CSQ: " + std::to_string(n) + ",0");
    csq_ok = csq_ok && *reading.rssi_dbm == -113.0 + 2.0 * n;
  }

  std::ostringstream detail;
  detail << "parsers: GGA reference " << (gga_ok ? "exact" : "WRONG") << ", modem round-trip "
         << (modem_ok ? "lossless over 10^3 seeds" : "LOSSY") << ", CSQ affine on 0..31: "
         << (csq_ok ? "yes" : "NO");
  report(6, gga_ok && modem_ok && csq_ok, detail.str());
}

// 7. Conservation of measurement points and byte-identical reports.
void criterion_conservation_determinism() {
  const Campaign campaign = sim::make_sweep_campaign(60, 4, 0xC0DAULL, {50000, 50000}, 30.0);
  ga::GAParams params;
  params.population_size = 60;
  params.generations = 150;

  const auto first = sim::run_campaign(campaign, params, sim::Mode::k_as_configured);
  const auto second = sim::run_campaign(campaign, params, sim::Mode::k_as_configured);

  std::multiset<std::uint32_t> expected, seen;
  for (const auto& p : campaign.points) expected.insert(p.id);
  for (const auto& r : first.records) seen.insert(r.record.point_id);
  const bool conserved = expected == seen && first.records.size() == campaign.points.size();

  const bool deterministic = sim::report_to_json(first) == sim::report_to_json(second);

  std::ostringstream detail;
  detail << "conservation & determinism: " << first.records.size() << "/"
         << campaign.points.size()
         << " records, multiset equal: " << (conserved ? "yes" : "NO")
         << ", byte-identical reports: " << (deterministic ? "yes" : "NO");
  report(7, conserved && deterministic, detail.str());
}

} // namespace

int main() {
  criterion_ga_vs_oracle();
  criterion_convergence();
  criterion_mobility_reduction();
  criterion_dominance_exactness();
  criterion_protocol();
  criterion_parsers();
  criterion_conservation_determinism();
  if (failures) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all 7 criteria passed\n");
  return 0;
}
