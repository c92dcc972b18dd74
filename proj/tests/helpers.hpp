#pragma once

// Shared generators and oracles for the test suites. Everything here is
// independent of the library internals it is used to check.

#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cellsweep/campaign.hpp"
#include "cellsweep/protocol.hpp"
#include "cellsweep/rng.hpp"
#include "cellsweep/telemetry.hpp"

namespace testutil {

using namespace cellsweep;

inline std::vector<MeasurementPoint> random_points(std::size_t n, double width,
                                                   double height, Rng& rng) {
  std::vector<MeasurementPoint> points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    MeasurementPoint p;
    p.id = static_cast<std::uint32_t>(i + 1);
    p.position = {rng.next_double() * width, rng.next_double() * height};
    points.push_back(std::move(p));
  }
  return points;
}

inline std::vector<SensorNode> random_sensors(std::size_t k, double width, double height,
                                              Rng& rng, double speed_mps = 8.0) {
  std::vector<SensorNode> sensors;
  sensors.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    SensorNode s;
    s.id = static_cast<std::uint32_t>(i + 1);
    s.position = {rng.next_double() * width, rng.next_double() * height};
    s.speed_mps = speed_mps;
    sensors.push_back(std::move(s));
  }
  return sensors;
}

// Brute-force nearest-sensor oracle: plain distance comparison with the
// lowest-id tie rule, no index, no shortcuts.
inline std::map<std::uint32_t, std::uint32_t>
nearest_sensor_oracle(const std::vector<SensorNode>& sensors,
                      const std::vector<MeasurementPoint>& points) {
  std::map<std::uint32_t, std::uint32_t> owner;
  for (const auto& p : points) {
    std::uint32_t best_id = 0;
    double best_d2 = 0.0;
    bool first = true;
    for (const auto& s : sensors) {
      const double dx = p.position.x - s.position.x;
      const double dy = p.position.y - s.position.y;
      const double d2 = dx * dx + dy * dy;
      if (first || d2 < best_d2 || (d2 == best_d2 && s.id < best_id)) {
        best_d2 = d2;
        best_id = s.id;
        first = false;
      }
    }
    owner[p.id] = best_id;
  }
  return owner;
}

// XOR checksum oracle for NMEA sentences: everything between '$' and '*'.
inline unsigned nmea_checksum(std::string_view body) {
  unsigned x = 0;
  for (const char c : body) x ^= static_cast<unsigned char>(c);
  return x;
}

inline std::string nmea_sentence(std::string_view body) {
  char buf[4];
  std::snprintf(buf, sizeof buf, "%02X", nmea_checksum(body));
  return "$" + std::string(body) + "*" + buf;
}

// Random but always-valid protocol envelope, for codec fuzzing.
inline protocol::MessageEnvelope random_envelope(Rng& rng) {
  using namespace cellsweep::protocol;
  MessageEnvelope env;
  env.msg_id = rng.next_u64() >> 16;
  const bool central = rng.next_bool(0.5);
  env.from = central ? Sender::central()
                     : Sender::sensor(static_cast<std::uint32_t>(rng.next_below(4096)));
  if (central)
    env.closest_bs = ClosestBs{{rng.next_double() * 1e5, rng.next_double() * 1e5},
                               static_cast<std::uint32_t>(rng.next_below(100000))};

  auto random_point = [&]() -> Point2D {
    return {rng.next_double() * 5e4 - 1e4, rng.next_double() * 5e4 - 1e4};
  };
  auto random_cell = [&]() {
    telemetry::CellMeasurement cell;
    cell.cell_id = static_cast<std::uint32_t>(rng.next_below(1 << 16));
    cell.timing_advance = static_cast<int>(rng.next_below(64));
    cell.mcc = static_cast<std::uint16_t>(rng.next_below(1000));
    cell.mnc = static_cast<std::uint16_t>(rng.next_below(1000));
    cell.lac = static_cast<std::uint16_t>(rng.next_below(1 << 16));
    if (rng.next_bool(0.9)) cell.rssi_dbm = -113.0 + 2.0 * static_cast<double>(rng.next_below(32));
    if (rng.next_bool(0.7)) cell.rssi_delta_db = static_cast<double>(rng.next_below(41)) - 20.0;
    if (rng.next_bool(0.9)) cell.ber_pct = telemetry::rxqual_to_ber_pct(static_cast<int>(rng.next_below(8)));
    if (rng.next_bool(0.7)) cell.ber_delta_pct = static_cast<double>(rng.next_below(21)) - 10.0;
    cell.bcc = static_cast<std::uint8_t>(rng.next_below(8));
    cell.btcc = static_cast<std::uint8_t>(rng.next_below(8));
    cell.ncc = static_cast<std::uint8_t>(rng.next_below(8));
    return cell;
  };
  auto random_record = [&]() {
    MeasurementRecord record;
    record.point_id = static_cast<std::uint32_t>(rng.next_below(100000));
    record.position = random_point();
    record.time_s = rng.next_double() * 1e5;
    record.cell = random_cell();
    return record;
  };

  switch (rng.next_below(11)) {
    case 0: env.kind = Start{}; break;
    case 1: env.kind = Stop{}; break;
    case 2: env.kind = MoveTo{random_point()}; break;
    case 3:
      env.kind = rng.next_bool(0.5) ? GetMeasure{} : GetMeasure{rng.next_below(1000)};
      break;
    case 4: {
      Vector v;
      const std::size_t n = 1 + rng.next_below(5);
      for (std::size_t i = 0; i < n; ++i) v.order.push_back(random_point());
      env.kind = std::move(v);
      break;
    }
    case 5: env.kind = ReadyToSend{rng.next_below(1000)}; break;
    case 6: env.kind = CellInfo{static_cast<std::uint32_t>(rng.next_below(100000))}; break;
    case 7: env.kind = Position{random_point(), rng.next_double() * 1e5}; break;
    case 8: env.kind = Ack{rng.next_below(1000000)}; break;
    case 9: {
      MeasureData data;
      const std::size_t n = rng.next_below(4);
      for (std::size_t i = 0; i < n; ++i) data.records.push_back(random_record());
      env.kind = std::move(data);
      break;
    }
    default: {
      BaseStation bs;
      bs.id = static_cast<std::uint32_t>(rng.next_below(1000));
      bs.position = random_point();
      bs.cell_id = static_cast<std::uint32_t>(rng.next_below(100000));
      bs.antenna = rng.next_bool(0.5) ? "omni" : "sector-120";
      env.kind = CellInfoReply{bs};
      break;
    }
  }
  return env;
}

} // namespace testutil
