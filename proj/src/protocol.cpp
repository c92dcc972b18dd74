#include "cellsweep/protocol.hpp"

#include <algorithm>
#include <charconv>

#include "cellsweep/dominance.hpp"
#include "cellsweep/rng.hpp"
#include "cellsweep/wire_json.hpp"

namespace cellsweep::protocol {

namespace {

using nlohmann::ordered_json;

constexpr std::uint64_t central_sender_key = 1ULL << 40;

[[noreturn]] void parse_fail(const std::string& reason, std::size_t offset = 0) {
  throw ParseError(offset, reason);
}

const ordered_json& wire_key(const ordered_json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) parse_fail(std::string("missing field '") + key + "'");
  return *it;
}

std::uint64_t wire_u64(const ordered_json& obj, const char* key) {
  const auto& v = wire_key(obj, key);
  if (!v.is_number_unsigned()) parse_fail(std::string("field '") + key + "' must be unsigned");
  return v.get<std::uint64_t>();
}

std::uint32_t wire_u32(const ordered_json& obj, const char* key) {
  const std::uint64_t raw = wire_u64(obj, key);
  if (raw > 0xffffffffULL) parse_fail(std::string("field '") + key + "' exceeds 32 bits");
  return static_cast<std::uint32_t>(raw);
}

double wire_number(const ordered_json& obj, const char* key) {
  const auto& v = wire_key(obj, key);
  if (!v.is_number()) parse_fail(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

std::optional<double> wire_opt_number(const ordered_json& obj, const char* key) {
  const auto& v = wire_key(obj, key);
  if (v.is_null()) return std::nullopt;
  if (!v.is_number()) parse_fail(std::string("field '") + key + "' must be number or null");
  return v.get<double>();
}

void expect_keys(const ordered_json& obj, std::initializer_list<const char*> keys,
                 const char* what) {
  for (const auto& item : obj.items()) {
    if (std::find_if(keys.begin(), keys.end(), [&](const char* k) {
          return item.key() == k;
        }) == keys.end())
      parse_fail(std::string("unexpected field '") + item.key() + "' in " + what);
  }
}

ordered_json point_to_json(const Point2D& p) {
  return ordered_json{{"x", p.x}, {"y", p.y}};
}

Point2D point_from_json(const ordered_json& j, const char* what) {
  if (!j.is_object()) parse_fail(std::string(what) + " must be an object");
  expect_keys(j, {"x", "y"}, what);
  return {wire_number(j, "x"), wire_number(j, "y")};
}

} // namespace

ordered_json cell_to_json(const telemetry::CellMeasurement& cell) {
  auto opt = [](const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
  };
  return ordered_json{{"cid", cell.cell_id},
                      {"ta", cell.timing_advance},
                      {"mcc", cell.mcc},
                      {"mnc", cell.mnc},
                      {"lac", cell.lac},
                      {"rssi", opt(cell.rssi_dbm)},
                      {"rssi_delta", opt(cell.rssi_delta_db)},
                      {"ber", opt(cell.ber_pct)},
                      {"ber_delta", opt(cell.ber_delta_pct)},
                      {"bcc", cell.bcc},
                      {"btcc", cell.btcc},
                      {"ncc", cell.ncc}};
}

telemetry::CellMeasurement cell_from_json(const ordered_json& j) {
  if (!j.is_object()) parse_fail("cell must be an object");
  expect_keys(j, {"cid", "ta", "mcc", "mnc", "lac", "rssi", "rssi_delta", "ber",
                  "ber_delta", "bcc", "btcc", "ncc"}, "cell");
  telemetry::CellMeasurement cell;
  cell.cell_id = wire_u32(j, "cid");
  const auto& ta = wire_key(j, "ta");
  if (!ta.is_number_integer()) parse_fail("field 'ta' must be an integer");
  cell.timing_advance = ta.get<int>();
  cell.mcc = static_cast<std::uint16_t>(wire_u32(j, "mcc"));
  cell.mnc = static_cast<std::uint16_t>(wire_u32(j, "mnc"));
  cell.lac = static_cast<std::uint16_t>(wire_u32(j, "lac"));
  cell.rssi_dbm = wire_opt_number(j, "rssi");
  cell.rssi_delta_db = wire_opt_number(j, "rssi_delta");
  cell.ber_pct = wire_opt_number(j, "ber");
  cell.ber_delta_pct = wire_opt_number(j, "ber_delta");
  cell.bcc = static_cast<std::uint8_t>(wire_u32(j, "bcc"));
  cell.btcc = static_cast<std::uint8_t>(wire_u32(j, "btcc"));
  cell.ncc = static_cast<std::uint8_t>(wire_u32(j, "ncc"));
  return cell;
}

ordered_json record_to_json(const MeasurementRecord& record) {
  return ordered_json{{"point_id", record.point_id},
                      {"x", record.position.x},
                      {"y", record.position.y},
                      {"time", record.time_s},
                      {"cell", cell_to_json(record.cell)}};
}

MeasurementRecord record_from_json(const ordered_json& j) {
  if (!j.is_object()) parse_fail("record must be an object");
  expect_keys(j, {"point_id", "x", "y", "time", "cell"}, "record");
  MeasurementRecord record;
  record.point_id = wire_u32(j, "point_id");
  record.position = {wire_number(j, "x"), wire_number(j, "y")};
  record.time_s = wire_number(j, "time");
  record.cell = cell_from_json(wire_key(j, "cell"));
  return record;
}

const char* kind_name(const MessageKind& kind) {
  struct Namer {
    const char* operator()(const Start&) const { return "START"; }
    const char* operator()(const Stop&) const { return "STOP"; }
    const char* operator()(const MoveTo&) const { return "MOVE_TO"; }
    const char* operator()(const GetMeasure&) const { return "GET_MEASURE"; }
    const char* operator()(const Vector&) const { return "VECTOR"; }
    const char* operator()(const ReadyToSend&) const { return "READY_TO_SEND"; }
    const char* operator()(const CellInfo&) const { return "CELL_INFO"; }
    const char* operator()(const Position&) const { return "POSITION"; }
    const char* operator()(const Ack&) const { return "ACK"; }
    const char* operator()(const MeasureData&) const { return "MEASURE_DATA"; }
    const char* operator()(const CellInfoReply&) const { return "CELL_INFO_REPLY"; }
  };
  return std::visit(Namer{}, kind);
}

std::string encode(const MessageEnvelope& env) {
  if (env.from.is_central() && !env.closest_bs)
    throw Error("InvalidEnvelope", "central message without closest_bs");
  if (!env.from.is_central() && env.closest_bs)
    throw Error("InvalidEnvelope", "sensor message carries closest_bs");
  if (const auto* vec = std::get_if<Vector>(&env.kind); vec && vec->order.empty())
    throw Error("InvalidEnvelope", "VECTOR with empty order");

  ordered_json j;
  j["id"] = env.msg_id;
  j["from"] = env.from.is_central() ? std::string("central")
                                    : "sensor/" + std::to_string(*env.from.sensor_id);
  if (env.closest_bs) {
    j["bs"] = ordered_json{{"x", env.closest_bs->position.x},
                           {"y", env.closest_bs->position.y},
                           {"cid", env.closest_bs->cell_id}};
  }
  j["kind"] = kind_name(env.kind);

  struct Body {
    ordered_json& j;
    void operator()(const Start&) const {}
    void operator()(const Stop&) const {}
    void operator()(const MoveTo& m) const {
      j["x"] = m.target.x;
      j["y"] = m.target.y;
    }
    void operator()(const GetMeasure& g) const {
      if (g.since) {
        j["scope"] = "PARTIAL";
        j["since"] = *g.since;
      } else {
        j["scope"] = "COMPLETE";
      }
    }
    void operator()(const Vector& v) const {
      auto arr = ordered_json::array();
      for (const auto& p : v.order) arr.push_back(point_to_json(p));
      j["order"] = std::move(arr);
    }
    void operator()(const ReadyToSend& r) const { j["count"] = r.count; }
    void operator()(const CellInfo& c) const { j["cell_id"] = c.cell_id; }
    void operator()(const Position& p) const {
      j["x"] = p.at.x;
      j["y"] = p.at.y;
      j["time"] = p.time_s;
    }
    void operator()(const Ack& a) const { j["of"] = a.of; }
    void operator()(const MeasureData& m) const {
      auto arr = ordered_json::array();
      for (const auto& r : m.records) arr.push_back(record_to_json(r));
      j["records"] = std::move(arr);
    }
    void operator()(const CellInfoReply& c) const {
      j["station"] = ordered_json{{"id", c.station.id},
                                  {"x", c.station.position.x},
                                  {"y", c.station.position.y},
                                  {"cid", c.station.cell_id},
                                  {"antenna", c.station.antenna}};
    }
  };
  std::visit(Body{j}, env.kind);
  return j.dump() + "\n";
}

MessageEnvelope decode(std::string_view line) {
  std::string_view text = line;
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.remove_suffix(1);

  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    parse_fail(e.what(), e.byte);
  }
  if (!j.is_object()) parse_fail("message must be a JSON object");

  MessageEnvelope env;
  env.msg_id = wire_u64(j, "id");

  const auto& from = wire_key(j, "from");
  if (!from.is_string()) parse_fail("field 'from' must be a string");
  const std::string from_text = from.get<std::string>();
  if (from_text == "central") {
    env.from = Sender::central();
  } else if (from_text.starts_with("sensor/")) {
    const std::string_view digits = std::string_view(from_text).substr(7);
    std::uint32_t id = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), id);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty())
      parse_fail("bad sensor id in '" + from_text + "'");
    env.from = Sender::sensor(id);
  } else {
    parse_fail("field 'from' must be 'central' or 'sensor/<id>'");
  }

  if (env.from.is_central()) {
    const auto& bs = wire_key(j, "bs");
    if (!bs.is_object()) parse_fail("field 'bs' must be an object");
    expect_keys(bs, {"x", "y", "cid"}, "bs");
    env.closest_bs = ClosestBs{{wire_number(bs, "x"), wire_number(bs, "y")},
                               wire_u32(bs, "cid")};
  } else if (j.contains("bs")) {
    parse_fail("sensor message carries 'bs'");
  }

  const auto& kind = wire_key(j, "kind");
  if (!kind.is_string()) parse_fail("field 'kind' must be a string");
  const std::string kind_text = kind.get<std::string>();

  auto base_keys = [&](std::initializer_list<const char*> extra) {
    std::vector<const char*> keys{"id", "from", "kind"};
    if (env.from.is_central()) keys.push_back("bs");
    keys.insert(keys.end(), extra.begin(), extra.end());
    for (const auto& item : j.items()) {
      if (std::find_if(keys.begin(), keys.end(), [&](const char* k) {
            return item.key() == k;
          }) == keys.end())
        parse_fail("unexpected field '" + item.key() + "' in " + kind_text);
    }
  };

  if (kind_text == "START") {
    base_keys({});
    env.kind = Start{};
  } else if (kind_text == "STOP") {
    base_keys({});
    env.kind = Stop{};
  } else if (kind_text == "MOVE_TO") {
    base_keys({"x", "y"});
    env.kind = MoveTo{{wire_number(j, "x"), wire_number(j, "y")}};
  } else if (kind_text == "GET_MEASURE") {
    const auto& scope = wire_key(j, "scope");
    if (!scope.is_string()) parse_fail("field 'scope' must be a string");
    const std::string scope_text = scope.get<std::string>();
    if (scope_text == "COMPLETE") {
      base_keys({"scope"});
      env.kind = GetMeasure{};
    } else if (scope_text == "PARTIAL") {
      base_keys({"scope", "since"});
      env.kind = GetMeasure{wire_u64(j, "since")};
    } else {
      parse_fail("scope must be COMPLETE or PARTIAL");
    }
  } else if (kind_text == "VECTOR") {
    base_keys({"order"});
    const auto& order = wire_key(j, "order");
    if (!order.is_array() || order.empty())
      parse_fail("VECTOR order must be a non-empty array");
    Vector v;
    for (const auto& p : order) v.order.push_back(point_from_json(p, "order entry"));
    env.kind = std::move(v);
  } else if (kind_text == "READY_TO_SEND") {
    base_keys({"count"});
    env.kind = ReadyToSend{wire_u64(j, "count")};
  } else if (kind_text == "CELL_INFO") {
    base_keys({"cell_id"});
    env.kind = CellInfo{wire_u32(j, "cell_id")};
  } else if (kind_text == "POSITION") {
    base_keys({"x", "y", "time"});
    env.kind = Position{{wire_number(j, "x"), wire_number(j, "y")}, wire_number(j, "time")};
  } else if (kind_text == "ACK") {
    base_keys({"of"});
    env.kind = Ack{wire_u64(j, "of")};
  } else if (kind_text == "MEASURE_DATA") {
    base_keys({"records"});
    const auto& records = wire_key(j, "records");
    if (!records.is_array()) parse_fail("field 'records' must be an array");
    MeasureData m;
    for (const auto& r : records) m.records.push_back(record_from_json(r));
    env.kind = std::move(m);
  } else if (kind_text == "CELL_INFO_REPLY") {
    base_keys({"station"});
    const auto& st = wire_key(j, "station");
    if (!st.is_object()) parse_fail("field 'station' must be an object");
    expect_keys(st, {"id", "x", "y", "cid", "antenna"}, "station");
    CellInfoReply reply;
    reply.station.id = wire_u32(st, "id");
    reply.station.position = {wire_number(st, "x"), wire_number(st, "y")};
    reply.station.cell_id = wire_u32(st, "cid");
    const auto& antenna = wire_key(st, "antenna");
    if (!antenna.is_string()) parse_fail("field 'antenna' must be a string");
    reply.station.antenna = antenna.get<std::string>();
    env.kind = std::move(reply);
  } else {
    parse_fail("unknown kind '" + kind_text + "'");
  }
  return env;
}

// ---------------------------------------------------------------------------

bool DedupWindow::check_and_insert(std::uint64_t sender_key, std::uint64_t msg_id) {
  auto& sender = senders_[sender_key];
  if (msg_id <= sender.floor) return false;
  if (!sender.ids.insert(msg_id).second) return false;
  const std::uint64_t max_id = *sender.ids.rbegin();
  if (max_id > window_size && max_id - window_size > sender.floor) {
    sender.floor = max_id - window_size;
    sender.ids.erase(sender.ids.begin(), sender.ids.upper_bound(sender.floor));
  }
  return true;
}

// ---------------------------------------------------------------------------
// Sensor state machine

namespace {

MessageEnvelope sensor_message(SensorState& state, MessageKind kind) {
  MessageEnvelope env;
  env.msg_id = state.next_msg_id++;
  env.from = Sender::sensor(state.id);
  env.kind = std::move(kind);
  return env;
}

} // namespace

SensorStepResult sensor_step(SensorState state, const SensorEvent& event) {
  std::vector<MessageEnvelope> out;

  if (const auto* inbound = std::get_if<InboundMessage>(&event)) {
    const MessageEnvelope& msg = inbound->env;
    if (!msg.from.is_central()) return {std::move(state), {}}; // no peer-to-peer traffic
    if (!state.seen.check_and_insert(central_sender_key, msg.msg_id))
      return {std::move(state), {}}; // duplicate delivery
    out.push_back(sensor_message(state, Ack{msg.msg_id}));

    const bool measuring = state.mode == SensorMode::measuring;
    if (std::holds_alternative<Start>(msg.kind)) {
      state.mode = SensorMode::measuring;
    } else if (std::holds_alternative<Stop>(msg.kind)) {
      state.mode = SensorMode::idle;
      state.plan.clear();
      state.visited = 0;
    } else if (const auto* move = std::get_if<MoveTo>(&msg.kind)) {
      if (measuring) {
        state.plan = {move->target};
        state.visited = 0;
      }
    } else if (const auto* vec = std::get_if<Vector>(&msg.kind)) {
      if (measuring) {
        state.plan = vec->order;
        state.visited = 0;
      }
    } else if (const auto* get = std::get_if<GetMeasure>(&msg.kind)) {
      if (measuring) {
        MeasureData data;
        for (const auto& entry : state.store)
          if (!get->since || entry.seq > *get->since) data.records.push_back(entry.record);
        out.push_back(sensor_message(state, std::move(data)));
      }
    }
    // Remaining kinds (CELL_INFO_REPLY, stray ACKs, ...) are control traffic:
    // acknowledged above, no further behavior.
    return {std::move(state), std::move(out)};
  }

  if (const auto* timer = std::get_if<PositionTimer>(&event)) {
    if (state.mode == SensorMode::measuring)
      out.push_back(sensor_message(state, Position{timer->at, timer->time_s}));
    return {std::move(state), std::move(out)};
  }

  const auto& done = std::get<MeasurementComplete>(event);
  if (state.mode != SensorMode::measuring) return {std::move(state), {}};
  state.store.push_back(SequencedRecord{state.store.size() + 1, done.record});
  if (state.visited < state.plan.size()) ++state.visited;
  if (!state.plan.empty() && state.visited == state.plan.size()) {
    out.push_back(sensor_message(state, ReadyToSend{state.store.size()}));
    state.plan.clear();
    state.visited = 0;
  }
  return {std::move(state), std::move(out)};
}

// ---------------------------------------------------------------------------
// Central state machine

ClosestBs closest_bs_to(const std::vector<BaseStation>& bs_table, const Point2D& position) {
  const BaseStation* best = &bs_table.front();
  double best_d2 = squared_distance(position, best->position);
  for (const auto& bs : bs_table) {
    const double d2 = squared_distance(position, bs.position);
    if (d2 < best_d2 || (d2 == best_d2 && bs.cell_id < best->cell_id)) {
      best_d2 = d2;
      best = &bs;
    }
  }
  return {best->position, best->cell_id};
}

CentralState make_central(const Campaign& campaign) {
  if (campaign.base_stations.empty())
    throw Error("EmptyBsTable", "central needs the static base-station table");
  CentralState state;
  state.bs_table = campaign.base_stations;
  for (const auto& sensor : campaign.sensors) {
    SensorTracking tracking;
    tracking.node = sensor;
    tracking.last_position = sensor.position;
    state.sensors.emplace(sensor.id, std::move(tracking));
  }
  return state;
}

namespace {

AddressedEnvelope central_message(CentralState& state, std::uint32_t to_sensor,
                                  MessageKind kind) {
  MessageEnvelope env;
  env.msg_id = state.next_msg_id++;
  env.from = Sender::central();
  env.closest_bs = closest_bs_to(state.bs_table, state.sensors.at(to_sensor).last_position);
  env.kind = std::move(kind);
  return {to_sensor, std::move(env)};
}

SensorTracking& require_sensor(CentralState& state, std::uint32_t id) {
  auto it = state.sensors.find(id);
  if (it == state.sensors.end())
    throw Error("UnknownSensor", "sensor " + std::to_string(id) + " is not registered");
  return it->second;
}

} // namespace

CentralStepResult central_step(CentralState state, const CentralEvent& event) {
  std::vector<AddressedEnvelope> out;

  if (const auto* inbound = std::get_if<InboundMessage>(&event)) {
    const MessageEnvelope& msg = inbound->env;
    if (msg.from.is_central()) return {std::move(state), {}};
    const std::uint32_t sensor_id = *msg.from.sensor_id;
    SensorTracking& tracking = require_sensor(state, sensor_id);
    if (!state.seen.check_and_insert(sensor_id, msg.msg_id))
      return {std::move(state), {}}; // duplicate delivery

    if (const auto* pos = std::get_if<Position>(&msg.kind)) {
      tracking.last_position = pos->at;
      tracking.last_report_time_s = pos->time_s;
    } else if (std::get_if<ReadyToSend>(&msg.kind)) {
      out.push_back(central_message(state, sensor_id, GetMeasure{}));
    } else if (const auto* data = std::get_if<MeasureData>(&msg.kind)) {
      for (const auto& record : data->records) {
        if (!tracking.collected_point_ids.insert(record.point_id).second)
          continue; // already reported (e.g. partial followed by complete)
        state.collected.push_back(CollectedRecord{sensor_id, record});
        ++tracking.collected_count;
      }
      if (tracking.assigned_count > 0 &&
          tracking.collected_count >= tracking.assigned_count)
        out.push_back(central_message(state, sensor_id, Stop{}));
    } else if (const auto* info = std::get_if<CellInfo>(&msg.kind)) {
      const auto it = std::find_if(state.bs_table.begin(), state.bs_table.end(),
                                   [&](const BaseStation& bs) {
                                     return bs.cell_id == info->cell_id;
                                   });
      if (it != state.bs_table.end())
        out.push_back(central_message(state, sensor_id, CellInfoReply{*it}));
    }
    // ACKs and sensor-bound kinds arriving here are ignored.
    return {std::move(state), std::move(out)};
  }

  if (std::get_if<StartCommand>(&event)) {
    for (const auto& entry : state.sensors)
      out.push_back(central_message(state, entry.first, Start{}));
    return {std::move(state), std::move(out)};
  }

  if (std::get_if<StopCommand>(&event)) {
    for (const auto& entry : state.sensors)
      out.push_back(central_message(state, entry.first, Stop{}));
    return {std::move(state), std::move(out)};
  }

  if (const auto* move = std::get_if<MoveToCommand>(&event)) {
    require_sensor(state, move->sensor_id);
    out.push_back(central_message(state, move->sensor_id, MoveTo{move->target}));
    return {std::move(state), std::move(out)};
  }

  if (const auto* get = std::get_if<GetMeasureCommand>(&event)) {
    require_sensor(state, get->sensor_id);
    out.push_back(central_message(state, get->sensor_id, GetMeasure{get->since}));
    return {std::move(state), std::move(out)};
  }

  const auto& plan = std::get<PlanCommand>(event);
  std::vector<SensorNode> nodes;
  nodes.reserve(state.sensors.size());
  for (const auto& entry : state.sensors) {
    SensorNode node = entry.second.node;
    node.position = entry.second.last_position; // plan from last-known positions
    nodes.push_back(node);
  }
  const auto assignment = dominance::assign_dominances(nodes, plan.points);

  std::map<std::uint32_t, const MeasurementPoint*> by_id;
  for (const auto& point : plan.points) by_id[point.id] = &point;

  state.last_plan_traces.clear();
  for (const auto& [sensor_id, point_ids] : assignment.per_sensor) {
    SensorTracking& tracking = state.sensors.at(sensor_id);
    tracking.assigned_count = point_ids.size();
    tracking.collected_count = 0;
    tracking.collected_point_ids.clear();
    if (point_ids.empty()) {
      // Nothing to measure in this dominance: release the sensor.
      out.push_back(central_message(state, sensor_id, Stop{}));
      continue;
    }

    std::vector<MeasurementPoint> owned;
    owned.reserve(point_ids.size());
    for (const std::uint32_t pid : point_ids) owned.push_back(*by_id.at(pid));

    ga::GAParams params = plan.ga;
    params.seed = derive_seed(plan.ga.seed, sensor_id);
    auto [route, trace] = ga::optimize_route(tracking.last_position, owned, params);
    state.last_plan_traces.emplace(sensor_id, std::move(trace));

    Vector vector;
    vector.order.reserve(route.order.size());
    for (const std::uint32_t pid : route.order) vector.order.push_back(by_id.at(pid)->position);
    out.push_back(central_message(state, sensor_id, std::move(vector)));
  }
  return {std::move(state), std::move(out)};
}

// ---------------------------------------------------------------------------
// Conversation-shape checking

std::map<std::uint32_t, bool> check_conversation_shape(const std::vector<TimedMessage>& trace) {
  // Central messages are attributed to their recipient through the ACK the
  // sensor sends back.
  std::map<std::uint64_t, std::uint32_t> acked_by;
  for (const auto& entry : trace) {
    if (entry.env.from.is_central()) continue;
    if (const auto* ack = std::get_if<Ack>(&entry.env.kind))
      acked_by[ack->of] = *entry.env.from.sensor_id;
  }

  enum Stage { want_start, want_vector, want_ready, want_get, want_data, want_stop, complete };
  std::map<std::uint32_t, Stage> stage;
  std::map<std::uint32_t, bool> saw_vector;

  auto advance = [&](std::uint32_t sensor_id, const MessageKind& kind, bool from_sensor) {
    Stage& s = stage.try_emplace(sensor_id, want_start).first->second;
    switch (s) {
      case want_start:
        if (!from_sensor && std::holds_alternative<Start>(kind)) s = want_vector;
        break;
      case want_vector:
        if (!from_sensor && std::holds_alternative<Vector>(kind)) s = want_ready;
        break;
      case want_ready:
        if (from_sensor && std::holds_alternative<ReadyToSend>(kind)) s = want_get;
        break;
      case want_get:
        if (!from_sensor && std::holds_alternative<GetMeasure>(kind)) s = want_data;
        break;
      case want_data:
        if (from_sensor && std::holds_alternative<MeasureData>(kind)) s = want_stop;
        break;
      case want_stop:
        if (!from_sensor && std::holds_alternative<Stop>(kind)) s = complete;
        break;
      case complete:
        break;
    }
  };

  for (const auto& entry : trace) {
    if (entry.env.from.is_central()) {
      const auto it = acked_by.find(entry.env.msg_id);
      if (it == acked_by.end()) continue; // never delivered or never acked
      if (std::holds_alternative<Vector>(entry.env.kind)) saw_vector[it->second] = true;
      advance(it->second, entry.env.kind, false);
    } else {
      advance(*entry.env.from.sensor_id, entry.env.kind, true);
    }
  }

  std::map<std::uint32_t, bool> result;
  for (const auto& [sensor_id, s] : stage)
    result[sensor_id] = saw_vector[sensor_id] ? (s == complete) : true;
  return result;
}

} // namespace cellsweep::protocol
