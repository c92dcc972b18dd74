#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cellsweep/campaign.hpp"
#include "cellsweep/ga.hpp"
#include "cellsweep/telemetry.hpp"

namespace cellsweep::protocol {

// ---------------------------------------------------------------------------
// Messages

struct MeasurementRecord {
  std::uint32_t point_id = 0;
  Point2D position;
  double time_s = 0.0;
  telemetry::CellMeasurement cell;

  friend bool operator==(const MeasurementRecord&, const MeasurementRecord&) = default;
};

struct Start {
  friend bool operator==(const Start&, const Start&) = default;
};
struct Stop {
  friend bool operator==(const Stop&, const Stop&) = default;
};
struct MoveTo {
  Point2D target;
  friend bool operator==(const MoveTo&, const MoveTo&) = default;
};
// COMPLETE when `since` is empty; PARTIAL asks for records with sequence > since.
struct GetMeasure {
  std::optional<std::uint64_t> since;
  friend bool operator==(const GetMeasure&, const GetMeasure&) = default;
};
struct Vector {
  std::vector<Point2D> order; // non-empty
  friend bool operator==(const Vector&, const Vector&) = default;
};
struct ReadyToSend {
  std::uint64_t count = 0;
  friend bool operator==(const ReadyToSend&, const ReadyToSend&) = default;
};
struct CellInfo {
  std::uint32_t cell_id = 0;
  friend bool operator==(const CellInfo&, const CellInfo&) = default;
};
struct Position {
  Point2D at;
  double time_s = 0.0;
  friend bool operator==(const Position&, const Position&) = default;
};
struct Ack {
  std::uint64_t of = 0;
  friend bool operator==(const Ack&, const Ack&) = default;
};
struct MeasureData {
  std::vector<MeasurementRecord> records;
  friend bool operator==(const MeasureData&, const MeasureData&) = default;
};
struct CellInfoReply {
  BaseStation station;
  friend bool operator==(const CellInfoReply&, const CellInfoReply&) = default;
};

using MessageKind = std::variant<Start, Stop, MoveTo, GetMeasure, Vector,
                                 ReadyToSend, CellInfo, Position, Ack,
                                 MeasureData, CellInfoReply>;

const char* kind_name(const MessageKind& kind);

struct Sender {
  std::optional<std::uint32_t> sensor_id; // empty = central

  static Sender central() { return {}; }
  static Sender sensor(std::uint32_t id) { return {id}; }
  bool is_central() const { return !sensor_id.has_value(); }

  friend bool operator==(const Sender&, const Sender&) = default;
};

struct ClosestBs {
  Point2D position;
  std::uint32_t cell_id = 0;
  friend bool operator==(const ClosestBs&, const ClosestBs&) = default;
};

// Wire envelope. closest_bs is mandatory on central messages and forbidden on
// sensor messages; encode() and decode() both enforce that.
struct MessageEnvelope {
  std::uint64_t msg_id = 0;
  Sender from;
  std::optional<ClosestBs> closest_bs;
  MessageKind kind;

  friend bool operator==(const MessageEnvelope&, const MessageEnvelope&) = default;
};

// One line of UTF-8 JSON per the wire grammar, newline-terminated.
// Throws InvalidEnvelope if the envelope breaks an invariant.
std::string encode(const MessageEnvelope& env);

// Strict inverse of encode. Unknown kinds, missing or extra fields, and
// closest_bs violations are all rejected. Throws ParseError.
MessageEnvelope decode(std::string_view line);

// ---------------------------------------------------------------------------
// Duplicate suppression

// Sliding window of the last 1024 message ids per sender key. Ids at or below
// the pruned floor count as already seen.
class DedupWindow {
public:
  // Inserts and returns true when the id is new; false for duplicates.
  bool check_and_insert(std::uint64_t sender_key, std::uint64_t msg_id);

  static constexpr std::uint64_t window_size = 1024;

  friend bool operator==(const DedupWindow&, const DedupWindow&) = default;

private:
  struct PerSender {
    std::set<std::uint64_t> ids;
    std::uint64_t floor = 0; // ids <= floor are assumed seen
    friend bool operator==(const PerSender&, const PerSender&) = default;
  };
  std::map<std::uint64_t, PerSender> senders_;
};

// ---------------------------------------------------------------------------
// Sensor state machine

enum class SensorMode { idle, measuring };

struct SequencedRecord {
  std::uint64_t seq = 0; // 1-based append index, the GET_MEASURE cursor
  MeasurementRecord record;
  friend bool operator==(const SequencedRecord&, const SequencedRecord&) = default;
};

struct SensorState {
  std::uint32_t id = 0;
  SensorMode mode = SensorMode::idle;
  std::vector<Point2D> plan;       // remaining positions to visit
  std::size_t visited = 0;         // completed measurements in current plan
  std::vector<SequencedRecord> store;
  std::uint64_t next_msg_id = 1;
  DedupWindow seen;

  friend bool operator==(const SensorState&, const SensorState&) = default;
};

struct InboundMessage {
  MessageEnvelope env;
};
struct PositionTimer {
  double time_s = 0.0;
  Point2D at; // current GPS fix, supplied by the platform
};
struct MeasurementComplete {
  MeasurementRecord record;
};

using SensorEvent = std::variant<InboundMessage, PositionTimer, MeasurementComplete>;

struct SensorStepResult {
  SensorState state;
  std::vector<MessageEnvelope> out;
};

// Pure transition. START/STOP switch modes, MOVE_TO/VECTOR set the plan,
// GET_MEASURE answers from the store, the position timer emits POSITION, and
// every inbound central message is ACKed. Duplicates are dropped silently.
SensorStepResult sensor_step(SensorState state, const SensorEvent& event);

// ---------------------------------------------------------------------------
// Central state machine

struct SensorTracking {
  SensorNode node;          // static registration info
  Point2D last_position;    // initial position until the first POSITION report
  std::optional<double> last_report_time_s;
  std::size_t assigned_count = 0;  // points planned for this sensor
  std::size_t collected_count = 0; // records received back
  std::set<std::uint32_t> collected_point_ids;
  friend bool operator==(const SensorTracking&, const SensorTracking&) = default;
};

struct CollectedRecord {
  std::uint32_t sensor_id = 0;
  MeasurementRecord record;
  friend bool operator==(const CollectedRecord&, const CollectedRecord&) = default;
};

struct CentralState {
  std::vector<BaseStation> bs_table;
  std::map<std::uint32_t, SensorTracking> sensors;
  std::uint64_t next_msg_id = 1;
  DedupWindow seen;
  std::vector<CollectedRecord> collected;
  std::map<std::uint32_t, ga::ConvergenceTrace> last_plan_traces;

  friend bool operator==(const CentralState&, const CentralState&) = default;
};

// Registers every campaign sensor with its initial position.
// Throws EmptyBsTable: the closest-BS annotation needs at least one station.
CentralState make_central(const Campaign& campaign);

// Closest BS to a position, ties to lowest cell_id.
ClosestBs closest_bs_to(const std::vector<BaseStation>& bs_table, const Point2D& position);

// Operator commands.
struct StartCommand {};
struct StopCommand {};
// Partition the points by dominance and GA-optimize each sensor's route; one
// VECTOR per non-empty sensor. Per-sensor GA seeds derive from (ga.seed, id).
struct PlanCommand {
  std::vector<MeasurementPoint> points;
  ga::GAParams ga;
};
struct MoveToCommand {
  std::uint32_t sensor_id = 0;
  Point2D target;
};
struct GetMeasureCommand {
  std::uint32_t sensor_id = 0;
  std::optional<std::uint64_t> since;
};

using CentralEvent = std::variant<InboundMessage, StartCommand, StopCommand,
                                  PlanCommand, MoveToCommand, GetMeasureCommand>;

struct AddressedEnvelope {
  std::uint32_t to_sensor = 0;
  MessageEnvelope env;
};

struct CentralStepResult {
  CentralState state;
  std::vector<AddressedEnvelope> out;
};

// Pure transition. POSITION updates the sensor's last-known position (and so
// its closest-BS annotation), READY_TO_SEND is answered with a complete
// GET_MEASURE, MEASURE_DATA is collected and followed by STOP once the
// sensor's plan is fully reported. Throws UnknownSensor.
CentralStepResult central_step(CentralState state, const CentralEvent& event);

// ---------------------------------------------------------------------------
// Conversation-shape checking

// A decoded message trace: delivery time plus envelope, in delivery order.
struct TimedMessage {
  double time_s = 0.0;
  MessageEnvelope env;
};

// Verifies that, for every sensor that was sent a VECTOR, the trace contains
// the subsequence START -> VECTOR -> READY_TO_SEND -> GET_MEASURE ->
// MEASURE_DATA -> STOP. Central messages are attributed to sensors through
// their ACKs. Returns the per-sensor result map.
std::map<std::uint32_t, bool> check_conversation_shape(const std::vector<TimedMessage>& trace);

} // namespace cellsweep::protocol
