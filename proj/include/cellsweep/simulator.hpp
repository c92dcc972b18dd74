#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cellsweep/campaign.hpp"
#include "cellsweep/ga.hpp"
#include "cellsweep/protocol.hpp"

namespace cellsweep::sim {

// Scheduled simulator event. Events at equal times execute in scheduling order.
struct MessageDelivery {
  std::optional<std::uint32_t> to_sensor; // empty = to central
  protocol::MessageEnvelope env;
};
struct ArrivalAtPoint {
  std::uint32_t sensor_id = 0;
  std::size_t plan_index = 0;
};
struct MeasurementDone {
  std::uint32_t sensor_id = 0;
  std::size_t plan_index = 0;
};
struct PositionTimerTick {
  std::uint32_t sensor_id = 0;
};

struct SimEvent {
  double time_s = 0.0;
  std::variant<MessageDelivery, ArrivalAtPoint, MeasurementDone, PositionTimerTick> kind;
};

struct SimConfig {
  double dwell_s = 0.0;            // per-point measurement time
  double latency_s = 0.0;          // fixed one-way message delay
  double position_period_s = 10.0; // POSITION report period
  ga::EvalMode eval_mode = ga::EvalMode::serial;
};

enum class Mode { k_as_configured, force_single_sensor };

struct TraceEntry {
  double time_s = 0.0;
  std::optional<std::uint32_t> to_sensor; // empty = to central
  protocol::MessageEnvelope env;
};

struct CampaignReport {
  std::map<std::uint32_t, double> per_sensor_time_s; // plan receipt -> last measurement
  double overall_time_s = 0.0;                       // max over sensors
  std::map<std::uint32_t, double> total_distance_m;
  std::vector<protocol::CollectedRecord> records;
  std::vector<TraceEntry> trace;
  std::map<std::uint32_t, ga::ConvergenceTrace> convergence;
};

// n i.i.d. uniform points over the area, ids 1..n, deterministic per seed.
std::vector<MeasurementPoint> generate_points(std::size_t n, const AreaSize& area,
                                              std::uint64_t seed);

// Full campaign run: freeze dominances, optimize per-sensor routes, drive the
// central/sensor protocol over a deterministic event queue, measure each point
// through the simulated modem. Deterministic per campaign seed.
CampaignReport run_campaign(const Campaign& campaign, const ga::GAParams& ga_params,
                            Mode mode, const SimConfig& config = {});

struct SweepRow {
  std::size_t n_points = 0;
  std::size_t k_sensors = 0;
  std::uint32_t rep = 0;
  double overall_time_s = 0.0;
  std::map<std::uint32_t, ga::ConvergenceTrace> convergence;
};

struct SweepConfig {
  AreaSize area{50000.0, 50000.0};
  double speed_kmh = 30.0;
  ga::GAParams ga;
  SimConfig sim;
  int jobs = 1; // repetitions may run in parallel; output order is fixed
};

// Campaign grid over (ns x ks x repetitions); each cell runs an independent
// seeded campaign. Rows come back in (n, k, rep) order regardless of jobs.
std::vector<SweepRow> sweep(const std::vector<std::size_t>& ns,
                            const std::vector<std::size_t>& ks,
                            std::uint32_t repetitions, std::uint64_t base_seed,
                            const SweepConfig& config);

// Deterministic campaign for one sweep cell (exposed for tests and the CLI).
Campaign make_sweep_campaign(std::size_t n, std::size_t k, std::uint64_t seed,
                             const AreaSize& area, double speed_kmh);

std::string report_to_json(const CampaignReport& report);
std::string report_times_to_csv(const CampaignReport& report); // sensor_id,distance_m,time_s
std::string trace_to_text(const std::vector<TraceEntry>& trace); // "<time_s> <wire line>"
std::string sweep_to_csv(const std::vector<SweepRow>& rows);     // n,k,rep,overall_time_s
std::string sweep_convergence_to_csv(const std::vector<SweepRow>& rows);

} // namespace cellsweep::sim
