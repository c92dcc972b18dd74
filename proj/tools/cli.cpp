// cellsweep: batch front end for the measurement-campaign pipeline.
//
// Exit codes: 0 success, 1 domain error (error name on stderr), 2 usage error.

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cellsweep/campaign.hpp"
#include "cellsweep/coverage.hpp"
#include "cellsweep/dominance.hpp"
#include "cellsweep/ga.hpp"
#include "cellsweep/protocol.hpp"
#include "cellsweep/simulator.hpp"
#include "cellsweep/telemetry.hpp"
#include "cellsweep/wire_json.hpp"

using namespace cellsweep;
using nlohmann::ordered_json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit(const std::optional<std::string>& path, const std::string& content) {
  if (path)
    write_text_file(*path, content);
  else
    std::cout << content;
}

struct GaFlags {
  ga::GAParams params;

  void attach(CLI::App* cmd) {
    cmd->add_option("--ga-pop", params.population_size, "GA population size");
    cmd->add_option("--ga-gens", params.generations, "GA generations");
    cmd->add_option("--ga-mut", params.mutation_rate, "GA per-position swap probability");
    cmd->add_option("--ga-elite", params.elite_count, "GA elite count");
  }
};

std::vector<MeasurementPoint> load_points_file(const std::string& path) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("SchemaError", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("points") || !doc["points"].is_array())
    throw Error("SchemaError", "points file must be {\"points\":[...]}");
  std::vector<MeasurementPoint> points;
  for (const auto& p : doc["points"]) {
    if (!p.is_object() || !p.contains("id") || !p.contains("x") || !p.contains("y"))
      throw Error("SchemaError", "point entries need id, x, y");
    MeasurementPoint point;
    point.id = p["id"].get<std::uint32_t>();
    point.position = {p["x"].get<double>(), p["y"].get<double>()};
    points.push_back(std::move(point));
  }
  return points;
}

ordered_json route_to_json(const ga::Route& route) {
  ordered_json j;
  j["start"] = ordered_json{{"x", route.start.x}, {"y", route.start.y}};
  j["order"] = route.order;
  j["length_m"] = route.length_m;
  return j;
}

int run(int argc, char** argv) {
  CLI::App app{"cellular measurement campaign toolkit"};
  app.require_subcommand(1);
  app.fallthrough(); // --seed may follow the subcommand

  std::optional<std::uint64_t> seed_override;
  app.add_option("--seed", seed_override, "override the campaign seed everywhere");

  // --- partition -----------------------------------------------------------
  auto* partition = app.add_subcommand("partition", "assign points to sensors by dominance");
  std::string partition_campaign;
  std::optional<std::string> partition_out, partition_polygons;
  partition->add_option("--campaign", partition_campaign, "campaign config JSON")->required();
  partition->add_option("--out", partition_out, "assignment CSV path (default stdout)");
  partition->add_option("--polygons", partition_polygons, "GeoJSON cell polygons path");

  // --- route ---------------------------------------------------------------
  auto* route_cmd = app.add_subcommand("route", "GA-optimize one visiting route");
  std::optional<std::string> route_points_path;
  std::optional<std::size_t> route_n;
  double route_area_w = 50000.0, route_area_h = 50000.0;
  double route_start_x = 0.0, route_start_y = 0.0;
  std::optional<std::string> route_out, route_trace_out;
  GaFlags route_ga;
  route_cmd->add_option("--points", route_points_path, "points file {\"points\":[...]}");
  route_cmd->add_option("--n", route_n, "use n random points (or first n of --points)");
  route_cmd->add_option("--area", route_area_w, "area width in meters for random points");
  route_cmd->add_option("--area-h", route_area_h, "area height in meters for random points");
  route_cmd->add_option("--start-x", route_start_x, "route start x");
  route_cmd->add_option("--start-y", route_start_y, "route start y");
  route_cmd->add_option("--out", route_out, "route JSON path (default stdout)");
  route_cmd->add_option("--trace-out", route_trace_out, "convergence CSV path");
  route_ga.attach(route_cmd);

  // --- simulate --------------------------------------------------------------
  auto* simulate = app.add_subcommand("simulate", "run a full measurement campaign");
  std::string sim_campaign;
  std::string sim_mode = "k";
  std::string sim_format = "json";
  double sim_dwell = 0.0, sim_latency = 0.0;
  std::optional<std::string> sim_out, sim_trace;
  GaFlags sim_ga;
  simulate->add_option("--campaign", sim_campaign, "campaign config JSON")->required();
  simulate->add_option("--mode", sim_mode, "k | single | both")
      ->check(CLI::IsMember({"k", "single", "both"}));
  simulate->add_option("--format", sim_format, "json | csv")
      ->check(CLI::IsMember({"json", "csv"}));
  simulate->add_option("--dwell", sim_dwell, "per-point dwell time in seconds");
  simulate->add_option("--latency", sim_latency, "one-way message latency in seconds");
  simulate->add_option("--out", sim_out, "report path (default stdout)");
  simulate->add_option("--trace", sim_trace, "message trace path");
  sim_ga.attach(simulate);

  // --- sweep -----------------------------------------------------------------
  auto* sweep_cmd = app.add_subcommand("sweep", "run a campaign grid over (n, k, rep)");
  std::vector<std::size_t> sweep_ns, sweep_ks;
  std::uint32_t sweep_reps = 1;
  double sweep_area_w = 50000.0, sweep_area_h = 50000.0, sweep_speed = 30.0;
  int sweep_jobs = 1;
  std::optional<std::string> sweep_out, sweep_conv_out;
  GaFlags sweep_ga;
  sweep_cmd->add_option("--ns", sweep_ns, "point counts")->required()->delimiter(',');
  sweep_cmd->add_option("--ks", sweep_ks, "sensor counts")->required()->delimiter(',');
  sweep_cmd->add_option("--reps", sweep_reps, "repetitions per cell");
  sweep_cmd->add_option("--area", sweep_area_w, "area width in meters");
  sweep_cmd->add_option("--area-h", sweep_area_h, "area height in meters");
  sweep_cmd->add_option("--speed-kmh", sweep_speed, "sensor speed in km/h");
  sweep_cmd->add_option("--jobs", sweep_jobs, "parallel repetitions");
  sweep_cmd->add_option("--out", sweep_out, "summary CSV path (default stdout)");
  sweep_cmd->add_option("--convergence-out", sweep_conv_out, "per-generation CSV path");
  sweep_ga.attach(sweep_cmd);

  // --- parsers ---------------------------------------------------------------
  auto* parse_nmea_cmd = app.add_subcommand("parse-nmea", "parse NMEA sentences to fixes");
  std::optional<std::string> nmea_in;
  parse_nmea_cmd->add_option("--in", nmea_in, "input file (default stdin)");

  auto* parse_cell_cmd = app.add_subcommand("parse-cell", "parse one SIM-AT cell block");
  std::optional<std::string> cell_in;
  parse_cell_cmd->add_option("--in", cell_in, "input file (default stdin)");

  // --- rasterize ---------------------------------------------------------------
  auto* rasterize_cmd = app.add_subcommand("rasterize", "grid the measurements of a report");
  std::string raster_report, raster_campaign;
  double raster_cell = 250.0;
  std::optional<std::string> raster_out, raster_pgm, raster_mask;
  rasterize_cmd->add_option("--report", raster_report, "simulate report JSON")->required();
  rasterize_cmd->add_option("--campaign", raster_campaign, "campaign config (grid extent)")
      ->required();
  rasterize_cmd->add_option("--cell", raster_cell, "grid cell size in meters");
  rasterize_cmd->add_option("--out", raster_out, "grid CSV path (default stdout)");
  rasterize_cmd->add_option("--pgm", raster_pgm, "grayscale PGM path");
  rasterize_cmd->add_option("--mask", raster_mask, "sample mask CSV path");

  // --- select-points -----------------------------------------------------------
  auto* select = app.add_subcommand("select-points", "verification points on the frontier");
  std::string select_pred, select_demand;
  std::string select_format = "json";
  std::optional<std::string> select_out;
  select->add_option("--pred", select_pred, "predicted coverage CSV")->required();
  select->add_option("--demand", select_demand, "demand node map CSV")->required();
  select->add_option("--format", select_format, "json | csv")
      ->check(CLI::IsMember({"json", "csv"}));
  select->add_option("--out", select_out, "output path (default stdout)");

  // --- trace-replay --------------------------------------------------------------
  auto* replay = app.add_subcommand("trace-replay", "validate an exported message trace");
  std::string replay_in;
  replay->add_option("--in", replay_in, "trace file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (partition->parsed()) {
    Campaign campaign = load_campaign(partition_campaign);
    if (seed_override) campaign.seed = *seed_override;
    const auto assignment = dominance::assign_dominances(campaign.sensors, campaign.points);
    emit(partition_out, dominance::assignment_to_csv(assignment));
    if (partition_polygons)
      write_text_file(*partition_polygons,
                      dominance::polygons_to_geojson(
                          dominance::dominance_polygons(campaign.sensors, campaign.area)));
    return 0;
  }

  if (route_cmd->parsed()) {
    if (route_n && *route_n == 0) throw UsageError("--n must be at least 1");
    std::vector<MeasurementPoint> points;
    if (route_points_path) {
      points = load_points_file(*route_points_path);
      if (route_n) {
        if (*route_n > points.size())
          throw UsageError("--n exceeds the points in " + *route_points_path);
        points.resize(*route_n);
      }
    } else if (route_n) {
      points = sim::generate_points(*route_n, {route_area_w, route_area_h},
                                    seed_override.value_or(0));
    } else {
      throw UsageError("route needs --points or --n");
    }
    if (points.empty()) throw UsageError("no points to route");

    ga::GAParams params = route_ga.params;
    params.seed = seed_override.value_or(0);
    const auto [route, trace] =
        ga::optimize_route({route_start_x, route_start_y}, points, params);
    emit(route_out, route_to_json(route).dump(2) + "\n");
    if (route_trace_out) write_text_file(*route_trace_out, ga::trace_to_csv(trace));
    return 0;
  }

  if (simulate->parsed()) {
    Campaign campaign = load_campaign(sim_campaign);
    if (seed_override) campaign.seed = *seed_override;
    ga::GAParams params = sim_ga.params;
    sim::SimConfig config;
    config.dwell_s = sim_dwell;
    config.latency_s = sim_latency;

    if (sim_mode == "both") {
      if (sim_format == "csv")
        throw UsageError("--format csv needs --mode k or --mode single");
      const auto kept = sim::run_campaign(campaign, params, sim::Mode::k_as_configured, config);
      const auto single =
          sim::run_campaign(campaign, params, sim::Mode::force_single_sensor, config);
      ordered_json j;
      j["k_as_configured"] = ordered_json::parse(sim::report_to_json(kept));
      j["force_single_sensor"] = ordered_json::parse(sim::report_to_json(single));
      j["comparison"] = ordered_json{
          {"overall_time_k_s", kept.overall_time_s},
          {"overall_time_single_s", single.overall_time_s},
          {"time_ratio", single.overall_time_s > 0.0
                             ? kept.overall_time_s / single.overall_time_s
                             : 0.0}};
      emit(sim_out, j.dump(2) + "\n");
      if (sim_trace) write_text_file(*sim_trace, sim::trace_to_text(kept.trace));
      return 0;
    }

    const sim::Mode mode =
        sim_mode == "single" ? sim::Mode::force_single_sensor : sim::Mode::k_as_configured;
    const auto report = sim::run_campaign(campaign, params, mode, config);
    emit(sim_out, sim_format == "csv" ? sim::report_times_to_csv(report)
                                      : sim::report_to_json(report));
    if (sim_trace) write_text_file(*sim_trace, sim::trace_to_text(report.trace));
    return 0;
  }

  if (sweep_cmd->parsed()) {
    sim::SweepConfig config;
    config.area = {sweep_area_w, sweep_area_h};
    config.speed_kmh = sweep_speed;
    config.ga = sweep_ga.params;
    config.jobs = sweep_jobs;
    const auto rows =
        sim::sweep(sweep_ns, sweep_ks, sweep_reps, seed_override.value_or(42), config);
    emit(sweep_out, sim::sweep_to_csv(rows));
    if (sweep_conv_out) write_text_file(*sweep_conv_out, sim::sweep_convergence_to_csv(rows));
    return 0;
  }

  if (parse_nmea_cmd->parsed()) {
    std::istringstream file_input;
    std::istream* in = &std::cin;
    if (nmea_in) {
      file_input.str(read_text_file(*nmea_in));
      in = &file_input;
    }
    std::string line;
    std::string out;
    while (std::getline(*in, line)) {
      if (line.empty()) continue;
      const telemetry::NmeaFix fix = telemetry::parse_nmea(line);
      out += ordered_json{{"latitude", fix.latitude},
                          {"longitude", fix.longitude},
                          {"time_utc_s", fix.time_utc_s},
                          {"quality", fix.quality},
                          {"satellites", fix.satellites}}
                 .dump() +
             "\n";
    }
    std::cout << out;
    return 0;
  }

  if (parse_cell_cmd->parsed()) {
    std::string block;
    if (cell_in) {
      block = read_text_file(*cell_in);
    } else {
      std::ostringstream buffer;
      buffer << std::cin.rdbuf();
      block = buffer.str();
    }
    const telemetry::CellMeasurement cell = telemetry::parse_cell_info(block);
    std::cout << protocol::cell_to_json(cell).dump() << "\n";
    return 0;
  }

  if (rasterize_cmd->parsed()) {
    const Campaign campaign = load_campaign(raster_campaign);
    const ordered_json doc = ordered_json::parse(read_text_file(raster_report));
    if (!doc.contains("records") || !doc["records"].is_array())
      throw Error("SchemaError", "report has no records array");
    std::vector<protocol::MeasurementRecord> records;
    for (const auto& entry : doc["records"])
      records.push_back(protocol::record_from_json(entry.at("record")));
    const auto geom = coverage::geometry_for_area(campaign.area, raster_cell);
    const auto grid = coverage::rasterize(records, geom);
    emit(raster_out, coverage::grid_to_csv(grid));
    if (raster_pgm) write_text_file(*raster_pgm, coverage::grid_to_pgm(grid));
    if (raster_mask) write_text_file(*raster_mask, coverage::mask_to_csv(grid));
    return 0;
  }

  if (select->parsed()) {
    const auto [pred_geom, pred_cells] = coverage::parse_bool_grid(read_text_file(select_pred));
    const auto [demand_geom, demand_cells] =
        coverage::parse_bool_grid(read_text_file(select_demand));
    const auto points = coverage::select_verification_points({pred_geom, pred_cells},
                                                             {demand_geom, demand_cells});
    if (select_format == "csv") {
      std::string csv = "id,x,y\n";
      for (const auto& p : points)
        csv += std::to_string(p.id) + "," + ordered_json(p.position.x).dump() + "," +
               ordered_json(p.position.y).dump() + "\n";
      emit(select_out, csv);
    } else {
      auto arr = ordered_json::array();
      for (const auto& p : points)
        arr.push_back(ordered_json{{"id", p.id}, {"x", p.position.x}, {"y", p.position.y}});
      emit(select_out, ordered_json{{"points", std::move(arr)}}.dump(2) + "\n");
    }
    return 0;
  }

  // trace-replay
  const std::string text = read_text_file(replay_in);
  std::vector<protocol::TimedMessage> trace;
  std::size_t offset = 0;
  double last_time = 0.0;
  while (offset < text.size()) {
    std::size_t end = text.find('\n', offset);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(offset, end - offset);
    offset = end + 1;
    if (line.empty()) continue;
    const std::size_t space = line.find(' ');
    if (space == std::string::npos)
      throw ParseError(offset - line.size(), "trace line lacks a time prefix");
    const double time = std::stod(line.substr(0, space));
    if (!trace.empty() && time < last_time)
      throw Error("ClockRegression", "trace times must be non-decreasing");
    last_time = time;
    trace.push_back({time, protocol::decode(line.substr(space + 1))});
  }

  const auto shape = protocol::check_conversation_shape(trace);
  std::cout << "messages: " << trace.size() << "\n";
  bool all_ok = true;
  for (const auto& [sensor_id, ok] : shape) {
    std::cout << "sensor " << sensor_id << ": conversation "
              << (ok ? "complete" : "incomplete") << "\n";
    all_ok = all_ok && ok;
  }
  if (!all_ok) throw Error("ConversationShape", "incomplete campaign conversation");
  std::cout << "trace OK\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
