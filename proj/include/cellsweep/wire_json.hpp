#pragma once

// JSON building blocks shared by the wire codec, the report writer, and the
// CLI. Kept out of protocol.hpp so that header stays json-free.

#include <json.hpp>

#include "cellsweep/protocol.hpp"

namespace cellsweep::protocol {

nlohmann::ordered_json cell_to_json(const telemetry::CellMeasurement& cell);
telemetry::CellMeasurement cell_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json record_to_json(const MeasurementRecord& record);
MeasurementRecord record_from_json(const nlohmann::ordered_json& j);

} // namespace cellsweep::protocol
