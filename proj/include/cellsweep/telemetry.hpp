#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cellsweep/campaign.hpp"

namespace cellsweep::telemetry {

// Parsed GPS fix from a GGA or RMC sentence.
struct NmeaFix {
  double latitude = 0.0;   // decimal degrees, south negative
  double longitude = 0.0;  // decimal degrees, west negative
  double time_utc_s = 0.0; // seconds of day
  int quality = 0;         // GGA fix quality 0..8; RMC: A -> 1, V -> 0
  int satellites = 0;      // GGA satellite count; RMC carries none -> 0

  friend bool operator==(const NmeaFix&, const NmeaFix&) = default;
};

// One sampled record of cell identity and radio quality. Deltas are first
// differences between consecutive samples of the same sensor, filled in by
// apply_deltas, not by the parsers.
struct CellMeasurement {
  std::uint32_t cell_id = 0;
  int timing_advance = 0;
  std::uint16_t mcc = 0;
  std::uint16_t mnc = 0;
  std::uint16_t lac = 0;
  std::optional<double> rssi_dbm;
  std::optional<double> rssi_delta_db;
  std::optional<double> ber_pct;
  std::optional<double> ber_delta_pct;
  std::uint8_t bcc = 0;
  std::uint8_t btcc = 0;
  std::uint8_t ncc = 0;

  friend bool operator==(const CellMeasurement&, const CellMeasurement&) = default;
};

// Parse a `$...*hh` NMEA sentence (GGA and RMC only). The XOR checksum over
// the bytes between `$` and `*` is verified first.
// Throws ChecksumMismatch, UnsupportedSentence, MalformedField.
NmeaFix parse_nmea(std::string_view sentence);

struct CsqReading {
  std::optional<double> rssi_dbm; // -113 + 2n for n in 0..31; 99 -> unknown
  std::optional<double> ber_pct;  // RXQUAL bucket midpoint;   99 -> unknown

  friend bool operator==(const CsqReading&, const CsqReading&) = default;
};

// Parse a `+CSQ: <n>,<m>` response (3GPP AT+CSQ).
// Throws MalformedField, OutOfRange.
CsqReading parse_at_csq(std::string_view line);

// RXQUAL 0..7 assumed BER percentages (3GPP TS 45.008 table of bucket values).
double rxqual_to_ber_pct(int rxqual);

// Parse one SIM-AT pseudo-modem block (lines `cid:`, `ta:`, `mcc:`, `mnc:`,
// `lac:`, `rssi:`, `ber:`, `bcc:`, `btcc:`, `ncc:` terminated by `OK`).
// Throws MissingKey, MalformedField.
CellMeasurement parse_cell_info(std::string_view block);

// Deterministic stand-in for a GSM modem: reports the closest base station
// (ties to lowest cell id), RSSI from a log-distance path-loss model with a
// per-seed offset, and timing advance quantized in 550 m steps.
// Throws EmptyBsTable.
std::string simulated_modem(const Point2D& position,
                            const std::vector<BaseStation>& bs_table,
                            std::uint64_t noise_seed);

// Fill rssi_delta/ber_delta as first differences over a sample stream.
// First sample gets delta 0; deltas stay unset while either side is unknown.
void apply_deltas(std::vector<CellMeasurement>& stream);

} // namespace cellsweep::telemetry
