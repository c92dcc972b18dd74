#include "cellsweep/telemetry.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "cellsweep/error.hpp"
#include "cellsweep/rng.hpp"

namespace cellsweep::telemetry {

namespace {

std::string_view trim_line_end(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n' || s.back() == ' '))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t begin = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      parts.push_back(s.substr(begin, i - begin));
      begin = i + 1;
    }
  }
  return parts;
}

long parse_int_field(std::string_view fragment, const char* what) {
  long value = 0;
  const auto [ptr, ec] =
      std::from_chars(fragment.data(), fragment.data() + fragment.size(), value);
  if (ec != std::errc{} || ptr != fragment.data() + fragment.size())
    throw Error("MalformedField", std::string(what) + ": '" + std::string(fragment) + "'");
  return value;
}

double parse_double_field(std::string_view fragment, const char* what) {
  const std::string text(fragment);
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || text.empty())
    throw Error("MalformedField", std::string(what) + ": '" + text + "'");
  return value;
}

// ddmm.mmmm (or dddmm.mmmm) to signed decimal degrees.
double parse_angle(std::string_view field, std::string_view hemi, char positive,
                   char negative, double limit, const char* what) {
  const std::size_t dot = field.find('.');
  const std::size_t min_start = (dot == std::string_view::npos ? field.size() : dot);
  if (min_start < 3) throw Error("MalformedField", std::string(what) + ": '" + std::string(field) + "'");
  const double degrees = static_cast<double>(parse_int_field(field.substr(0, min_start - 2), what));
  const double minutes = parse_double_field(field.substr(min_start - 2), what);
  if (minutes >= 60.0)
    throw Error("MalformedField", std::string(what) + ": minutes out of range");
  double value = degrees + minutes / 60.0;
  if (hemi.size() != 1 || (hemi[0] != positive && hemi[0] != negative))
    throw Error("MalformedField", std::string(what) + " hemisphere: '" + std::string(hemi) + "'");
  if (hemi[0] == negative) value = -value;
  if (std::abs(value) > limit)
    throw Error("MalformedField", std::string(what) + " out of range");
  return value;
}

double parse_utc_time(std::string_view field) {
  if (field.size() < 6) throw Error("MalformedField", "time: '" + std::string(field) + "'");
  const long hh = parse_int_field(field.substr(0, 2), "time hours");
  const long mm = parse_int_field(field.substr(2, 2), "time minutes");
  const double ss = parse_double_field(field.substr(4), "time seconds");
  if (hh > 23 || mm > 59 || ss >= 60.0) throw Error("MalformedField", "time out of range");
  return 3600.0 * static_cast<double>(hh) + 60.0 * static_cast<double>(mm) + ss;
}

} // namespace

NmeaFix parse_nmea(std::string_view sentence) {
  const std::string_view line = trim_line_end(sentence);
  if (line.size() < 4 || line.front() != '$')
    throw Error("MalformedField", "sentence must start with '$'");
  const std::size_t star = line.rfind('*');
  if (star == std::string_view::npos || star + 3 != line.size())
    throw Error("MalformedField", "missing '*hh' checksum");

  unsigned computed = 0;
  for (std::size_t i = 1; i < star; ++i) computed ^= static_cast<unsigned char>(line[i]);
  unsigned transmitted = 0;
  const auto hex = line.substr(star + 1, 2);
  const auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + 2, transmitted, 16);
  if (ec != std::errc{} || ptr != hex.data() + 2)
    throw Error("MalformedField", "checksum digits: '" + std::string(hex) + "'");
  if (computed != transmitted)
    throw Error("ChecksumMismatch", "computed " + std::to_string(computed) + ", sentence says " +
                                        std::to_string(transmitted));

  const auto fields = split(line.substr(1, star - 1), ',');
  const std::string_view name = fields[0];
  if (name.size() < 5)
    throw Error("UnsupportedSentence", "'" + std::string(name) + "'");
  const std::string_view type = name.substr(name.size() - 3);

  NmeaFix fix;
  if (type == "GGA") {
    if (fields.size() < 8) throw Error("MalformedField", "GGA needs at least 7 fields");
    fix.time_utc_s = parse_utc_time(fields[1]);
    fix.latitude = parse_angle(fields[2], fields[3], 'N', 'S', 90.0, "latitude");
    fix.longitude = parse_angle(fields[4], fields[5], 'E', 'W', 180.0, "longitude");
    const long quality = parse_int_field(fields[6], "fix quality");
    if (quality < 0 || quality > 8) throw Error("MalformedField", "fix quality out of range");
    fix.quality = static_cast<int>(quality);
    const long sats = parse_int_field(fields[7], "satellite count");
    if (sats < 0) throw Error("MalformedField", "satellite count negative");
    fix.satellites = static_cast<int>(sats);
  } else if (type == "RMC") {
    if (fields.size() < 7) throw Error("MalformedField", "RMC needs at least 6 fields");
    fix.time_utc_s = parse_utc_time(fields[1]);
    if (fields[2] == "A")
      fix.quality = 1;
    else if (fields[2] == "V")
      fix.quality = 0;
    else
      throw Error("MalformedField", "RMC status: '" + std::string(fields[2]) + "'");
    fix.latitude = parse_angle(fields[3], fields[4], 'N', 'S', 90.0, "latitude");
    fix.longitude = parse_angle(fields[5], fields[6], 'E', 'W', 180.0, "longitude");
    fix.satellites = 0; // RMC carries no satellite count
  } else {
    throw Error("UnsupportedSentence", "'" + std::string(name) + "'");
  }
  return fix;
}

double rxqual_to_ber_pct(int rxqual) {
  // Assumed BER values for RXQUAL_0..7, in percent.
  static constexpr std::array<double, 8> table{0.14, 0.28, 0.57, 1.13,
                                               2.26, 4.53, 9.05, 18.10};
  if (rxqual < 0 || rxqual > 7)
    throw Error("OutOfRange", "RXQUAL " + std::to_string(rxqual));
  return table[static_cast<std::size_t>(rxqual)];
}

CsqReading parse_at_csq(std::string_view line) {
  std::string_view rest = trim_line_end(line);
  constexpr std::string_view prefix = "+CSQ:";
  if (rest.substr(0, prefix.size()) != prefix)
    throw Error("MalformedField", "expected '+CSQ:' response");
  rest.remove_prefix(prefix.size());
  while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
  const auto parts = split(rest, ',');
  if (parts.size() != 2) throw Error("MalformedField", "expected '+CSQ: <n>,<m>'");
  const long n = parse_int_field(parts[0], "rssi code");
  const long m = parse_int_field(parts[1], "ber code");

  CsqReading reading;
  if (n == 99)
    reading.rssi_dbm = std::nullopt;
  else if (n >= 0 && n <= 31)
    reading.rssi_dbm = -113.0 + 2.0 * static_cast<double>(n);
  else
    throw Error("OutOfRange", "rssi code " + std::to_string(n));

  if (m == 99)
    reading.ber_pct = std::nullopt;
  else if (m >= 0 && m <= 7)
    reading.ber_pct = rxqual_to_ber_pct(static_cast<int>(m));
  else
    throw Error("OutOfRange", "ber code " + std::to_string(m));
  return reading;
}

CellMeasurement parse_cell_info(std::string_view block) {
  bool terminated = false;
  std::array<bool, 10> present{};
  enum Key { kCid, kTa, kMcc, kMnc, kLac, kRssi, kBer, kBcc, kBtcc, kNcc };
  static constexpr std::array<std::string_view, 10> names{
      "cid", "ta", "mcc", "mnc", "lac", "rssi", "ber", "bcc", "btcc", "ncc"};

  CellMeasurement cell;
  for (std::string_view raw : split(block, '\n')) {
    const std::string_view line = trim_line_end(raw);
    if (line.empty()) continue;
    if (terminated)
      throw Error("MalformedField", "content after OK terminator");
    if (line == "OK") {
      terminated = true;
      continue;
    }
    const std::size_t colon = line.find(':');
    if (colon == std::string_view::npos)
      throw Error("MalformedField", "expected 'key:value', got '" + std::string(line) + "'");
    const std::string_view key = line.substr(0, colon);
    const std::string_view value = line.substr(colon + 1);

    const auto it = std::find(names.begin(), names.end(), key);
    if (it == names.end())
      throw Error("MalformedField", "unknown key '" + std::string(key) + "'");
    const auto which = static_cast<Key>(it - names.begin());
    if (present[which])
      throw Error("MalformedField", "duplicate key '" + std::string(key) + "'");
    present[which] = true;

    switch (which) {
      case kCid: {
        const long v = parse_int_field(value, "cid");
        if (v < 0 || v > 0xffffffffL) throw Error("MalformedField", "cid out of range");
        cell.cell_id = static_cast<std::uint32_t>(v);
        break;
      }
      case kTa: {
        const long v = parse_int_field(value, "ta");
        if (v < 0 || v > 255) throw Error("MalformedField", "ta out of range");
        cell.timing_advance = static_cast<int>(v);
        break;
      }
      case kMcc: {
        const long v = parse_int_field(value, "mcc");
        if (v < 0 || v > 999) throw Error("MalformedField", "mcc out of range");
        cell.mcc = static_cast<std::uint16_t>(v);
        break;
      }
      case kMnc: {
        const long v = parse_int_field(value, "mnc");
        if (v < 0 || v > 999) throw Error("MalformedField", "mnc out of range");
        cell.mnc = static_cast<std::uint16_t>(v);
        break;
      }
      case kLac: {
        const long v = parse_int_field(value, "lac");
        if (v < 0 || v > 0xffffL) throw Error("MalformedField", "lac out of range");
        cell.lac = static_cast<std::uint16_t>(v);
        break;
      }
      case kRssi: {
        const long v = parse_int_field(value, "rssi");
        if (v < -113 || v > -51) throw Error("MalformedField", "rssi out of range");
        cell.rssi_dbm = static_cast<double>(v);
        break;
      }
      case kBer: {
        const double v = parse_double_field(value, "ber");
        if (!(v >= 0.0 && v <= 100.0)) throw Error("MalformedField", "ber out of range");
        cell.ber_pct = v;
        break;
      }
      case kBcc:
      case kBtcc:
      case kNcc: {
        const long v = parse_int_field(value, std::string(key).c_str());
        if (v < 0 || v > 7)
          throw Error("MalformedField", std::string(key) + " out of range");
        const auto code = static_cast<std::uint8_t>(v);
        if (which == kBcc)
          cell.bcc = code;
        else if (which == kBtcc)
          cell.btcc = code;
        else
          cell.ncc = code;
        break;
      }
    }
  }

  for (std::size_t i = 0; i < names.size(); ++i)
    if (!present[i]) throw Error("MissingKey", "'" + std::string(names[i]) + "' line absent");
  if (!terminated) throw Error("MissingKey", "'OK' terminator absent");
  return cell;
}

std::string simulated_modem(const Point2D& position,
                            const std::vector<BaseStation>& bs_table,
                            std::uint64_t noise_seed) {
  if (bs_table.empty()) throw Error("EmptyBsTable", "no base stations to report");

  const BaseStation* serving = &bs_table.front();
  double best_d2 = squared_distance(position, serving->position);
  for (const auto& bs : bs_table) {
    const double d2 = squared_distance(position, bs.position);
    if (d2 < best_d2 || (d2 == best_d2 && bs.cell_id < serving->cell_id)) {
      best_d2 = d2;
      serving = &bs;
    }
  }
  const double distance = std::sqrt(best_d2);

  Rng rng(noise_seed);
  const int offset_db = static_cast<int>(rng.next_below(7)) - 3; // [-3, 3]
  // Log-distance path loss, 100 m reference, exponent 2.8.
  const double raw = -55.0 - 28.0 * std::log10(1.0 + distance / 100.0) +
                     static_cast<double>(offset_db);
  const int rssi = static_cast<int>(std::lround(std::clamp(raw, -113.0, -51.0)));
  const int rxqual = static_cast<int>(
      std::min<std::uint64_t>(7, static_cast<std::uint64_t>(distance / 9000.0) +
                                     rng.next_below(2)));

  char ber_text[16];
  std::snprintf(ber_text, sizeof ber_text, "%.2f", rxqual_to_ber_pct(rxqual));

  const int ta = static_cast<int>(std::min(distance / 550.0, 255.0)); // GSM TA step
  std::string block;
  block += "cid:" + std::to_string(serving->cell_id) + "\n";
  block += "ta:" + std::to_string(ta) + "\n";
  block += "mcc:208\n";
  block += "mnc:" + std::to_string(1 + rng.next_below(99)) + "\n";
  block += "lac:" + std::to_string(1000 + (static_cast<std::uint64_t>(serving->cell_id) * 7 +
                                           rng.next_below(100)) % 60000) + "\n";
  block += "rssi:" + std::to_string(rssi) + "\n";
  block += "ber:" + std::string(ber_text) + "\n";
  block += "bcc:" + std::to_string(rng.next_below(8)) + "\n";
  block += "btcc:" + std::to_string(rng.next_below(8)) + "\n";
  block += "ncc:" + std::to_string(rng.next_below(8)) + "\n";
  block += "OK\n";
  return block;
}

void apply_deltas(std::vector<CellMeasurement>& stream) {
  for (std::size_t i = 0; i < stream.size(); ++i) {
    auto& sample = stream[i];
    if (i == 0) {
      sample.rssi_delta_db = sample.rssi_dbm ? std::optional<double>(0.0) : std::nullopt;
      sample.ber_delta_pct = sample.ber_pct ? std::optional<double>(0.0) : std::nullopt;
      continue;
    }
    const auto& prev = stream[i - 1];
    sample.rssi_delta_db =
        (sample.rssi_dbm && prev.rssi_dbm)
            ? std::optional<double>(*sample.rssi_dbm - *prev.rssi_dbm)
            : std::nullopt;
    sample.ber_delta_pct = (sample.ber_pct && prev.ber_pct)
                               ? std::optional<double>(*sample.ber_pct - *prev.ber_pct)
                               : std::nullopt;
  }
}

} // namespace cellsweep::telemetry
