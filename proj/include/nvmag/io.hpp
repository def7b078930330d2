#pragma once

// File formats:
//   time series CSV   "time_s,value_<unit>" with '#' comment header lines
//   time series binary  little-endian, 32-byte header then float64 samples
//       offset 0  char[4]  magic "NVTS"
//       offset 4  uint32   format version (1)
//       offset 8  float64  sample rate (Hz)
//       offset 16 uint64   sample count N
//       offset 24 uint32   unit tag (0 = T, 1 = A, 2 = dimensionless)
//       offset 28 uint32   reserved (0)
//       offset 32 float64  samples[N]
//   spectrum CSV      "freq_hz,asd_<unit>_per_sqrthz" with metadata comments
//   map CSV           first row "v_mm\u_mm,<u coords>", then "<v>,<values in pT>"
//   timeline CSV      "kind,start,duration,phase,sign"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <type_traits>
#include <vector>

#include "nvmag/phantom.hpp"
#include "nvmag/sequence.hpp"
#include "nvmag/time_series.hpp"

namespace nvmag::io {

inline constexpr std::uint32_t kBinaryVersion = 1;
inline constexpr char kBinaryMagic[4] = {'N', 'V', 'T', 'S'};

/// Comment lines ("# ...") written ahead of every CSV table.
using Header = std::vector<std::string>;

namespace detail {

inline void write_header(std::ostream& os, const Header& header) {
  for (const auto& line : header) os << "# " << line << '\n';
}

inline std::ostream& full_precision(std::ostream& os) {
  return os << std::setprecision(std::numeric_limits<double>::max_digits10);
}

template <typename T>
void put_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw std::runtime_error("binary time series: truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

inline std::uint32_t unit_code(Unit u) {
  switch (u) {
    case Unit::tesla: return 0;
    case Unit::ampere: return 1;
    case Unit::dimensionless: return 2;
  }
  return 2;
}

inline Unit unit_from_code(std::uint32_t c) {
  switch (c) {
    case 0: return Unit::tesla;
    case 1: return Unit::ampere;
    case 2: return Unit::dimensionless;
    default: throw std::runtime_error("binary time series: unknown unit code");
  }
}

}  // namespace detail

inline void write_timeseries_csv(std::ostream& os, const TimeSeries& ts, const Header& header = {}) {
  detail::write_header(os, header);
  os << "# sample_rate_hz: " << std::setprecision(17) << ts.sample_rate << '\n';
  os << "time_s,value_" << to_string(ts.unit) << '\n';
  detail::full_precision(os);
  for (std::size_t i = 0; i < ts.size(); ++i) os << ts.time(i) << ',' << ts.samples[i] << '\n';
}

/// Reads the CSV written by `write_timeseries_csv`. The sample rate comes
/// from the "# sample_rate_hz:" comment when present, otherwise from the
/// first two time stamps.
inline TimeSeries read_timeseries_csv(std::istream& is) {
  TimeSeries ts;
  std::string line;
  std::vector<double> times;
  bool have_columns = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string key = "# sample_rate_hz:";
      if (line.rfind(key, 0) == 0) ts.sample_rate = std::stod(line.substr(key.size()));
      continue;
    }
    if (!have_columns) {
      const auto comma = line.find(',');
      if (comma == std::string::npos || line.substr(0, comma) != "time_s")
        throw std::runtime_error("time series CSV: missing 'time_s,value_<unit>' column header");
      const std::string value_col = line.substr(comma + 1);
      if (value_col.rfind("value_", 0) != 0) throw std::runtime_error("time series CSV: bad value column");
      ts.unit = unit_from_string(value_col.substr(6));
      have_columns = true;
      continue;
    }
    std::istringstream row(line);
    double t = 0.0, v = 0.0;
    char comma = 0;
    if (!(row >> t >> comma >> v) || comma != ',') throw std::runtime_error("time series CSV: malformed row '" + line + "'");
    times.push_back(t);
    ts.samples.push_back(v);
  }
  if (!times.empty()) ts.start_time = times.front();
  if (!(ts.sample_rate > 0.0) && times.size() >= 2) ts.sample_rate = 1.0 / (times[1] - times[0]);
  ts.validate();
  return ts;
}

inline void write_timeseries_binary(std::ostream& os, const TimeSeries& ts) {
  ts.validate();
  os.write(kBinaryMagic, 4);
  detail::put_le<std::uint32_t>(os, kBinaryVersion);
  detail::put_le<double>(os, ts.sample_rate);
  detail::put_le<std::uint64_t>(os, ts.size());
  detail::put_le<std::uint32_t>(os, detail::unit_code(ts.unit));
  detail::put_le<std::uint32_t>(os, 0);
  for (double v : ts.samples) detail::put_le<double>(os, v);
}

inline TimeSeries read_timeseries_binary(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kBinaryMagic, 4) != 0)
    throw std::runtime_error("binary time series: bad magic");
  const auto version = detail::get_le<std::uint32_t>(is);
  if (version != kBinaryVersion) throw std::runtime_error("binary time series: unsupported version");
  TimeSeries ts;
  ts.sample_rate = detail::get_le<double>(is);
  const auto n = detail::get_le<std::uint64_t>(is);
  ts.unit = detail::unit_from_code(detail::get_le<std::uint32_t>(is));
  (void)detail::get_le<std::uint32_t>(is);
  ts.samples.resize(n);
  for (auto& v : ts.samples) v = detail::get_le<double>(is);
  ts.validate();
  return ts;
}

inline void write_spectrum_csv(std::ostream& os, const Spectrum& s, const Header& header = {}) {
  detail::write_header(os, header);
  os << "# convention: " << to_string(s.convention()) << '\n';
  os << "# window: " << s.meta().window << '\n';
  os << "# segment_length: " << s.meta().segment_length << '\n';
  os << "# overlap: " << s.meta().overlap << '\n';
  os << "# averages: " << s.meta().averages << '\n';
  os << "# enbw_hz: " << std::setprecision(10) << s.meta().enbw_hz << '\n';
  os << "freq_hz,asd_" << to_string(s.unit()) << "_per_sqrthz\n";
  detail::full_precision(os);
  for (std::size_t k = 0; k < s.size(); ++k) os << s.freqs()[k] << ',' << s.asd()[k] << '\n';
}

/// Two-column table in the spectrum CSV shape (e.g. a filter gain curve).
inline void write_curve_csv(std::ostream& os, const std::vector<double>& x, const std::vector<double>& y,
                            const std::string& x_name, const std::string& y_name, const Header& header = {}) {
  if (x.size() != y.size()) throw std::invalid_argument("write_curve_csv: size mismatch");
  detail::write_header(os, header);
  os << x_name << ',' << y_name << '\n';
  detail::full_precision(os);
  for (std::size_t i = 0; i < x.size(); ++i) os << x[i] << ',' << y[i] << '\n';
}

inline void write_map_csv(std::ostream& os, const phantom::FieldMap& map, const Header& header = {}) {
  detail::write_header(os, header);
  os << "# rows: v offset (mm); columns: u offset (mm); values: field (pT)\n";
  os << std::setprecision(10) << "v_mm\\u_mm";
  for (double u : map.u) os << ',' << u * 1e3;
  os << '\n';
  for (std::size_t iv = 0; iv < map.v.size(); ++iv) {
    os << map.v[iv] * 1e3;
    for (std::size_t iu = 0; iu < map.u.size(); ++iu) os << ',' << map.at(iu, iv) * 1e12;
    os << '\n';
  }
}

inline void write_timeline_csv(std::ostream& os, const sequence::SequenceTimeline& tl, const Header& header = {}) {
  detail::write_header(os, header);
  os << "kind,start,duration,phase,sign\n";
  detail::full_precision(os);
  for (const auto& e : tl.events)
    os << sequence::to_string(e.kind) << ',' << e.start << ',' << e.duration << ',' << e.phase << ',' << e.sign
       << '\n';
}

/// Writes `content` to `path` through a sibling temporary file and rename,
/// so readers never observe a partially written file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
  }
}

}  // namespace nvmag::io
