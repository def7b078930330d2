#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nvmag {

enum class Unit { tesla, ampere, dimensionless };

inline std::string_view to_string(Unit u) {
  switch (u) {
    case Unit::tesla: return "T";
    case Unit::ampere: return "A";
    case Unit::dimensionless: return "1";
  }
  return "?";
}

inline Unit unit_from_string(std::string_view s) {
  if (s == "T") return Unit::tesla;
  if (s == "A") return Unit::ampere;
  if (s == "1") return Unit::dimensionless;
  throw std::invalid_argument("unknown unit tag '" + std::string(s) + "'");
}

struct TimeSeries {
  double sample_rate = 0.0;  // Hz
  std::vector<double> samples;
  Unit unit = Unit::tesla;
  double start_time = 0.0;  // s, time of samples[0]

  std::size_t size() const { return samples.size(); }
  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
  double time(std::size_t i) const { return start_time + static_cast<double>(i) / sample_rate; }

  /// Samples [first, first + count) as a new series with the matching start time.
  TimeSeries slice(std::size_t first, std::size_t count) const {
    if (first + count > samples.size()) throw std::out_of_range("TimeSeries::slice: range exceeds series");
    TimeSeries out{sample_rate, {samples.begin() + static_cast<std::ptrdiff_t>(first),
                                 samples.begin() + static_cast<std::ptrdiff_t>(first + count)},
                   unit, time(first)};
    return out;
  }

  void validate() const {
    if (!(sample_rate > 0.0)) throw std::invalid_argument("TimeSeries: sample_rate must be > 0");
    if (samples.size() < 2) throw std::invalid_argument("TimeSeries: need at least 2 samples");
  }
};

enum class AsdConvention { double_sided };

inline std::string_view to_string(AsdConvention) { return "double-sided"; }

struct SpectrumMeta {
  std::string window = "hann";
  std::size_t segment_length = 0;
  double overlap = 0.0;
  std::size_t averages = 0;
  double enbw_bins = 0.0;  // window ENBW in bins
  double enbw_hz = 0.0;    // window ENBW in Hz
};

/// Amplitude spectral density on non-negative frequencies. Values are
/// always double-sided (single-sided / √2); the convention is fixed at
/// construction and cannot be changed.
class Spectrum {
 public:
  Spectrum(std::vector<double> freqs, std::vector<double> asd, Unit unit, SpectrumMeta meta)
      : freqs_(std::move(freqs)), asd_(std::move(asd)), unit_(unit), meta_(std::move(meta)) {
    if (freqs_.size() != asd_.size()) throw std::invalid_argument("Spectrum: freqs/asd size mismatch");
    for (std::size_t i = 0; i < freqs_.size(); ++i) {
      if (freqs_[i] < 0.0 || (i > 0 && !(freqs_[i] > freqs_[i - 1])))
        throw std::invalid_argument("Spectrum: frequencies must be non-negative and strictly increasing");
      if (!(asd_[i] >= 0.0)) throw std::invalid_argument("Spectrum: asd must be >= 0");
    }
  }

  const std::vector<double>& freqs() const { return freqs_; }
  const std::vector<double>& asd() const { return asd_; }
  Unit unit() const { return unit_; }
  const SpectrumMeta& meta() const { return meta_; }
  AsdConvention convention() const { return AsdConvention::double_sided; }
  std::size_t size() const { return freqs_.size(); }
  double resolution() const { return freqs_.size() > 1 ? freqs_[1] - freqs_[0] : 0.0; }

 private:
  std::vector<double> freqs_;
  std::vector<double> asd_;
  Unit unit_;
  SpectrumMeta meta_;
};

}  // namespace nvmag
