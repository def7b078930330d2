#pragma once

// Field-equivalent magnetometer noise: white photon shot noise, power-line
// harmonics and a low-frequency excess that rises as f^-α below a corner.
// All spectral levels use the double-sided ASD convention.

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nvmag/constants.hpp"
#include "nvmag/fft.hpp"
#include "nvmag/sequence.hpp"
#include "nvmag/spin_model.hpp"
#include "nvmag/time_series.hpp"

namespace nvmag::noise {

struct HarmonicLine {
  double frequency;  // Hz
  double amplitude;  // T, peak
  double phase = 0.0;
};

/// Excess ASD: level·(corner/f)^α below the corner, level above it.
struct LowFrequencyExcess {
  double exponent = 1.0;
  double corner_freq = 100.0;  // Hz
  double level_at_corner = 0.0;  // T/√Hz

  double asd(double f) const {
    if (!(f > 0.0)) return 0.0;  // DC is not modeled
    return f < corner_freq ? level_at_corner * std::pow(corner_freq / f, exponent) : level_at_corner;
  }
};

inline std::vector<HarmonicLine> default_harmonics() {
  return {{50.0, 30e-12, 0.0}, {150.0, 15e-12, 0.0}, {250.0, 10e-12, 0.0}, {350.0, 8e-12, 0.0}};
}

struct NoiseModel {
  double shot_floor = 1.9e-12;  // T/√Hz
  std::vector<HarmonicLine> harmonics = default_harmonics();
  LowFrequencyExcess excess{};
  bool shot_enabled = true;
  bool harmonics_enabled = true;
  bool excess_enabled = true;

  void validate() const {
    if (!(shot_floor >= 0.0)) throw std::invalid_argument("NoiseModel: shot_floor must be >= 0");
    for (const auto& h : harmonics) {
      if (!(h.frequency > 0.0)) throw std::invalid_argument("NoiseModel: harmonic frequencies must be > 0");
    }
    if (!(excess.corner_freq > 0.0)) throw std::invalid_argument("NoiseModel: corner_freq must be > 0");
    if (!(excess.level_at_corner >= 0.0)) throw std::invalid_argument("NoiseModel: level_at_corner must be >= 0");
    if (!(excess.exponent >= 0.0)) throw std::invalid_argument("NoiseModel: excess exponent must be >= 0");
  }
};

enum class Mode { sensitive, insensitive };

/// Continuous part of the model ASD. Harmonic lines are spectral deltas
/// and are listed separately rather than evaluated.
class AnalyticAsd {
 public:
  AnalyticAsd(NoiseModel model, Mode mode) : model_(std::move(model)), mode_(mode) { model_.validate(); }

  double operator()(double f) const {
    const double shot = model_.shot_enabled ? model_.shot_floor : 0.0;
    double excess = 0.0;
    if (mode_ == Mode::sensitive && model_.excess_enabled) excess = model_.excess.asd(f);
    return std::sqrt(shot * shot + excess * excess);
  }

  std::vector<HarmonicLine> lines() const {
    if (mode_ == Mode::sensitive && model_.harmonics_enabled) return model_.harmonics;
    return {};
  }

  /// Mean of the continuous ASD over [lo, hi] (uniform weight in f).
  double band_mean(double lo, double hi, int steps = 30000) const {
    if (!(hi > lo && lo > 0.0)) throw std::invalid_argument("AnalyticAsd::band_mean: need 0 < lo < hi");
    double acc = 0.0;
    for (int i = 0; i < steps; ++i) acc += (*this)(lo + (hi - lo) * (i + 0.5) / steps);
    return acc / steps;
  }

 private:
  NoiseModel model_;
  Mode mode_;
};

inline AnalyticAsd analytic_asd(const NoiseModel& model, Mode mode) { return AnalyticAsd(model, mode); }

/// Level at the corner such that the sensitive-mode band mean of the
/// continuous ASD over [lo, hi] equals `target`.
inline double calibrate_excess_level(const NoiseModel& model, double target, double lo, double hi) {
  NoiseModel m = model;
  m.excess_enabled = true;
  m.excess.level_at_corner = 0.0;
  if (!(analytic_asd(m, Mode::sensitive).band_mean(lo, hi) < target))
    throw std::invalid_argument("calibrate_excess_level: target is below the shot-noise floor");
  double a = 0.0, b = target;
  m.excess.level_at_corner = b;
  while (analytic_asd(m, Mode::sensitive).band_mean(lo, hi) < target) {
    b *= 2.0;
    m.excess.level_at_corner = b;
  }
  for (int it = 0; it < 200 && (b - a) > 1e-15 * b; ++it) {
    const double mid = 0.5 * (a + b);
    m.excess.level_at_corner = mid;
    (analytic_asd(m, Mode::sensitive).band_mean(lo, hi) < target ? a : b) = mid;
  }
  return 0.5 * (a + b);
}

/// Shot floor derived from ensemble parameters: √(2qI)/(γe·dI/dδ).
inline double shot_floor_from_ensemble(const spin::EnsembleParams& params, double tau, double noise_factor = 1.0) {
  return spin::shot_noise_sensitivity(params.photocurrent, spin::ramsey_slope(params, tau),
                                      params.gyromagnetic_ratio, noise_factor);
}

struct InjectedSignal {
  double frequency;  // Hz
  double amplitude;  // T, peak
  double phase = 0.0;
};

struct Scenario {
  Mode mode = Mode::sensitive;
  std::optional<InjectedSignal> signal;
  double duration = 60.0;       // s
  double sample_rate = 4000.0;  // Hz
  std::uint64_t seed = 1;

  std::size_t length() const { return static_cast<std::size_t>(std::llround(duration * sample_rate)); }

  void validate(const NoiseModel& model) const {
    if (!(sample_rate > 0.0) || !(duration > 0.0))
      throw std::invalid_argument("Scenario: duration and sample_rate must be > 0");
    const double n = duration * sample_rate;
    if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n))
      throw std::invalid_argument("Scenario: duration * sample_rate must be an integer");
    if (length() < 2) throw std::invalid_argument("Scenario: fewer than 2 samples");
    auto check = [&](double f, const char* what) {
      if (!(sample_rate > 2.0 * f))
        throw std::invalid_argument(std::string("Scenario: Nyquist violation, sample rate must exceed twice the ") +
                                    what + " frequency (" + std::to_string(f) + " Hz)");
    };
    if (model.harmonics_enabled)
      for (const auto& h : model.harmonics) check(h.frequency, "harmonic");
    if (model.excess_enabled) check(model.excess.corner_freq, "excess corner");
    if (signal) check(signal->frequency, "injected signal");
  }
};

namespace detail {

enum StreamId : std::uint32_t { kShotStream = 1, kExcessStream = 2 };

inline std::mt19937_64 make_stream(std::uint64_t seed, StreamId id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id)};
  return std::mt19937_64(seq);
}

inline std::vector<double> white_gaussian(std::size_t n, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& v : out) v = sigma * dist(rng);
  return out;
}

// Unit white noise shaped in the frequency domain so that its expected
// double-sided PSD is asd(f)². The DC bin is removed.
template <typename AsdFn>
std::vector<double> shaped_gaussian(std::size_t n, double fs, AsdFn&& asd, std::mt19937_64& rng) {
  auto white = white_gaussian(n, 1.0, rng);
  fft::RealFft fft(n);
  auto spec = fft.forward(white);
  spec[0] = 0.0;
  const double sqrt_fs = std::sqrt(fs);
  for (std::size_t k = 1; k < spec.size(); ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(n);
    spec[k] *= asd(f) * sqrt_fs;
  }
  return fft.inverse(spec);
}

}  // namespace detail

/// Deterministic field-equivalent time series (T). Independent RNG streams
/// are derived from the seed per source; the injected signal is added last.
inline TimeSeries synthesize(const NoiseModel& model, const Scenario& scenario) {
  model.validate();
  scenario.validate(model);
  const std::size_t n = scenario.length();
  const double fs = scenario.sample_rate;

  TimeSeries out{fs, std::vector<double>(n, 0.0), Unit::tesla, 0.0};
  if (model.shot_enabled && model.shot_floor > 0.0) {
    auto rng = detail::make_stream(scenario.seed, detail::kShotStream);
    // Double-sided ASD a over [-fs/2, fs/2] ⇔ per-sample σ = a·√fs.
    out.samples = detail::white_gaussian(n, model.shot_floor * std::sqrt(fs), rng);
  }
  if (scenario.mode == Mode::sensitive) {
    if (model.excess_enabled && model.excess.level_at_corner > 0.0) {
      auto rng = detail::make_stream(scenario.seed, detail::kExcessStream);
      const auto colored = detail::shaped_gaussian(n, fs, [&](double f) { return model.excess.asd(f); }, rng);
      for (std::size_t i = 0; i < n; ++i) out.samples[i] += colored[i];
    }
    if (model.harmonics_enabled) {
      for (const auto& h : model.harmonics) {
        for (std::size_t i = 0; i < n; ++i)
          out.samples[i] += h.amplitude * std::sin(constants::kTwoPi * h.frequency * out.time(i) + h.phase);
      }
    }
  }
  if (scenario.signal) {
    const auto& s = *scenario.signal;
    for (std::size_t i = 0; i < n; ++i)
      out.samples[i] += s.amplitude * std::sin(constants::kTwoPi * s.frequency * out.time(i) + s.phase);
  }
  return out;
}

/// Field-referred series → demodulated photocurrent (A).
inline TimeSeries current_view(const TimeSeries& field, double responsivity) {
  if (!(responsivity > 0.0)) throw std::invalid_argument("current_view: responsivity must be > 0");
  TimeSeries out = field;
  out.unit = Unit::ampere;
  for (auto& v : out.samples) v *= responsivity;
  return out;
}

/// Inverse of `current_view`.
inline TimeSeries field_view(const TimeSeries& current, double responsivity) {
  if (!(responsivity > 0.0)) throw std::invalid_argument("field_view: responsivity must be > 0");
  TimeSeries out = current;
  out.unit = Unit::tesla;
  for (auto& v : out.samples) v /= responsivity;
  return out;
}

}  // namespace nvmag::noise
