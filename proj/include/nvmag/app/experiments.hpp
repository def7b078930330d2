#pragma once

// Experiment pipelines shared by the CLI commands and the acceptance run.
// Everything here is computed in memory; nothing touches the filesystem.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "nvmag/app/config.hpp"
#include "nvmag/dsp.hpp"
#include "nvmag/noise_chain.hpp"
#include "nvmag/phantom.hpp"
#include "nvmag/ramsey_fit.hpp"
#include "nvmag/sequence.hpp"
#include "nvmag/spin_model.hpp"

namespace nvmag::app {

// --- ODMR ----------------------------------------------------------------------

struct OdmrResult {
  std::vector<double> freqs;
  std::vector<double> signal;
  std::vector<spin::ResonanceLine> lines;
  int local_minima = 0;
};

inline OdmrResult run_odmr(const Config& c) {
  OdmrResult r;
  const double d = c.ensemble.zero_field_splitting;
  const auto n = static_cast<std::size_t>(std::floor(2.0 * c.odmr.span / c.odmr.step)) + 1;
  for (std::size_t i = 0; i < n; ++i) r.freqs.push_back(d - c.odmr.span + static_cast<double>(i) * c.odmr.step);
  r.signal = spin::odmr_spectrum(c.ensemble, c.bias, c.odmr.options, r.freqs);
  r.lines = spin::resonance_lines(c.ensemble, c.bias);
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (r.signal[i] < r.signal[i - 1] && r.signal[i] < r.signal[i + 1]) ++r.local_minima;
  return r;
}

// --- Ramsey ----------------------------------------------------------------------

struct RamseyRun {
  int delta_ms = 1;
  spin::RamseyFringeParams truth;
  std::vector<spin::RamseySample> samples;
  spin::RamseyFit fit;
};

inline RamseyRun run_ramsey(const Config& c, int delta_ms, double noise_sigma, std::uint64_t seed) {
  RamseyRun run;
  run.delta_ms = delta_ms;
  run.truth.detuning = c.ramsey.detuning;
  run.truth.t2_star = delta_ms == 2 ? c.ramsey.dq_t2_star : c.ramsey.sq_t2_star;
  run.truth.stretch = c.ramsey.stretch;
  run.truth.contrast = c.ramsey.contrast;
  run.truth.delta_ms = delta_ms;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const auto n = static_cast<std::size_t>(std::floor(c.ramsey.tau_max / c.ramsey.tau_step)) + 1;
  for (std::size_t i = 0; i < n; ++i) {
    const double tau = static_cast<double>(i) * c.ramsey.tau_step;
    double y = spin::ramsey_fringe(tau, run.truth);
    if (noise_sigma > 0.0) y += noise_sigma * noise(rng);
    run.samples.push_back({tau, y});
  }
  const auto guess = spin::ramsey_initial_guess(run.samples, delta_ms, c.ramsey.max_detuning);
  run.fit = spin::fit_ramsey(run.samples, guess);
  return run;
}

// --- sensitivity ------------------------------------------------------------------

/// Central-difference slope of the demodulated response at zero detuning.
inline double numerical_response_slope(const Config& c, double h = 10.0) {
  const std::vector<double> grid{-h, h};
  const auto r = sequence::response_curve(c.ensemble, c.sequence, grid, c.sensitivity.response);
  return (r[1] - r[0]) / (2.0 * h);
}

inline TimeSeries synthesize_mode(const Config& c, const noise::NoiseModel& model, noise::Mode mode,
                                  std::uint64_t seed) {
  noise::Scenario sc;
  sc.mode = mode;
  sc.duration = c.sensitivity.duration;
  sc.sample_rate = c.sensitivity.sample_rate;
  sc.seed = seed;
  return noise::synthesize(model, sc);
}

// --- phantom end-to-end -------------------------------------------------------------

struct PhantomTrial {
  TimeSeries raw;
  TimeSeries filtered;  // settle time trimmed from both ends
  dsp::ToneFit fit;
  double sigma_predicted = 0.0;  // T, from the model ASD at the drive frequency
  double fit_duration = 0.0;     // s
};

/// Injects `amplitude` at the drive frequency into sensitive-mode noise,
/// filters, trims start-up and end transients, and fits the tone.
inline PhantomTrial run_phantom_trial(const Config& c, const noise::NoiseModel& model,
                                      const dsp::NarrowbandFilter& filter, double amplitude, std::uint64_t seed) {
  noise::Scenario sc;
  sc.mode = noise::Mode::sensitive;
  sc.duration = c.phantom.duration;
  sc.sample_rate = c.phantom.sample_rate;
  sc.seed = seed;
  sc.signal = noise::InjectedSignal{c.phantom.drive.frequency, amplitude, c.phantom.drive.phase};

  PhantomTrial t;
  t.raw = noise::synthesize(model, sc);
  const TimeSeries full{t.raw.sample_rate, filter.apply(t.raw.samples), t.raw.unit, t.raw.start_time};
  const auto trim = static_cast<std::size_t>(std::ceil(filter.settle_time() * sc.sample_rate));
  if (2 * trim >= full.size()) throw std::invalid_argument("phantom trial: record shorter than the filter settle time");
  t.filtered = full.slice(trim, full.size() - 2 * trim);
  t.fit_duration = t.filtered.duration();
  t.fit = dsp::fit_tone(t.filtered, c.phantom.drive.frequency);
  const double asd = noise::analytic_asd(model, noise::Mode::sensitive)(c.phantom.drive.frequency);
  t.sigma_predicted = dsp::tone_amplitude_sigma(asd, t.fit_duration);
  return t;
}

struct ComparisonChain {
  double rms_ours;        // T
  double snr_ours;
  double attenuated;      // T
  double rms_comparison;  // T
  double snr_comparison;
};

inline ComparisonChain comparison_chain(const Config& c) {
  const auto& p = c.phantom;
  ComparisonChain r{};
  r.rms_ours = dsp::rms_from_asd(p.measured_noise_asd, c.filter.enbw);
  r.snr_ours = dsp::snr(p.measured_amplitude, r.rms_ours);
  r.attenuated = phantom::geometric_attenuation(p.near_distance, p.far_distance, p.measured_amplitude);
  r.rms_comparison = dsp::rms_from_asd(p.comparison_noise_asd, c.filter.enbw);
  r.snr_comparison = dsp::snr(r.attenuated, r.rms_comparison);
  return r;
}

inline phantom::FieldMap run_phantom_map(const Config& c) {
  const auto& g = c.phantom.geometry;
  const phantom::Vec3 q = c.phantom.drive.moment() * g.dipole_direction.normalized();
  return phantom::phantom_map(q, g.dipole_position, g.aperture,
                              phantom::ScanGrid::uniform(c.phantom.scan_extent, c.phantom.scan_points),
                              g.quadrature_n);
}

}  // namespace nvmag::app
