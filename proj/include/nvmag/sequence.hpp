#pragma once

// DQ 4-Ramsey lock-in sequence: timeline construction, timing-budget checks
// and the demodulated detuning response.

#include <array>
#include <cmath>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nvmag/constants.hpp"
#include "nvmag/spin_model.hpp"

namespace nvmag::sequence {

/// Phases of the two π/2 pulses closing one Ramsey block. The relative
/// phase of the readout pulse (0 or π) fixes the sign with which the block
/// enters the lock-in output.
struct PhasePair {
  std::string label;
  double first = 0.0;   // rad
  double second = 0.0;  // rad

  int sign() const {
    const double c = std::cos(second - first);
    if (std::abs(std::abs(c) - 1.0) > 1e-9)
      throw std::invalid_argument("PhasePair '" + label + "': relative phase must be 0 or pi");
    return c > 0.0 ? +1 : -1;
  }
};

inline std::array<PhasePair, 4> default_phase_cycle() {
  constexpr double pi = constants::kPi;
  return {PhasePair{"+x/+x", 0.0, 0.0}, PhasePair{"+x/-x", 0.0, pi}, PhasePair{"-x/-x", pi, pi},
          PhasePair{"-x/+x", pi, 0.0}};
}

struct SequenceConfig {
  double laser_pulse = 20.0e-6;    // s
  double tau = 3.957e-6;           // s
  double mw_pulse_total = 1.0e-6;  // s, all MW pulses of one Ramsey block
  double lockin_freq = 20.0e3;     // Hz
  std::array<PhasePair, 4> phase_cycle = default_phase_cycle();

  double half_period() const { return 0.5 / lockin_freq; }

  void validate() const {
    if (!(lockin_freq > 0.0)) throw std::invalid_argument("SequenceConfig: lockin_freq must be > 0");
    if (!(laser_pulse > 0.0) || !(tau > 0.0) || !(mw_pulse_total >= 0.0))
      throw std::invalid_argument("SequenceConfig: durations must be positive");
    const double used = laser_pulse + tau + mw_pulse_total;
    if (used > half_period() * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "SequenceConfig: timing budget violated: laser_pulse + tau + mw_pulse_total <= 0.5/lockin_freq "
          << "does not hold (" << laser_pulse << " + " << tau << " + " << mw_pulse_total << " = " << used
          << " s > " << half_period() << " s)";
      throw std::invalid_argument(msg.str());
    }
    constexpr std::array<int, 4> expected{+1, -1, +1, -1};
    for (std::size_t k = 0; k < 4; ++k) {
      if (phase_cycle[k].sign() != expected[k])
        throw std::invalid_argument("SequenceConfig: phase_cycle must produce the sign pattern (+,-,+,-)");
    }
  }
};

enum class EventKind { laser, mw_pulse, free_evolution, readout_window };

inline std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::laser: return "laser";
    case EventKind::mw_pulse: return "mw_pulse";
    case EventKind::free_evolution: return "free_evolution";
    case EventKind::readout_window: return "readout_window";
  }
  return "unknown";
}

struct SequenceEvent {
  EventKind kind;
  double start;     // s
  double duration;  // s
  double phase;     // rad, MW pulses only
  int sign;         // demodulation sign of the enclosing block
  int block;
};

struct SequenceTimeline {
  std::vector<SequenceEvent> events;
  double total_duration = 0.0;
  int blocks = 0;
};

/// Four Ramsey blocks, one per lock-in half period. Each block is
/// laser (readout + re-initialization), π/2, free evolution τ, π/2, and a
/// readout window taking up the slack to the half-period boundary.
inline SequenceTimeline build_dq4_sequence(const SequenceConfig& cfg) {
  cfg.validate();
  SequenceTimeline tl;
  const double half = cfg.half_period();
  const double mw_half = 0.5 * cfg.mw_pulse_total;
  for (int b = 0; b < 4; ++b) {
    const auto& pair = cfg.phase_cycle[static_cast<std::size_t>(b)];
    const int sign = pair.sign();
    const double t0 = b * half;
    double t = t0;
    auto push = [&](EventKind kind, double duration, double phase) {
      tl.events.push_back({kind, t, duration, phase, sign, b});
      t += duration;
    };
    push(EventKind::laser, cfg.laser_pulse, 0.0);
    if (mw_half > 0.0) push(EventKind::mw_pulse, mw_half, pair.first);
    push(EventKind::free_evolution, cfg.tau, 0.0);
    if (mw_half > 0.0) push(EventKind::mw_pulse, mw_half, pair.second);
    const double slack = (t0 + half) - t;
    if (slack > 0.0) push(EventKind::readout_window, slack, 0.0);
  }
  tl.blocks = 4;
  tl.total_duration = 4.0 * half;
  return tl;
}

/// Optional hyperfine sub-ensemble weighting for the response model,
/// indexed by m_I = -1, 0, +1. The default keeps only m_I = 0.
struct ResponseOptions {
  std::array<double, 3> hyperfine_weights{0.0, 1.0, 0.0};
  double common_mode = 0.0;  // A, identical offset on every block (rejected by demodulation)
};

namespace detail {

inline double block_projection(const spin::EnsembleParams& params, double tau, double detuning,
                               const ResponseOptions& opt) {
  const double env = spin::dephasing_envelope(tau, params.t2_star, params.stretch);
  double wsum = 0.0, acc = 0.0;
  for (int mi = -1; mi <= 1; ++mi) {
    const double w = opt.hyperfine_weights[static_cast<std::size_t>(mi + 1)];
    wsum += w;
    acc += w * std::sin(constants::kTwoPi * params.delta_ms * (detuning + mi * params.hyperfine_parallel) * tau);
  }
  if (!(wsum > 0.0)) throw std::invalid_argument("ResponseOptions: hyperfine weights must sum to > 0");
  return params.photocurrent * params.contrast * env * acc / wsum;
}

}  // namespace detail

/// Demodulated photocurrent versus detuning (A). Every block reads out
/// common_mode + sign·projection; the lock-in averages sign·readout over
/// the four blocks.
inline std::vector<double> response_curve(const spin::EnsembleParams& params, const SequenceConfig& cfg,
                                          std::span<const double> detunings, const ResponseOptions& opt = {}) {
  params.validate();
  cfg.validate();
  std::vector<double> out;
  out.reserve(detunings.size());
  for (double det : detunings) {
    if (!std::isfinite(det)) throw std::invalid_argument("response_curve: detuning grid must be finite");
    const double proj = detail::block_projection(params, cfg.tau, det, opt);
    double demod = 0.0;
    for (const auto& pair : cfg.phase_cycle) {
      const int s = pair.sign();
      demod += s * (opt.common_mode + s * proj);
    }
    out.push_back(demod / 4.0);
  }
  return out;
}

/// γe·slope (A/T) for a measured or modeled slope dI/dδ (A/Hz).
inline double responsivity_from_slope(double slope, double gyromagnetic_ratio = constants::kGyromagneticRatio) {
  if (!(slope >= 0.0) || !(gyromagnetic_ratio > 0.0))
    throw std::invalid_argument("responsivity_from_slope: need slope >= 0 and gyromagnetic_ratio > 0");
  return gyromagnetic_ratio * slope;
}

/// Field-to-demodulated-current conversion γe·dI/dδ (A/T).
inline double field_responsivity(const spin::EnsembleParams& params, const SequenceConfig& cfg) {
  params.validate();
  return params.gyromagnetic_ratio * spin::ramsey_slope(params, cfg.tau);
}

}  // namespace nvmag::sequence
