#pragma once

// Static NV-ensemble spin physics: resonance-line layout under a bias field,
// pulsed-ODMR lineshape, Ramsey fringe model and the slope / shot-noise
// formulas that set the magnetometer's sensitivity.

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "nvmag/constants.hpp"

namespace nvmag::spin {

using Vec3 = Eigen::Vector3d;

struct EnsembleParams {
  double zero_field_splitting = constants::kZeroFieldSplitting;  // Hz
  double gyromagnetic_ratio = constants::kGyromagneticRatio;     // Hz/T
  double hyperfine_parallel = constants::kHyperfineParallel;     // Hz
  double photocurrent = 5.0e-3;                                  // A
  double contrast = 0.0089;
  double t2_star = 3.9e-6;  // s
  double stretch = 1.0;
  int delta_ms = 2;

  void validate() const {
    if (!(photocurrent > 0.0)) throw std::invalid_argument("EnsembleParams: photocurrent must be > 0");
    if (!(contrast > 0.0 && contrast < 1.0))
      throw std::invalid_argument("EnsembleParams: contrast must lie in (0, 1)");
    if (!(t2_star > 0.0)) throw std::invalid_argument("EnsembleParams: t2_star must be > 0");
    if (!(stretch > 0.0)) throw std::invalid_argument("EnsembleParams: stretch must be > 0");
    if (delta_ms != 1 && delta_ms != 2) throw std::invalid_argument("EnsembleParams: delta_ms must be 1 or 2");
    if (!(gyromagnetic_ratio > 0.0))
      throw std::invalid_argument("EnsembleParams: gyromagnetic_ratio must be > 0");
  }
};

/// The four ⟨111⟩ NV symmetry axes of the diamond lattice, unit length.
inline std::array<Vec3, 4> tetrahedral_axes() {
  const double s = 1.0 / std::sqrt(3.0);
  return {Vec3(s, s, s), Vec3(s, -s, -s), Vec3(-s, s, -s), Vec3(-s, -s, s)};
}

struct BiasField {
  double magnitude = 0.52e-3;  // T
  Vec3 axis = Vec3(1.0, 1.0, 1.0).normalized();
  std::array<Vec3, 4> nv_axes = tetrahedral_axes();

  void validate() const {
    constexpr double tol = 1e-12;
    if (!(magnitude >= 0.0)) throw std::invalid_argument("BiasField: magnitude must be >= 0");
    if (std::abs(axis.norm() - 1.0) > tol) throw std::invalid_argument("BiasField: axis must be a unit vector");
    for (std::size_t i = 0; i < nv_axes.size(); ++i) {
      if (std::abs(nv_axes[i].norm() - 1.0) > tol)
        throw std::invalid_argument("BiasField: nv_axes must be unit vectors");
      for (std::size_t j = i + 1; j < nv_axes.size(); ++j) {
        if (std::abs(nv_axes[i].dot(nv_axes[j]) + 1.0 / 3.0) > tol)
          throw std::invalid_argument("BiasField: nv_axes must form a tetrahedral <111> set");
      }
    }
  }
};

struct ResonanceLine {
  int axis_index;
  int ms_sign;  // +1 or -1
  int m_i;      // nuclear spin projection, -1..+1
  double frequency;  // Hz
};

/// All 24 allowed ms = 0 ↔ ±1 lines (4 axes × 2 branches × 3 hyperfine
/// projections). Ordered by axis, then ms branch (+1 first), then m_I.
inline std::vector<ResonanceLine> resonance_lines(const EnsembleParams& params, const BiasField& bias) {
  bias.validate();
  std::vector<ResonanceLine> lines;
  lines.reserve(24);
  for (int k = 0; k < 4; ++k) {
    const double cos_theta = std::abs(bias.axis.dot(bias.nv_axes[static_cast<std::size_t>(k)]));
    const double zeeman = params.gyromagnetic_ratio * bias.magnitude * cos_theta;
    for (int ms : {+1, -1}) {
      for (int mi : {-1, 0, +1}) {
        lines.push_back({k, ms,
                         mi,
                         params.zero_field_splitting + ms * zeeman + mi * params.hyperfine_parallel});
      }
    }
  }
  return lines;
}

struct OdmrOptions {
  double linewidth = 0.5e6;  // Lorentzian FWHM, Hz
  double depth = 0.01;       // per-line dip depth at line center
  // Relative dip weight per NV axis (laser/MW polarization selectivity).
  std::array<double, 4> axis_weights{1.0, 1.0, 1.0, 1.0};
};

/// Normalized fluorescence (baseline 1) with one Lorentzian dip per line.
inline std::vector<double> odmr_spectrum(const EnsembleParams& params, const BiasField& bias,
                                         const OdmrOptions& options, std::span<const double> freq_grid) {
  if (freq_grid.empty()) throw std::invalid_argument("odmr_spectrum: frequency grid is empty");
  if (!(options.linewidth > 0.0)) throw std::invalid_argument("odmr_spectrum: linewidth must be > 0");
  for (std::size_t i = 1; i < freq_grid.size(); ++i) {
    if (!(freq_grid[i] > freq_grid[i - 1]))
      throw std::invalid_argument("odmr_spectrum: frequency grid must be strictly increasing");
  }
  const auto lines = resonance_lines(params, bias);
  const double hwhm2 = 0.25 * options.linewidth * options.linewidth;
  std::vector<double> out(freq_grid.size(), 1.0);
  for (std::size_t i = 0; i < freq_grid.size(); ++i) {
    double dip = 0.0;
    for (const auto& line : lines) {
      const double df = freq_grid[i] - line.frequency;
      dip += options.axis_weights[static_cast<std::size_t>(line.axis_index)] * hwhm2 / (df * df + hwhm2);
    }
    out[i] -= options.depth * dip;
  }
  return out;
}

struct RamseyFringeParams {
  double detuning = 5.0e6;  // Hz
  double t2_star = 5.5e-6;  // s
  double stretch = 1.0;
  double contrast = 1.0;
  int delta_ms = 1;
  double phase = 0.0;  // rad

  void validate() const {
    if (!(t2_star > 0.0)) throw std::invalid_argument("RamseyFringeParams: t2_star must be > 0");
    if (!(stretch > 0.0)) throw std::invalid_argument("RamseyFringeParams: stretch must be > 0");
  }
};

inline double dephasing_envelope(double tau, double t2_star, double stretch) {
  return std::exp(-std::pow(tau / t2_star, stretch));
}

/// Normalized Ramsey signal C·exp(-(τ/T₂*)^p)·cos(2π·Δm_s·δ·τ + φ).
inline double ramsey_fringe(double tau, const RamseyFringeParams& p) {
  if (!(tau >= 0.0)) throw std::invalid_argument("ramsey_fringe: tau must be >= 0");
  return p.contrast * dephasing_envelope(tau, p.t2_star, p.stretch) *
         std::cos(constants::kTwoPi * p.delta_ms * p.detuning * tau + p.phase);
}

/// Photocurrent slope dI/dδ at the Ramsey zero crossing (A/Hz).
inline double ramsey_slope(const EnsembleParams& params, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("ramsey_slope: tau must be > 0");
  return constants::kTwoPi * tau * params.delta_ms * params.photocurrent * params.contrast *
         dephasing_envelope(tau, params.t2_star, params.stretch);
}

/// Free-precession time maximizing τ·exp(-(τ/T₂*)^p): T₂*·(1/p)^(1/p).
inline double optimal_tau(double t2_star, double stretch) {
  if (!(t2_star > 0.0) || !(stretch > 0.0))
    throw std::invalid_argument("optimal_tau: t2_star and stretch must be > 0");
  return t2_star * std::pow(1.0 / stretch, 1.0 / stretch);
}

/// Photon-shot-noise-limited sensitivity √(2qI)/(γe·slope) in T/√Hz.
/// `noise_factor` scales the current noise (1.0 reproduces the formula as printed).
inline double shot_noise_sensitivity(double photocurrent, double slope,
                                     double gyromagnetic_ratio = constants::kGyromagneticRatio,
                                     double noise_factor = 1.0) {
  if (!(photocurrent > 0.0)) throw std::invalid_argument("shot_noise_sensitivity: photocurrent must be > 0");
  if (!(slope > 0.0)) throw std::invalid_argument("shot_noise_sensitivity: slope must be > 0");
  return noise_factor * std::sqrt(2.0 * constants::kElementaryCharge * photocurrent) /
         (gyromagnetic_ratio * slope);
}

}  // namespace nvmag::spin
