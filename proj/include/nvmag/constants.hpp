#pragma once

#include <numbers>

namespace nvmag::constants {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Elementary charge (C), exact SI value.
inline constexpr double kElementaryCharge = 1.602176634e-19;
/// Vacuum permeability (T·m/A), classical definition 4π×10⁻⁷.
inline constexpr double kMu0 = 4.0e-7 * std::numbers::pi;

/// NV electron gyromagnetic ratio (Hz/T).
inline constexpr double kGyromagneticRatio = 28.0e9;
/// Ground-state zero-field splitting D (Hz).
inline constexpr double kZeroFieldSplitting = 2.870e9;
/// ¹⁴N axial hyperfine constant A∥ (Hz).
inline constexpr double kHyperfineParallel = -2.16e6;

// Detection chain. Recorded for reference only; all modeling is field-equivalent.
inline constexpr double kTiaFeedbackResistance = 1.0e3;  // ohm
inline constexpr double kPreampGain = 5.0;
inline constexpr double kLockinGain = 10.0;
inline constexpr double kTotalTransimpedanceGain = 5.0e4;  // V/A

/// Sensitivity gain from reading out all four NV orientations at once (4/√3).
inline constexpr double kFourOrientationEnhancement = 4.0 / std::numbers::sqrt3;

}  // namespace nvmag::constants
