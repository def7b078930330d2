#pragma once

// Butterworth IIR design (bilinear transform, pre-warped) as cascaded
// second-order sections, with causal and forward-backward application.

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "nvmag/constants.hpp"

namespace nvmag::iir {

/// One section: (b0 + b1 z⁻¹ + b2 z⁻²) / (1 + a1 z⁻¹ + a2 z⁻²).
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  std::complex<double> response(std::complex<double> z_inv) const {
    return (b0 + z_inv * (b1 + z_inv * b2)) / (1.0 + z_inv * (a1 + z_inv * a2));
  }
};

class SosFilter {
 public:
  SosFilter() = default;
  SosFilter(std::vector<Biquad> sections, double gain) : sections_(std::move(sections)), gain_(gain) {}

  const std::vector<Biquad>& sections() const { return sections_; }
  double gain() const { return gain_; }

  std::complex<double> response(double freq, double sample_rate) const {
    const std::complex<double> z_inv = std::polar(1.0, -constants::kTwoPi * freq / sample_rate);
    std::complex<double> h = gain_;
    for (const auto& s : sections_) h *= s.response(z_inv);
    return h;
  }

  enum class Init {
    zero,    // all section states start at rest
    steady,  // states match a constant input equal to the first sample
  };

  /// Causal filtering (transposed direct form II).
  std::vector<double> apply(std::span<const double> x, Init init = Init::zero) const {
    std::vector<double> y(x.begin(), x.end());
    for (auto& v : y) v *= gain_;
    for (const auto& s : sections_) {
      double z1 = 0.0, z2 = 0.0;
      if (init == Init::steady && !y.empty()) {
        const double in = y.front();
        const double out = in * (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
        z2 = s.b2 * in - s.a2 * out;
        z1 = s.b1 * in - s.a1 * out + z2;
      }
      for (auto& v : y) {
        const double in = v;
        const double out = s.b0 * in + z1;
        z1 = s.b1 * in - s.a1 * out + z2;
        z2 = s.b2 * in - s.a2 * out;
        v = out;
      }
    }
    return y;
  }

  /// Zero-phase forward-backward filtering; the effective response is |H|².
  std::vector<double> apply_zero_phase(std::span<const double> x, Init init = Init::zero) const {
    auto y = apply(x, init);
    std::reverse(y.begin(), y.end());
    y = apply(y, init);
    std::reverse(y.begin(), y.end());
    return y;
  }

  /// Largest pole radius over all sections; the slowest decaying mode.
  double max_pole_radius() const {
    double r = 0.0;
    for (const auto& s : sections_) {
      const std::complex<double> disc = std::sqrt(std::complex<double>(s.a1 * s.a1 - 4.0 * s.a2));
      r = std::max({r, std::abs(0.5 * (-s.a1 + disc)), std::abs(0.5 * (-s.a1 - disc))});
    }
    return r;
  }

 private:
  std::vector<Biquad> sections_;
  double gain_ = 1.0;
};

namespace detail {

inline std::vector<std::complex<double>> butterworth_prototype_poles(int order) {
  std::vector<std::complex<double>> poles;
  for (int k = 0; k < order; ++k) {
    const double theta = constants::kPi * (2.0 * k + order + 1) / (2.0 * order);
    poles.push_back(std::polar(1.0, theta));
  }
  return poles;
}

inline std::complex<double> bilinear(std::complex<double> s, double sample_rate) {
  const double k = 2.0 * sample_rate;
  return (k + s) / (k - s);
}

inline double prewarp(double freq, double sample_rate) {
  return 2.0 * sample_rate * std::tan(constants::kPi * freq / sample_rate);
}

}  // namespace detail

/// Butterworth low-pass, unit gain at DC.
inline SosFilter butterworth_lowpass(int order, double cutoff, double sample_rate) {
  if (order < 1) throw std::invalid_argument("butterworth_lowpass: order must be >= 1");
  if (!(cutoff > 0.0 && cutoff < 0.5 * sample_rate))
    throw std::invalid_argument("butterworth_lowpass: cutoff must lie in (0, fs/2)");
  const double wc = detail::prewarp(cutoff, sample_rate);
  std::vector<Biquad> sections;
  for (const auto& p : detail::butterworth_prototype_poles(order)) {
    if (p.imag() < -1e-12) continue;
    const auto zp = detail::bilinear(p * wc, sample_rate);
    if (std::abs(p.imag()) <= 1e-12) {
      sections.push_back({1.0, 1.0, 0.0, -zp.real(), 0.0});
    } else {
      sections.push_back({1.0, 2.0, 1.0, -2.0 * zp.real(), std::norm(zp)});
    }
  }
  SosFilter unnormalized(sections, 1.0);
  return SosFilter(std::move(sections), 1.0 / std::abs(unnormalized.response(0.0, sample_rate)));
}

/// Butterworth band-pass with half-power edges f_lo, f_hi (per pass) and
/// unit gain at `unity_freq`. `order` is the low-pass prototype order; the
/// band-pass has 2·order poles.
inline SosFilter butterworth_bandpass(int order, double f_lo, double f_hi, double sample_rate, double unity_freq) {
  if (order < 1) throw std::invalid_argument("butterworth_bandpass: order must be >= 1");
  if (!(f_lo > 0.0 && f_hi > f_lo && f_hi < 0.5 * sample_rate))
    throw std::invalid_argument("butterworth_bandpass: need 0 < f_lo < f_hi < fs/2");
  const double wl = detail::prewarp(f_lo, sample_rate);
  const double wh = detail::prewarp(f_hi, sample_rate);
  const double w0sq = wl * wh;
  const double bw = wh - wl;
  std::vector<Biquad> sections;
  for (const auto& p : detail::butterworth_prototype_poles(order)) {
    // s² − p·B·s + ω0² = 0 for each prototype pole p.
    const std::complex<double> half = 0.5 * p * bw;
    const std::complex<double> root = std::sqrt(half * half - w0sq);
    for (const auto& s : {half + root, half - root}) {
      if (s.imag() <= 0.0) continue;
      const auto zp = detail::bilinear(s, sample_rate);
      sections.push_back({1.0, 0.0, -1.0, -2.0 * zp.real(), std::norm(zp)});
    }
  }
  SosFilter unnormalized(sections, 1.0);
  return SosFilter(std::move(sections), 1.0 / std::abs(unnormalized.response(unity_freq, sample_rate)));
}

}  // namespace nvmag::iir
