#pragma once

// Spectral estimation, lock-in demodulation, narrowband filtering, tone
// fitting and the RMS / SNR arithmetic built on the double-sided ASD
// convention (RMS in a band of equivalent noise bandwidth b is ASD·√(2b)).

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nvmag/constants.hpp"
#include "nvmag/fft.hpp"
#include "nvmag/iir.hpp"
#include "nvmag/time_series.hpp"

namespace nvmag::dsp {

// ---------------------------------------------------------------------------
// Welch spectral estimate

enum class Window { hann, rectangular };

inline std::string window_name(Window w) { return w == Window::hann ? "hann" : "rectangular"; }

/// Periodic (DFT-even) window of length n.
inline std::vector<double> make_window(Window w, std::size_t n) {
  std::vector<double> out(n, 1.0);
  if (w == Window::hann) {
    for (std::size_t i = 0; i < n; ++i)
      out[i] = 0.5 * (1.0 - std::cos(constants::kTwoPi * static_cast<double>(i) / static_cast<double>(n)));
  }
  return out;
}

struct WelchOptions {
  std::size_t segment_length = 0;  // samples; 0 selects one second of data
  double overlap = 0.5;            // fraction of a segment
  Window window = Window::hann;
  bool detrend_mean = true;
};

/// Averaged modified periodogram, reported as double-sided ASD on
/// f = k·fs/L, k = 0..L/2. Density normalization: |X_k|² / (fs·Σw²).
inline Spectrum welch_asd(const TimeSeries& ts, const WelchOptions& opt = {}) {
  ts.validate();
  const std::size_t seg = opt.segment_length == 0
                              ? static_cast<std::size_t>(std::llround(ts.sample_rate))
                              : opt.segment_length;
  if (seg < 8) throw std::invalid_argument("welch_asd: segment too short (need >= 8 samples)");
  if (seg > ts.size()) throw std::invalid_argument("welch_asd: segment longer than the series");
  if (!(opt.overlap >= 0.0 && opt.overlap < 1.0)) throw std::invalid_argument("welch_asd: overlap must be in [0, 1)");

  const auto step = std::max<std::size_t>(1, seg - static_cast<std::size_t>(std::llround(opt.overlap * seg)));
  const std::size_t n_seg = (ts.size() - seg) / step + 1;
  const auto window = make_window(opt.window, seg);
  const double sum_w = std::accumulate(window.begin(), window.end(), 0.0);
  const double sum_w2 = std::inner_product(window.begin(), window.end(), window.begin(), 0.0);
  const double scale = 1.0 / (ts.sample_rate * sum_w2);

  fft::RealFft fft(seg);
  std::vector<double> psd(fft.bins(), 0.0);
  std::vector<double> buf(seg);
  for (std::size_t s = 0; s < n_seg; ++s) {
    const auto first = ts.samples.begin() + static_cast<std::ptrdiff_t>(s * step);
    std::copy(first, first + static_cast<std::ptrdiff_t>(seg), buf.begin());
    if (opt.detrend_mean) {
      const double mean = std::accumulate(buf.begin(), buf.end(), 0.0) / static_cast<double>(seg);
      for (auto& v : buf) v -= mean;
    }
    for (std::size_t i = 0; i < seg; ++i) buf[i] *= window[i];
    const auto spec = fft.forward(buf);
    for (std::size_t k = 0; k < spec.size(); ++k) psd[k] += std::norm(spec[k]) * scale;
  }

  std::vector<double> freqs(psd.size()), asd(psd.size());
  for (std::size_t k = 0; k < psd.size(); ++k) {
    freqs[k] = static_cast<double>(k) * ts.sample_rate / static_cast<double>(seg);
    asd[k] = std::sqrt(psd[k] / static_cast<double>(n_seg));
  }
  SpectrumMeta meta;
  meta.window = window_name(opt.window);
  meta.segment_length = seg;
  meta.overlap = opt.overlap;
  meta.averages = n_seg;
  meta.enbw_bins = static_cast<double>(seg) * sum_w2 / (sum_w * sum_w);
  meta.enbw_hz = ts.sample_rate * sum_w2 / (sum_w * sum_w);
  return Spectrum(std::move(freqs), std::move(asd), ts.unit, std::move(meta));
}

/// ∫ PSD over the full double-sided frequency axis (the variance of a
/// zero-mean stationary input).
inline double total_power(const Spectrum& s) {
  if (s.size() < 2) throw std::invalid_argument("total_power: spectrum too short");
  const double df = s.resolution();
  const auto& a = s.asd();
  const bool has_nyquist = s.meta().segment_length % 2 == 0;
  double p = a.front() * a.front();
  for (std::size_t k = 1; k + 1 < a.size(); ++k) p += 2.0 * a[k] * a[k];
  p += (has_nyquist ? 1.0 : 2.0) * a.back() * a.back();
  return p * df;
}

/// Power (both sidebands) in the bins whose frequency lies in [lo, hi].
inline double band_power(const Spectrum& s, double lo, double hi) {
  double p = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double f = s.freqs()[k];
    if (f >= lo && f <= hi) p += (f == 0.0 ? 1.0 : 2.0) * s.asd()[k] * s.asd()[k];
  }
  return p * s.resolution();
}

inline std::vector<double> band_values(const Spectrum& s, double lo, double hi) {
  std::vector<double> v;
  for (std::size_t k = 0; k < s.size(); ++k)
    if (s.freqs()[k] >= lo && s.freqs()[k] <= hi) v.push_back(s.asd()[k]);
  if (v.empty()) throw std::invalid_argument("band statistic: no spectral bins inside the band");
  return v;
}

inline double band_mean(const Spectrum& s, double lo, double hi) {
  const auto v = band_values(s, lo, hi);
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double band_median(const Spectrum& s, double lo, double hi) {
  auto v = band_values(s, lo, hi);
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

// ---------------------------------------------------------------------------
// Lock-in demodulation

struct LockinOptions {
  double reference_freq = 20.0e3;  // Hz
  double phase = 0.0;              // rad
  double lpf_cutoff = 1.0e3;       // Hz, -3 dB point of each pass
  int lpf_order = 4;
  std::size_t decimation = 0;  // 0 selects fs / (10·cutoff)
};

struct LockinOutput {
  TimeSeries signal;
  double lpf_cutoff = 0.0;  // Hz
  double enbw = 0.0;        // Hz, equivalent noise bandwidth of the zero-phase low-pass
  std::size_t decimation = 1;
};

/// ±1 square-wave reference: +1 on the first half of each period.
inline double square_reference(double t, double freq, double phase) {
  double cycle = freq * t + phase / constants::kTwoPi;
  cycle -= std::floor(cycle);
  return cycle < 0.5 ? 1.0 : -1.0;
}

inline LockinOutput lockin_demodulate(const TimeSeries& raw, const LockinOptions& opt) {
  raw.validate();
  if (!(raw.sample_rate > 2.0 * opt.reference_freq))
    throw std::invalid_argument("lockin_demodulate: sample rate must exceed twice the reference frequency");
  if (!(opt.lpf_cutoff > 0.0) || !(opt.lpf_cutoff < opt.reference_freq))
    throw std::invalid_argument("lockin_demodulate: low-pass cutoff must lie in (0, reference_freq)");

  std::vector<double> mixed(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    mixed[i] = raw.samples[i] * square_reference(raw.time(i), opt.reference_freq, opt.phase);

  const auto lpf = iir::butterworth_lowpass(opt.lpf_order, opt.lpf_cutoff, raw.sample_rate);
  const auto filtered = lpf.apply_zero_phase(mixed, iir::SosFilter::Init::steady);

  std::size_t dec = opt.decimation;
  if (dec == 0) dec = std::max<std::size_t>(1, static_cast<std::size_t>(raw.sample_rate / (10.0 * opt.lpf_cutoff)));

  LockinOutput out;
  out.decimation = dec;
  out.lpf_cutoff = opt.lpf_cutoff;
  out.signal.sample_rate = raw.sample_rate / static_cast<double>(dec);
  out.signal.unit = raw.unit;
  out.signal.start_time = raw.start_time;
  for (std::size_t i = 0; i < filtered.size(); i += dec) out.signal.samples.push_back(filtered[i]);

  // ENBW of |H|⁴ by trapezoidal integration up to 20 cutoffs.
  const double f_max = std::min(20.0 * opt.lpf_cutoff, 0.5 * raw.sample_rate);
  constexpr int kSteps = 20000;
  double acc = 0.0;
  for (int i = 0; i <= kSteps; ++i) {
    const double f = f_max * i / kSteps;
    const double g = std::norm(lpf.response(f, raw.sample_rate));
    acc += (i == 0 || i == kSteps ? 0.5 : 1.0) * g * g;
  }
  out.enbw = acc * f_max / kSteps;
  return out;
}

// ---------------------------------------------------------------------------
// Narrowband filter

struct FilterSpec {
  double center = 77.0;  // Hz
  double enbw = 0.8;     // Hz
  int order = 2;         // Butterworth prototype order
  bool zero_phase = true;

  void validate() const {
    if (!(enbw > 0.0 && enbw < center)) throw std::invalid_argument("FilterSpec: need 0 < enbw < center");
    if (order < 2) throw std::invalid_argument("FilterSpec: order must be >= 2");
  }
};

/// Butterworth band-pass whose half-power width is tuned so that the
/// realized power-gain integral ∫₀^{fs/2}|G(f)|²df equals `spec.enbw`,
/// with G the overall (one- or two-pass) response.
class NarrowbandFilter {
 public:
  NarrowbandFilter(const FilterSpec& spec, double sample_rate) : spec_(spec), fs_(sample_rate) {
    spec.validate();
    if (!(sample_rate > 2.0 * spec.center))
      throw std::invalid_argument("NarrowbandFilter: sample rate must exceed twice the center frequency");
    double width = spec.enbw;
    for (int it = 0; it < 50; ++it) {
      design(width);
      const double realized = integrate_enbw(width);
      const double ratio = spec.enbw / realized;
      width *= ratio;
      if (std::abs(ratio - 1.0) < 1e-10) break;
    }
    design(width);
    enbw_ = integrate_enbw(width);
  }

  const FilterSpec& spec() const { return spec_; }
  double sample_rate() const { return fs_; }
  double half_power_width() const { return width_; }
  double enbw() const { return enbw_; }
  int passes() const { return spec_.zero_phase ? 2 : 1; }

  /// Amplitude gain of the complete (one- or two-pass) filter.
  double gain(double freq) const { return std::pow(std::abs(sos_.response(freq, fs_)), passes()); }

  /// Time for start-up transients to decay by e⁻⁸.
  double settle_time() const { return -8.0 / (fs_ * std::log(sos_.max_pole_radius())); }

  std::vector<double> apply(std::span<const double> x) const {
    return spec_.zero_phase ? sos_.apply_zero_phase(x) : sos_.apply(x);
  }

 private:
  void design(double width) {
    width_ = width;
    const double lo = std::max(1e-6, spec_.center - 0.5 * width);
    sos_ = iir::butterworth_bandpass(spec_.order, lo, spec_.center + 0.5 * width, fs_, spec_.center);
  }

  double integrate_enbw(double width) const {
    // Composite Simpson over ±400 half-power widths (the tails beyond are
    // below 1e-20 of the peak for order >= 2) plus coarse outer tails.
    const double half_span = 400.0 * width;
    const double a = std::max(0.0, spec_.center - half_span);
    const double b = std::min(0.5 * fs_, spec_.center + half_span);
    auto power = [&](double f) {
      const double g = gain(f);
      return g * g;
    };
    auto simpson = [&](double lo, double hi, int n) {
      if (!(hi > lo)) return 0.0;
      if (n % 2) ++n;
      const double h = (hi - lo) / n;
      double s = power(lo) + power(hi);
      for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * power(lo + i * h);
      return s * h / 3.0;
    };
    return simpson(a, b, 160000) + simpson(0.0, a, 2000) + simpson(b, 0.5 * fs_, 2000);
  }

  FilterSpec spec_;
  double fs_;
  double width_ = 0.0;
  double enbw_ = 0.0;
  iir::SosFilter sos_;
};

struct NarrowbandResult {
  TimeSeries filtered;
  std::vector<double> gain_freqs;  // Hz
  std::vector<double> gain;        // amplitude gain at gain_freqs
  double enbw = 0.0;               // Hz, realized
  double settle_time = 0.0;        // s
};

inline NarrowbandResult narrowband_filter(const TimeSeries& ts, const FilterSpec& spec,
                                          std::span<const double> gain_grid) {
  ts.validate();
  const NarrowbandFilter filter(spec, ts.sample_rate);
  NarrowbandResult out;
  out.filtered = TimeSeries{ts.sample_rate, filter.apply(ts.samples), ts.unit, ts.start_time};
  out.gain_freqs.assign(gain_grid.begin(), gain_grid.end());
  for (double f : gain_grid) out.gain.push_back(filter.gain(f));
  out.enbw = filter.enbw();
  out.settle_time = filter.settle_time();
  return out;
}

// ---------------------------------------------------------------------------
// Tone fitting and noise arithmetic

struct ToneFit {
  double amplitude = 0.0;
  double amplitude_sigma = 0.0;
  double phase = 0.0;  // rad, model A·sin(2πft + φ) + offset
  double phase_sigma = 0.0;
  double offset = 0.0;
  double residual_rms = 0.0;
};

/// Linear least squares on {sin, cos, 1} at a fixed known frequency.
/// Uncertainties come from the residual covariance and therefore assume
/// uncorrelated residuals.
inline ToneFit fit_tone(const TimeSeries& ts, double freq) {
  ts.validate();
  if (!(freq > 0.0)) throw std::invalid_argument("fit_tone: frequency must be > 0");
  if (ts.duration() * freq < 5.0) throw std::invalid_argument("fit_tone: record must span at least 5 periods");

  Eigen::Matrix3d xtx = Eigen::Matrix3d::Zero();
  Eigen::Vector3d xty = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double w = constants::kTwoPi * freq * ts.time(i);
    const Eigen::Vector3d row(std::sin(w), std::cos(w), 1.0);
    xtx += row * row.transpose();
    xty += row * ts.samples[i];
  }
  const Eigen::Matrix3d inv = xtx.inverse();
  const Eigen::Vector3d coef = inv * xty;
  double rss = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double w = constants::kTwoPi * freq * ts.time(i);
    const double r = ts.samples[i] - (coef[0] * std::sin(w) + coef[1] * std::cos(w) + coef[2]);
    rss += r * r;
  }
  const double n = static_cast<double>(ts.size());
  const double s2 = n > 3.0 ? rss / (n - 3.0) : 0.0;
  const Eigen::Matrix3d cov = inv * s2;

  ToneFit fit;
  const double a = coef[0], b = coef[1];
  fit.amplitude = std::hypot(a, b);
  fit.phase = std::atan2(b, a);
  fit.offset = coef[2];
  fit.residual_rms = std::sqrt(rss / n);
  const double va = cov(0, 0), vb = cov(1, 1), cab = cov(0, 1);
  if (fit.amplitude > 0.0) {
    const double a2 = fit.amplitude * fit.amplitude;
    fit.amplitude_sigma = std::sqrt(std::max(0.0, (a * a * va + b * b * vb + 2.0 * a * b * cab) / a2));
    fit.phase_sigma = std::sqrt(std::max(0.0, (b * b * va + a * a * vb - 2.0 * a * b * cab) / (a2 * a2)));
  } else {
    fit.amplitude_sigma = std::sqrt(std::max(0.0, 0.5 * (va + vb)));
    fit.phase_sigma = std::numeric_limits<double>::infinity();
  }
  return fit;
}

/// RMS noise in a band of equivalent noise bandwidth `enbw` for a
/// double-sided ASD: both sidebands contribute, hence √(2·enbw).
inline double rms_from_asd(double asd, double enbw) {
  if (!(asd >= 0.0) || !(enbw > 0.0)) throw std::invalid_argument("rms_from_asd: inputs must be positive");
  return asd * std::sqrt(2.0 * enbw);
}

/// Standard deviation of a fitted tone amplitude (or either quadrature)
/// over a record of length T in locally white noise of double-sided ASD
/// `asd`: the fit acts as a filter of ENBW 1/T.
inline double tone_amplitude_sigma(double asd, double record_length) {
  if (!(record_length > 0.0)) throw std::invalid_argument("tone_amplitude_sigma: record length must be > 0");
  return rms_from_asd(asd, 1.0 / record_length);
}

inline double snr(double amplitude, double rms_noise) {
  if (!(rms_noise > 0.0)) throw std::invalid_argument("snr: rms_noise must be > 0");
  return amplitude / rms_noise;
}

}  // namespace nvmag::dsp
