#pragma once

// Scenario configuration: a JSON tree in SI units. Missing keys keep their
// defaults (the reference operating point); unknown keys are errors.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "nvmag/dsp.hpp"
#include "nvmag/noise_chain.hpp"
#include "nvmag/phantom.hpp"
#include "nvmag/sequence.hpp"
#include "nvmag/spin_model.hpp"

namespace nvmag::app {

inline constexpr const char* kVersion = "1.0.0";

using json = nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OdmrSettings {
  double span = 25.0e6;  // Hz either side of D
  double step = 10.0e3;  // Hz
  spin::OdmrOptions options{};
};

struct RamseySettings {
  double detuning = 5.0e6;  // Hz
  double sq_t2_star = 5.5e-6;
  double dq_t2_star = 4.4e-6;
  double stretch = 1.0;
  double contrast = 1.0;
  double tau_max = 16.0e-6;
  double tau_step = 10.0e-9;
  double noise_sigma = 0.0;  // per-point Gaussian noise on the fringe; 0 = noiseless
  double max_detuning = 10.0e6;
};

struct SensitivitySettings {
  double measured_slope = 761.0e-12;       // A/Hz
  double target_band_asd = 2.93e-12;      // T/√Hz, sensitive-mode calibration target
  double band_lo = 100.0;                 // Hz
  double band_hi = 400.0;                 // Hz
  bool calibrate_excess = true;
  double duration = 60.0;      // s
  double sample_rate = 4000.0;  // Hz
  double response_span = 200.0e3;  // Hz
  double response_step = 100.0;    // Hz
  sequence::ResponseOptions response{};
};

struct PhantomSettings {
  phantom::PhantomDrive drive{};
  phantom::PhantomGeometry geometry{};
  double scan_extent = 2.0e-3;  // m
  std::size_t scan_points = 21;
  double measured_amplitude = 77.7e-12;   // T, fitted phantom amplitude
  double measured_noise_asd = 14.3e-12;   // T/√Hz at the drive frequency, phantom setup
  double comparison_noise_asd = 2.0e-12;  // T/√Hz, comparison magnetometer
  double near_distance = 2.5e-3;          // m
  double far_distance = 7.1e-3;           // m
  double duration = 40.0;       // s
  double sample_rate = 2000.0;  // Hz
  int seeds = 100;
};

struct Config {
  std::string name = "paper_default";
  std::uint64_t seed = 1;
  std::string output_dir = "nvmag_out";
  spin::EnsembleParams ensemble{};
  spin::BiasField bias{};
  OdmrSettings odmr{};
  RamseySettings ramsey{};
  sequence::SequenceConfig sequence{};
  noise::NoiseModel noise{};
  SensitivitySettings sensitivity{};
  dsp::WelchOptions welch{};
  dsp::FilterSpec filter{};
  PhantomSettings phantom{};

  /// Noise model with the excess level calibrated when requested.
  noise::NoiseModel resolved_noise() const {
    noise::NoiseModel m = noise;
    if (sensitivity.calibrate_excess)
      m.excess.level_at_corner =
          noise::calibrate_excess_level(m, sensitivity.target_band_asd, sensitivity.band_lo, sensitivity.band_hi);
    return m;
  }

  /// Runs every module-level validation so that no command starts on a bad config.
  void validate() const {
    auto wrap = [](const char* section, auto&& fn) {
      try {
        fn();
      } catch (const std::exception& e) {
        throw ConfigError(std::string(section) + ": " + e.what());
      }
    };
    wrap("ensemble", [&] { ensemble.validate(); });
    wrap("bias", [&] { bias.validate(); });
    wrap("odmr", [&] {
      if (!(odmr.span > 0.0 && odmr.step > 0.0 && odmr.step < odmr.span))
        throw std::invalid_argument("need 0 < step_hz < span_hz");
      if (!(odmr.options.linewidth > 0.0)) throw std::invalid_argument("linewidth_hz must be > 0");
      for (double w : odmr.options.axis_weights)
        if (!(w >= 0.0)) throw std::invalid_argument("axis_weights must be >= 0");
    });
    wrap("ramsey", [&] {
      spin::RamseyFringeParams p;
      p.detuning = ramsey.detuning;
      p.stretch = ramsey.stretch;
      p.contrast = ramsey.contrast;
      p.t2_star = ramsey.sq_t2_star;
      p.validate();
      p.t2_star = ramsey.dq_t2_star;
      p.validate();
      if (!(ramsey.tau_step > 0.0 && ramsey.tau_max > 8.0 * ramsey.tau_step))
        throw std::invalid_argument("need tau_step_s > 0 and at least 8 samples up to tau_max_s");
      if (!(ramsey.noise_sigma >= 0.0)) throw std::invalid_argument("noise_sigma must be >= 0");
      if (!(ramsey.max_detuning > 0.0)) throw std::invalid_argument("max_detuning_hz must be > 0");
    });
    wrap("sequence", [&] { sequence.validate(); });
    wrap("noise", [&] { noise.validate(); });
    wrap("sensitivity", [&] {
      if (!(sensitivity.measured_slope > 0.0)) throw std::invalid_argument("measured_slope_a_per_hz must be > 0");
      if (!(sensitivity.band_lo > 0.0 && sensitivity.band_hi > sensitivity.band_lo))
        throw std::invalid_argument("need 0 < band_lo_hz < band_hi_hz");
      if (!(sensitivity.band_hi < 0.5 * sensitivity.sample_rate))
        throw std::invalid_argument("band_hi_hz must lie below Nyquist");
      if (!(sensitivity.response_span > 0.0 && sensitivity.response_step > 0.0))
        throw std::invalid_argument("response span and step must be > 0");
      double wsum = 0.0;
      for (double w : sensitivity.response.hyperfine_weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("hyperfine_weights must be >= 0");
        wsum += w;
      }
      if (!(wsum > 0.0)) throw std::invalid_argument("hyperfine_weights must sum to > 0");
      if (!std::isfinite(sensitivity.response.common_mode)) throw std::invalid_argument("common_mode_a must be finite");
      noise::Scenario sc;
      sc.duration = sensitivity.duration;
      sc.sample_rate = sensitivity.sample_rate;
      sc.validate(noise);
    });
    wrap("welch", [&] {
      if (!(welch.overlap >= 0.0 && welch.overlap < 1.0)) throw std::invalid_argument("overlap must be in [0, 1)");
    });
    wrap("filter", [&] { filter.validate(); });
    wrap("phantom", [&] {
      phantom.drive.validate();
      phantom.geometry.aperture.validate();
      if (!(phantom.geometry.dipole_direction.norm() > 0.0))
        throw std::invalid_argument("dipole_direction must be nonzero");
      if (phantom.geometry.quadrature_n < 2) throw std::invalid_argument("quadrature_n must be >= 2");
      if (phantom.scan_points < 2) throw std::invalid_argument("scan_points must be >= 2");
      if (!(phantom.scan_extent > 0.0)) throw std::invalid_argument("scan_extent_m must be > 0");
      if (!(phantom.near_distance > 0.0 && phantom.far_distance > 0.0))
        throw std::invalid_argument("distances must be > 0");
      if (phantom.seeds < 1) throw std::invalid_argument("seeds must be >= 1");
      if (!(phantom.sample_rate > 2.0 * filter.center))
        throw std::invalid_argument("sample_rate_hz must exceed twice the filter center");
      noise::Scenario sc;
      sc.duration = phantom.duration;
      sc.sample_rate = phantom.sample_rate;
      sc.signal = noise::InjectedSignal{phantom.drive.frequency, phantom.measured_amplitude, 0.0};
      sc.validate(noise);
    });
  }
};

namespace detail {

// Reads keys from one JSON object and remembers which were consumed, so
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(where() + "expected an object");
  }

  template <typename T>
  void get(const std::string& key, T& target) {
    seen_.insert(key);
    if (!node_.contains(key)) return;
    const json& v = node_.at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError("expected a boolean");
        target = v.get<bool>();
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError("expected a string");
        target = v.get<std::string>();
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError("expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.is_number_unsigned() || v.get<std::int64_t>() >= 0) {
            target = v.get<T>();
          } else {
            throw ConfigError("expected a non-negative integer");
          }
        } else {
          target = v.get<T>();
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigError("expected a number");
        target = v.get<double>();
      } else if constexpr (std::is_same_v<T, phantom::Vec3>) {
        if (!v.is_array() || v.size() != 3) throw ConfigError("expected an array of 3 numbers");
        for (std::size_t i = 0; i < 3; ++i) {
          if (!v[i].is_number()) throw ConfigError("expected an array of 3 numbers");
          target[static_cast<Eigen::Index>(i)] = v[i].get<double>();
        }
      } else {
        constexpr std::size_t n = std::tuple_size_v<T>;
        const std::string what = "expected an array of " + std::to_string(n) + " numbers";
        if (!v.is_array() || v.size() != n) throw ConfigError(what);
        for (std::size_t i = 0; i < n; ++i) {
          if (!v[i].is_number()) throw ConfigError(what);
          target[i] = v[i].get<double>();
        }
      }
    } catch (const ConfigError& e) {
      throw ConfigError(where() + key + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(where() + key + ": " + e.what());
    }
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  const json* child(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key) ? &node_.at(key) : nullptr;
  }

  std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& item : node_.items())
      if (!seen_.count(item.key())) throw ConfigError(where() + "unknown key '" + item.key() + "'");
  }

 private:
  std::string where() const { return "config" + (path_.empty() ? std::string() : "." + path_) + ": "; }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Fn>
void with_section(Section& parent, const std::string& key, Fn&& fn) {
  if (const json* node = parent.child(key)) {
    Section s(*node, parent.child_path(key));
    fn(s);
    s.finish();
  }
}

inline double phase_of(const std::string& axis) {
  if (axis == "+x") return 0.0;
  if (axis == "+y") return 0.5 * constants::kPi;
  if (axis == "-x") return constants::kPi;
  if (axis == "-y") return 1.5 * constants::kPi;
  throw ConfigError("config.sequence.phase_cycle: unknown pulse phase '" + axis + "' (use +x, -x, +y, -y)");
}

inline std::string axis_of(double phase) {
  const double p = std::remainder(phase, constants::kTwoPi);
  if (std::abs(p) < 1e-12) return "+x";
  if (std::abs(p - 0.5 * constants::kPi) < 1e-12) return "+y";
  if (std::abs(std::abs(p) - constants::kPi) < 1e-12) return "-x";
  if (std::abs(p + 0.5 * constants::kPi) < 1e-12) return "-y";
  throw ConfigError("phase_cycle: phase is not a multiple of pi/2");
}

inline sequence::PhasePair parse_phase_pair(const std::string& label) {
  const auto slash = label.find('/');
  if (slash == std::string::npos)
    throw ConfigError("config.sequence.phase_cycle: label '" + label + "' must look like '+x/-x'");
  return {label, phase_of(label.substr(0, slash)), phase_of(label.substr(slash + 1))};
}

inline json vec_json(const phantom::Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace detail

inline Config config_from_json(const json& root) {
  Config c;
  detail::Section top(root, "");
  top.get("name", c.name);
  top.get("seed", c.seed);
  top.get("output_dir", c.output_dir);

  detail::with_section(top, "ensemble", [&](detail::Section& s) {
    auto& e = c.ensemble;
    s.get("zero_field_splitting_hz", e.zero_field_splitting);
    s.get("gyromagnetic_ratio_hz_per_t", e.gyromagnetic_ratio);
    s.get("hyperfine_parallel_hz", e.hyperfine_parallel);
    s.get("photocurrent_a", e.photocurrent);
    s.get("contrast", e.contrast);
    s.get("t2_star_s", e.t2_star);
    s.get("stretch", e.stretch);
    s.get("delta_ms", e.delta_ms);
  });
  detail::with_section(top, "bias", [&](detail::Section& s) {
    s.get("magnitude_t", c.bias.magnitude);
    s.get("axis", c.bias.axis);
  });
  detail::with_section(top, "odmr", [&](detail::Section& s) {
    s.get("span_hz", c.odmr.span);
    s.get("step_hz", c.odmr.step);
    s.get("linewidth_hz", c.odmr.options.linewidth);
    s.get("depth", c.odmr.options.depth);
    s.get("axis_weights", c.odmr.options.axis_weights);
  });
  detail::with_section(top, "ramsey", [&](detail::Section& s) {
    auto& r = c.ramsey;
    s.get("detuning_hz", r.detuning);
    s.get("sq_t2_star_s", r.sq_t2_star);
    s.get("dq_t2_star_s", r.dq_t2_star);
    s.get("stretch", r.stretch);
    s.get("contrast", r.contrast);
    s.get("tau_max_s", r.tau_max);
    s.get("tau_step_s", r.tau_step);
    s.get("noise_sigma", r.noise_sigma);
    s.get("max_detuning_hz", r.max_detuning);
  });
  detail::with_section(top, "sequence", [&](detail::Section& s) {
    auto& q = c.sequence;
    s.get("laser_pulse_s", q.laser_pulse);
    s.get("tau_s", q.tau);
    s.get("mw_pulse_total_s", q.mw_pulse_total);
    s.get("lockin_freq_hz", q.lockin_freq);
    if (const json* pc = s.child("phase_cycle")) {
      if (!pc->is_array() || pc->size() != 4)
        throw ConfigError("config.sequence.phase_cycle: expected exactly 4 labels");
      for (std::size_t k = 0; k < 4; ++k) {
        if (!(*pc)[k].is_string()) throw ConfigError("config.sequence.phase_cycle: labels must be strings");
        q.phase_cycle[k] = detail::parse_phase_pair((*pc)[k].get<std::string>());
      }
    }
  });
  detail::with_section(top, "noise", [&](detail::Section& s) {
    auto& n = c.noise;
    s.get("shot_floor_t_per_rthz", n.shot_floor);
    s.get("shot_enabled", n.shot_enabled);
    s.get("harmonics_enabled", n.harmonics_enabled);
    s.get("excess_enabled", n.excess_enabled);
    if (const json* hs = s.child("harmonics")) {
      if (!hs->is_array()) throw ConfigError("config.noise.harmonics: expected an array");
      n.harmonics.clear();
      for (std::size_t i = 0; i < hs->size(); ++i) {
        detail::Section h((*hs)[i], "noise.harmonics[" + std::to_string(i) + "]");
        noise::HarmonicLine line{0.0, 0.0, 0.0};
        h.get("frequency_hz", line.frequency);
        h.get("amplitude_t", line.amplitude);
        h.get("phase_rad", line.phase);
        h.finish();
        n.harmonics.push_back(line);
      }
    }
    detail::with_section(s, "excess", [&](detail::Section& x) {
      x.get("exponent", n.excess.exponent);
      x.get("corner_hz", n.excess.corner_freq);
      x.get("level_t_per_rthz", n.excess.level_at_corner);
    });
  });
  detail::with_section(top, "sensitivity", [&](detail::Section& s) {
    auto& v = c.sensitivity;
    s.get("measured_slope_a_per_hz", v.measured_slope);
    s.get("target_band_asd_t_per_rthz", v.target_band_asd);
    s.get("band_lo_hz", v.band_lo);
    s.get("band_hi_hz", v.band_hi);
    s.get("calibrate_excess", v.calibrate_excess);
    s.get("duration_s", v.duration);
    s.get("sample_rate_hz", v.sample_rate);
    s.get("response_span_hz", v.response_span);
    s.get("response_step_hz", v.response_step);
    s.get("hyperfine_weights", v.response.hyperfine_weights);
    s.get("common_mode_a", v.response.common_mode);
  });
  detail::with_section(top, "welch", [&](detail::Section& s) {
    s.get("segment_length", c.welch.segment_length);
    s.get("overlap", c.welch.overlap);
    std::string window = dsp::window_name(c.welch.window);
    s.get("window", window);
    if (window == "hann") {
      c.welch.window = dsp::Window::hann;
    } else if (window == "rectangular") {
      c.welch.window = dsp::Window::rectangular;
    } else {
      throw ConfigError("config.welch.window: expected 'hann' or 'rectangular'");
    }
  });
  detail::with_section(top, "filter", [&](detail::Section& s) {
    s.get("center_hz", c.filter.center);
    s.get("enbw_hz", c.filter.enbw);
    s.get("order", c.filter.order);
    s.get("zero_phase", c.filter.zero_phase);
  });
  detail::with_section(top, "phantom", [&](detail::Section& s) {
    auto& p = c.phantom;
    s.get("current_a", p.drive.current);
    s.get("frequency_hz", p.drive.frequency);
    s.get("dipole_length_m", p.drive.dipole_length);
    s.get("phase_rad", p.drive.phase);
    s.get("dipole_direction", p.geometry.dipole_direction);
    s.get("dipole_position_m", p.geometry.dipole_position);
    s.get("sensor_center_m", p.geometry.aperture.center);
    s.get("aperture_side_u_m", p.geometry.aperture.side_u);
    s.get("aperture_side_v_m", p.geometry.aperture.side_v);
    s.get("sensitive_axis", p.geometry.aperture.sensitive_axis);
    s.get("quadrature_n", p.geometry.quadrature_n);
    s.get("scan_extent_m", p.scan_extent);
    s.get("scan_points", p.scan_points);
    s.get("measured_amplitude_t", p.measured_amplitude);
    s.get("measured_noise_asd_t_per_rthz", p.measured_noise_asd);
    s.get("comparison_noise_asd_t_per_rthz", p.comparison_noise_asd);
    s.get("near_distance_m", p.near_distance);
    s.get("far_distance_m", p.far_distance);
    s.get("duration_s", p.duration);
    s.get("sample_rate_hz", p.sample_rate);
    s.get("seeds", p.seeds);
  });
  top.finish();
  return c;
}

/// Canonical, fully resolved form: every key with its effective value.
inline json config_to_json(const Config& c) {
  json j;
  j["name"] = c.name;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  const auto& e = c.ensemble;
  j["ensemble"] = {{"zero_field_splitting_hz", e.zero_field_splitting},
                   {"gyromagnetic_ratio_hz_per_t", e.gyromagnetic_ratio},
                   {"hyperfine_parallel_hz", e.hyperfine_parallel},
                   {"photocurrent_a", e.photocurrent},
                   {"contrast", e.contrast},
                   {"t2_star_s", e.t2_star},
                   {"stretch", e.stretch},
                   {"delta_ms", e.delta_ms}};
  j["bias"] = {{"magnitude_t", c.bias.magnitude}, {"axis", detail::vec_json(c.bias.axis)}};
  j["odmr"] = {{"span_hz", c.odmr.span},
               {"step_hz", c.odmr.step},
               {"linewidth_hz", c.odmr.options.linewidth},
               {"depth", c.odmr.options.depth},
               {"axis_weights", c.odmr.options.axis_weights}};
  const auto& r = c.ramsey;
  j["ramsey"] = {{"detuning_hz", r.detuning},   {"sq_t2_star_s", r.sq_t2_star}, {"dq_t2_star_s", r.dq_t2_star},
                 {"stretch", r.stretch},        {"contrast", r.contrast},       {"tau_max_s", r.tau_max},
                 {"tau_step_s", r.tau_step},    {"noise_sigma", r.noise_sigma}, {"max_detuning_hz", r.max_detuning}};
  json cycle = json::array();
  for (const auto& pair : c.sequence.phase_cycle)
    cycle.push_back(detail::axis_of(pair.first) + "/" + detail::axis_of(pair.second));
  j["sequence"] = {{"laser_pulse_s", c.sequence.laser_pulse},
                   {"tau_s", c.sequence.tau},
                   {"mw_pulse_total_s", c.sequence.mw_pulse_total},
                   {"lockin_freq_hz", c.sequence.lockin_freq},
                   {"phase_cycle", cycle}};
  json harmonics = json::array();
  for (const auto& h : c.noise.harmonics)
    harmonics.push_back({{"frequency_hz", h.frequency}, {"amplitude_t", h.amplitude}, {"phase_rad", h.phase}});
  j["noise"] = {{"shot_floor_t_per_rthz", c.noise.shot_floor},
                {"shot_enabled", c.noise.shot_enabled},
                {"harmonics_enabled", c.noise.harmonics_enabled},
                {"excess_enabled", c.noise.excess_enabled},
                {"harmonics", harmonics},
                {"excess",
                 {{"exponent", c.noise.excess.exponent},
                  {"corner_hz", c.noise.excess.corner_freq},
                  {"level_t_per_rthz", c.noise.excess.level_at_corner}}}};
  const auto& v = c.sensitivity;
  j["sensitivity"] = {{"measured_slope_a_per_hz", v.measured_slope},
                      {"target_band_asd_t_per_rthz", v.target_band_asd},
                      {"band_lo_hz", v.band_lo},
                      {"band_hi_hz", v.band_hi},
                      {"calibrate_excess", v.calibrate_excess},
                      {"duration_s", v.duration},
                      {"sample_rate_hz", v.sample_rate},
                      {"response_span_hz", v.response_span},
                      {"response_step_hz", v.response_step},
                      {"hyperfine_weights", v.response.hyperfine_weights},
                      {"common_mode_a", v.response.common_mode}};
  j["welch"] = {{"segment_length", c.welch.segment_length},
                {"overlap", c.welch.overlap},
                {"window", dsp::window_name(c.welch.window)}};
  j["filter"] = {{"center_hz", c.filter.center},
                 {"enbw_hz", c.filter.enbw},
                 {"order", c.filter.order},
                 {"zero_phase", c.filter.zero_phase}};
  const auto& p = c.phantom;
  j["phantom"] = {{"current_a", p.drive.current},
                  {"frequency_hz", p.drive.frequency},
                  {"dipole_length_m", p.drive.dipole_length},
                  {"phase_rad", p.drive.phase},
                  {"dipole_direction", detail::vec_json(p.geometry.dipole_direction)},
                  {"dipole_position_m", detail::vec_json(p.geometry.dipole_position)},
                  {"sensor_center_m", detail::vec_json(p.geometry.aperture.center)},
                  {"aperture_side_u_m", p.geometry.aperture.side_u},
                  {"aperture_side_v_m", p.geometry.aperture.side_v},
                  {"sensitive_axis", detail::vec_json(p.geometry.aperture.sensitive_axis)},
                  {"quadrature_n", p.geometry.quadrature_n},
                  {"scan_extent_m", p.scan_extent},
                  {"scan_points", p.scan_points},
                  {"measured_amplitude_t", p.measured_amplitude},
                  {"measured_noise_asd_t_per_rthz", p.measured_noise_asd},
                  {"comparison_noise_asd_t_per_rthz", p.comparison_noise_asd},
                  {"near_distance_m", p.near_distance},
                  {"far_distance_m", p.far_distance},
                  {"duration_s", p.duration},
                  {"sample_rate_hz", p.sample_rate},
                  {"seeds", p.seeds}};
  return j;
}

/// 64-bit FNV-1a of the canonical config dump, as 16 hex digits.
/// The output directory is not part of the scenario and is left out.
inline std::string config_hash(const Config& c) {
  json j = config_to_json(c);
  j.erase("output_dir");
  const std::string text = j.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

inline Config parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  Config c = config_from_json(root);
  c.validate();
  return c;
}

inline Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace nvmag::app
