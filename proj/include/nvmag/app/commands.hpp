#pragma once

// CLI subcommands. Each one computes all of its outputs in memory and only
// then writes them (temp file + rename), so a failed run leaves nothing
// behind.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "nvmag/app/acceptance.hpp"
#include "nvmag/app/experiments.hpp"
#include "nvmag/app/report.hpp"
#include "nvmag/app/svg.hpp"
#include "nvmag/io.hpp"

namespace nvmag::app {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitAcceptance = 2 };

struct OutputFile {
  std::string name;
  std::string content;
};

struct CommandResult {
  std::vector<OutputFile> files;
  std::string summary;  // printed to stdout
  int exit_code = kExitOk;
};

struct RunOptions {
  bool plot = false;
};

inline io::Header provenance(const Config& c, const std::string& command) {
  return {"nvmag " + std::string(kVersion), "command: " + command, "scenario: " + c.name,
          "config_hash: " + config_hash(c), "seed: " + std::to_string(c.seed)};
}

inline json provenance_json(const Config& c, const std::string& command) {
  return {{"tool", "nvmag"},
          {"version", kVersion},
          {"command", command},
          {"scenario", c.name},
          {"config_hash", config_hash(c)},
          {"seed", c.seed}};
}

inline std::string svg_with_header(const Config& c, const std::string& command, const std::string& body) {
  std::string out = "<!--";
  for (const auto& line : provenance(c, command)) out += ' ' + line + ';';
  return out + " -->\n" + body;
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

inline void write_outputs(const std::filesystem::path& dir, const std::vector<OutputFile>& files) {
  std::filesystem::create_directories(dir);
  for (const auto& f : files) io::write_file_atomic(dir / f.name, f.content);
}

// --- odmr ------------------------------------------------------------------

/// Number of distinct resonance frequencies (lines closer than 1 Hz coincide).
inline std::size_t distinct_lines(const std::vector<spin::ResonanceLine>& lines) {
  std::vector<double> f;
  for (const auto& l : lines) f.push_back(l.frequency);
  std::sort(f.begin(), f.end());
  std::size_t n = f.empty() ? 0 : 1;
  for (std::size_t i = 1; i < f.size(); ++i)
    if (f[i] - f[i - 1] > 1.0) ++n;
  return n;
}

inline CommandResult cmd_odmr(const Config& c, const RunOptions& opt = {}) {
  const auto r = run_odmr(c);
  const auto header = provenance(c, "odmr");
  CommandResult out;
  out.files.push_back({"odmr_spectrum.csv", render([&](std::ostream& os) {
                         io::write_curve_csv(os, r.freqs, r.signal, "freq_hz", "normalized_fluorescence", header);
                       })});
  out.files.push_back({"odmr_lines.csv", render([&](std::ostream& os) {
                         io::detail::write_header(os, header);
                         os << "axis,ms,m_i,freq_hz\n";
                         io::detail::full_precision(os);
                         for (const auto& l : r.lines)
                           os << l.axis_index << ',' << l.ms_sign << ',' << l.m_i << ',' << l.frequency << '\n';
                       })});

  // Triplets: groups of local minima separated by more than 2|A|.
  std::vector<double> minima;
  for (std::size_t i = 1; i + 1 < r.signal.size(); ++i)
    if (r.signal[i] < r.signal[i - 1] && r.signal[i] < r.signal[i + 1]) minima.push_back(r.freqs[i]);
  int groups = minima.empty() ? 0 : 1;
  for (std::size_t i = 1; i < minima.size(); ++i)
    if (minima[i] - minima[i - 1] > 2.0 * std::abs(c.ensemble.hyperfine_parallel)) ++groups;

  json s = provenance_json(c, "odmr");
  s["points"] = r.freqs.size();
  s["resonance_lines"] = r.lines.size();
  s["distinct_line_frequencies"] = distinct_lines(r.lines);
  s["local_minima"] = r.local_minima;
  s["minimum_groups"] = groups;
  out.files.push_back({"odmr_summary.json", s.dump(2) + "\n"});
  if (opt.plot) {
    out.files.push_back({"odmr_spectrum.svg",
                         svg_with_header(c, "odmr",
                                         svg::line_plot({{r.freqs, r.signal}},
                                                        {"pulsed ODMR", "frequency (Hz)", "fluorescence (norm.)"}))});
  }
  std::ostringstream os;
  os << "odmr: " << r.freqs.size() << " points, " << distinct_lines(r.lines) << " distinct line frequencies, "
     << r.local_minima << " local minima in " << groups << " groups\n";
  out.summary = os.str();
  return out;
}

// --- ramsey ----------------------------------------------------------------

inline CommandResult cmd_ramsey(const Config& c, const RunOptions& opt = {}) {
  CommandResult out;
  const auto header = provenance(c, "ramsey");
  RunReport rep(c.name, config_hash(c));
  json s = provenance_json(c, "ramsey");
  std::ostringstream text;
  std::vector<svg::Series> series;
  for (int dm : {1, 2}) {
    const std::string tag = dm == 1 ? "sq" : "dq";
    const auto run = run_ramsey(c, dm, c.ramsey.noise_sigma, c.seed + static_cast<std::uint64_t>(dm));
    std::vector<double> tau, y, model;
    for (const auto& p : run.samples) {
      tau.push_back(p.tau);
      y.push_back(p.value);
      model.push_back(spin::ramsey_fringe(p.tau, run.fit.params));
    }
    out.files.push_back({"ramsey_" + tag + ".csv", render([&](std::ostream& os) {
                           io::detail::write_header(os, header);
                           os << "tau_s,signal,fit\n";
                           io::detail::full_precision(os);
                           for (std::size_t i = 0; i < tau.size(); ++i)
                             os << tau[i] << ',' << y[i] << ',' << model[i] << '\n';
                         })});
    const auto& f = run.fit;
    const double rms_residual = f.residual_norm / std::sqrt(static_cast<double>(run.samples.size()));
    s[tag] = {{"converged", f.converged},
              {"message", f.message},
              {"iterations", f.iterations},
              {"t2_star_s", f.params.t2_star},
              {"t2_star_sigma_s", f.sigma[spin::kT2]},
              {"detuning_hz", f.params.detuning},
              {"contrast", f.params.contrast},
              {"stretch", f.params.stretch},
              {"phase_rad", f.params.phase},
              {"residual_rms", rms_residual},
              {"generator_t2_star_s", run.truth.t2_star}};
    rep.add(5, tag + "_fitted_t2_star", f.converged ? f.params.t2_star * 1e6 : NAN, "us", run.truth.t2_star * 1e6,
            accept::kT2Tol, Tolerance::relative);
    rep.note(tag + "_residual_rms", rms_residual, "");
    text << "ramsey " << tag << ": T2* = " << std::setprecision(6) << f.params.t2_star * 1e6 << " us ("
         << (f.converged ? "converged" : "NOT converged") << "), residual rms " << rms_residual << '\n';
    series.push_back({tau, y, dm == 1 ? "#1f77b4" : "#d62728"});
  }
  s["metrics"] = rep.to_json()["metrics"];
  out.files.push_back({"ramsey_summary.json", s.dump(2) + "\n"});
  if (opt.plot)
    out.files.push_back({"ramsey_fringes.svg",
                         svg_with_header(c, "ramsey",
                                         svg::line_plot(series, {"Ramsey fringes (SQ blue, DQ red)", "tau (s)",
                                                                 "signal"}))});
  out.summary = text.str();
  return out;
}

// --- sensitivity ------------------------------------------------------------

inline CommandResult cmd_sensitivity(const Config& c, const RunOptions& opt = {}) {
  CommandResult out;
  const auto header = provenance(c, "sensitivity");
  const auto model = c.resolved_noise();
  RunReport rep(c.name, config_hash(c));

  const double slope = spin::ramsey_slope(c.ensemble, c.sequence.tau);
  rep.add(1, "ramsey_slope", slope * 1e12, "pA/Hz", accept::kSlopeRef * 1e12, accept::kSlopeTol, Tolerance::relative);
  const double shot = spin::shot_noise_sensitivity(c.ensemble.photocurrent, c.sensitivity.measured_slope,
                                                   c.ensemble.gyromagnetic_ratio);
  rep.add(2, "shot_noise_limit", shot * 1e12, "pT/rtHz", accept::kShotRef * 1e12, accept::kShotTol,
          Tolerance::relative);
  rep.note("shot_noise_limit_modeled_slope",
           spin::shot_noise_sensitivity(c.ensemble.photocurrent, slope, c.ensemble.gyromagnetic_ratio) * 1e12,
           "pT/rtHz");
  rep.note("field_responsivity", sequence::field_responsivity(c.ensemble, c.sequence), "A/T");

  std::vector<double> det;
  for (double d = -c.sensitivity.response_span; d <= c.sensitivity.response_span * (1 + 1e-12);
       d += c.sensitivity.response_step)
    det.push_back(d);
  const auto resp = sequence::response_curve(c.ensemble, c.sequence, det, c.sensitivity.response);
  const double numeric = numerical_response_slope(c);
  rep.add(3, "response_slope_vs_ramsey_slope", numeric / slope, "ratio", 1.0, accept::kConsistencyTol,
          Tolerance::relative);
  out.files.push_back({"response_curve.csv", render([&](std::ostream& os) {
                         io::write_curve_csv(os, det, resp, "detuning_hz", "demodulated_current_a", header);
                       })});
  out.files.push_back({"sequence_timeline.csv", render([&](std::ostream& os) {
                         io::write_timeline_csv(os, sequence::build_dq4_sequence(c.sequence), header);
                       })});

  const auto lo = c.sensitivity.band_lo, hi = c.sensitivity.band_hi;
  std::vector<svg::Series> series;
  for (auto mode : {noise::Mode::insensitive, noise::Mode::sensitive}) {
    const bool sens = mode == noise::Mode::sensitive;
    const std::string tag = sens ? "sensitive" : "insensitive";
    const auto spec = dsp::welch_asd(synthesize_mode(c, model, mode, c.seed), c.welch);
    const auto analytic = noise::analytic_asd(model, mode);
    out.files.push_back({"asd_" + tag + ".csv", render([&](std::ostream& os) {
                           io::detail::write_header(os, header);
                           os << "# mode: " << tag << '\n';
                           io::write_spectrum_csv(os, spec);
                         })});
    std::vector<double> model_asd;
    for (double f : spec.freqs()) model_asd.push_back(analytic(f));
    out.files.push_back({"asd_" + tag + "_model.csv", render([&](std::ostream& os) {
                           io::write_curve_csv(os, spec.freqs(), model_asd, "freq_hz", "asd_T_per_sqrthz", header);
                         })});
    const double median = dsp::band_median(spec, lo, hi);
    rep.add(4, tag + "_band_median", median * 1e12, "pT/rtHz",
            (sens ? accept::kSensitiveRef : model.shot_floor) * 1e12, accept::kFloorTol, Tolerance::relative);
    rep.note(tag + "_band_mean", dsp::band_mean(spec, lo, hi) * 1e12, "pT/rtHz");
    series.push_back({spec.freqs(), spec.asd(), sens ? "#d62728" : "#1f77b4"});
  }

  json s = provenance_json(c, "sensitivity");
  s["excess_level_at_corner_t_per_rthz"] = model.excess.level_at_corner;
  s["metrics"] = rep.to_json()["metrics"];
  out.files.push_back({"sensitivity_summary.json", s.dump(2) + "\n"});
  if (opt.plot) {
    out.files.push_back({"response_curve.svg",
                         svg_with_header(c, "sensitivity",
                                         svg::line_plot({{det, resp}}, {"demodulated response", "detuning (Hz)",
                                                                        "current (A)"}))});
    out.files.push_back({"asd.svg", svg_with_header(c, "sensitivity",
                                                    svg::line_plot(series, {"ASD (insensitive blue, sensitive red)",
                                                                            "frequency (Hz)", "T/rtHz", true}))});
  }
  out.summary = rep.to_text();
  return out;
}

// --- phantom ------------------------------------------------------------------

inline CommandResult cmd_phantom(const Config& c, const RunOptions& opt = {}) {
  CommandResult out;
  const auto header = provenance(c, "phantom");
  const auto model = c.resolved_noise();
  RunReport rep(c.name, config_hash(c));

  const auto map = run_phantom_map(c);
  rep.add(8, "map_max_abs_bz", map.max_abs() * 1e12, "pT", accept::kMapBound * 1e12, accept::kMapTol,
          Tolerance::relative);
  // Where on the scan the forward model reaches the measured amplitude.
  const double offset = phantom::locate_sensor_offset(c.phantom.drive, c.phantom.geometry,
                                                      c.phantom.measured_amplitude, 0.5 * c.phantom.scan_extent);
  rep.note("sensor_offset_for_measured_amplitude", offset * 1e3, "mm");
  out.files.push_back({"phantom_map.csv", render([&](std::ostream& os) { io::write_map_csv(os, map, header); })});

  const dsp::NarrowbandFilter filter(c.filter, c.phantom.sample_rate);
  const auto trial = run_phantom_trial(c, model, filter, c.phantom.measured_amplitude, c.seed);
  out.files.push_back({"phantom_raw.csv", render([&](std::ostream& os) {
                         io::write_timeseries_csv(os, trial.raw, header);
                       })});
  out.files.push_back({"phantom_filtered.csv", render([&](std::ostream& os) {
                         io::write_timeseries_csv(os, trial.filtered, header);
                       })});
  const auto raw_asd = dsp::welch_asd(trial.raw, c.welch);
  out.files.push_back({"phantom_raw_asd.csv", render([&](std::ostream& os) {
                         io::detail::write_header(os, header);
                         io::write_spectrum_csv(os, raw_asd);
                       })});
  std::vector<double> gf, g;
  for (double f = c.filter.center - 10.0; f <= c.filter.center + 10.0 + 1e-9; f += 0.01) {
    gf.push_back(f);
    g.push_back(filter.gain(f));
  }
  out.files.push_back({"filter_gain.csv", render([&](std::ostream& os) {
                         io::write_curve_csv(os, gf, g, "freq_hz", "amplitude_gain", header);
                       })});

  rep.note("injected_amplitude", c.phantom.measured_amplitude * 1e12, "pT");
  rep.note("fitted_amplitude", trial.fit.amplitude * 1e12, "pT");
  rep.note("predicted_amplitude_sigma", trial.sigma_predicted * 1e12, "pT");
  rep.note("fit_amplitude_sigma_iid", trial.fit.amplitude_sigma * 1e12, "pT");
  rep.note("filter_enbw", filter.enbw(), "Hz");
  rep.note("filter_settle_time", filter.settle_time(), "s");

  const auto quiet = run_phantom_trial(c, model, filter, 0.0, c.seed);
  rep.add(10, "zero_current_amplitude", quiet.fit.amplitude * 1e12, "pT",
          accept::kRecoverySigmas * quiet.sigma_predicted * 1e12, 0.0, Tolerance::upper_bound);

  const auto chain = comparison_chain(c);
  rep.add(9, "rms_ours", chain.rms_ours * 1e12, "pT", accept::kRmsRef * 1e12, accept::kRmsTol, Tolerance::relative);
  rep.add(9, "snr_ours", chain.snr_ours, "", accept::kSnrRef, accept::kSnrTol, Tolerance::absolute);
  rep.add(9, "attenuated_amplitude", chain.attenuated * 1e12, "pT", accept::kAttenuatedRef * 1e12,
          accept::kAttenuatedTol * 1e12, Tolerance::absolute);
  rep.add(9, "rms_comparison", chain.rms_comparison * 1e12, "pT", accept::kComparisonRmsRef * 1e12,
          accept::kComparisonRmsTol * 1e12, Tolerance::absolute);
  rep.add(9, "snr_comparison", chain.snr_comparison, "", accept::kComparisonSnrRef, accept::kComparisonSnrTol,
          Tolerance::absolute);

  json s = provenance_json(c, "phantom");
  s["tone_fit"] = {{"amplitude_t", trial.fit.amplitude},
                   {"amplitude_sigma_t", trial.fit.amplitude_sigma},
                   {"phase_rad", trial.fit.phase},
                   {"offset_t", trial.fit.offset},
                   {"residual_rms_t", trial.fit.residual_rms},
                   {"fit_duration_s", trial.fit_duration}};
  s["metrics"] = rep.to_json()["metrics"];
  out.files.push_back({"phantom_summary.json", s.dump(2) + "\n"});
  if (opt.plot) {
    std::vector<double> mu, mv, mb;
    for (double u : map.u) mu.push_back(u * 1e3);
    for (double v : map.v) mv.push_back(v * 1e3);
    for (double b : map.values) mb.push_back(b * 1e12);
    out.files.push_back({"phantom_map.svg",
                         svg_with_header(c, "phantom", svg::heatmap(mu, mv, mb, {"averaged Bz (pT)", "u (mm)", "v (mm)"}))});
    out.files.push_back({"filter_gain.svg", svg_with_header(c, "phantom",
                                                            svg::line_plot({{gf, g}}, {"narrowband filter gain",
                                                                                       "frequency (Hz)", "gain"}))});
    std::vector<double> t;
    for (std::size_t i = 0; i < trial.filtered.size(); ++i) t.push_back(trial.filtered.time(i));
    out.files.push_back({"phantom_filtered.svg",
                         svg_with_header(c, "phantom",
                                         svg::line_plot({{t, trial.filtered.samples, "#ff7f0e"}},
                                                        {"filtered field", "time (s)", "T"}))});
    out.files.push_back({"phantom_raw_asd.svg",
                         svg_with_header(c, "phantom",
                                         svg::line_plot({{raw_asd.freqs(), raw_asd.asd(), "#6baed6"}},
                                                        {"raw noise spectrum", "frequency (Hz)", "T/rtHz", true}))});
  }
  out.summary = rep.to_text();
  return out;
}

// --- accept ---------------------------------------------------------------------

inline CommandResult cmd_accept(const Config& c, const RunOptions& = {}) {
  CommandResult out;
  const auto rep = run_acceptance(c);
  const auto header = provenance(c, "accept");
  json j = rep.to_json();
  j["provenance"] = provenance_json(c, "accept");
  out.files.push_back({"acceptance_report.json", j.dump(2) + "\n"});
  out.files.push_back({"acceptance_report.csv", render([&](std::ostream& os) {
                         io::detail::write_header(os, header);
                         os << "criterion,name,value,unit,reference,tolerance,tolerance_kind,pass\n";
                         io::detail::full_precision(os);
                         for (const auto& m : rep.metrics())
                           os << m.criterion << ',' << m.name << ',' << m.value << ',' << m.unit << ','
                              << m.reference << ',' << m.tolerance << ',' << to_string(m.kind) << ','
                              << (m.pass ? "pass" : "fail") << '\n';
                       })});
  out.summary = criteria_summary(rep) + (rep.all_pass() ? "ALL PASS\n" : "SOME CRITERIA FAILED\n");
  out.exit_code = rep.all_pass() ? kExitOk : kExitAcceptance;
  return out;
}

}  // namespace nvmag::app
