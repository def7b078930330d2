// Library walkthrough: from ensemble parameters to a recovered phantom tone,
// without the CLI layer.

#include <cstdio>

#include "nvmag/nvmag.hpp"

using namespace nvmag;

int main() {
  spin::EnsembleParams ensemble;  // DQ, I = 5 mA, C = 0.89 %, T2* = 3.9 us
  sequence::SequenceConfig seq;   // tau = 3.957 us, 20 kHz lock-in

  const double slope = spin::ramsey_slope(ensemble, seq.tau);
  std::printf("slope            %.1f pA/Hz\n", slope * 1e12);
  std::printf("shot limit       %.2f pT/rtHz (measured slope 761 pA/Hz)\n",
              spin::shot_noise_sensitivity(ensemble.photocurrent, 761e-12) * 1e12);

  // Noise model calibrated to the sensitive-mode band level.
  noise::NoiseModel model;
  model.excess.level_at_corner = noise::calibrate_excess_level(model, 2.93e-12, 100.0, 400.0);

  // Phantom geometry: where does the forward model give the measured 77.7 pT?
  phantom::PhantomDrive drive;
  phantom::PhantomGeometry geom;
  const double offset = phantom::locate_sensor_offset(drive, geom, 77.7e-12, 1e-3);
  std::printf("sensor offset    %.3f mm for 77.7 pT\n", offset * 1e3);

  noise::Scenario sc;
  sc.duration = 40.0;
  sc.sample_rate = 2000.0;
  sc.seed = 7;
  sc.signal = noise::InjectedSignal{drive.frequency, 77.7e-12, 0.0};
  const TimeSeries raw = noise::synthesize(model, sc);

  const dsp::NarrowbandFilter filter(dsp::FilterSpec{}, sc.sample_rate);  // 77 Hz, ENBW 0.8 Hz
  const TimeSeries full{raw.sample_rate, filter.apply(raw.samples), raw.unit, 0.0};
  const auto trim = static_cast<std::size_t>(filter.settle_time() * sc.sample_rate) + 1;
  const TimeSeries filtered = full.slice(trim, full.size() - 2 * trim);
  const auto fit = dsp::fit_tone(filtered, drive.frequency);

  const double asd = noise::analytic_asd(model, noise::Mode::sensitive)(drive.frequency);
  std::printf("fitted amplitude %.2f pT (predicted sigma %.2f pT)\n", fit.amplitude * 1e12,
              dsp::tone_amplitude_sigma(asd, filtered.duration()) * 1e12);

  const double rms = dsp::rms_from_asd(14.3e-12, filter.enbw());
  std::printf("SNR              %.2f (rms %.1f pT in %.1f Hz)\n", dsp::snr(77.7e-12, rms), rms * 1e12, filter.enbw());
  return 0;
}
