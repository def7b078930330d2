#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "nvmag/ramsey_fit.hpp"
#include "nvmag/spin_model.hpp"

using namespace nvmag;
using namespace nvmag::spin;

namespace {

std::vector<RamseySample> make_fringe(const RamseyFringeParams& p, double t_max, double step) {
  std::vector<RamseySample> out;
  for (double tau = 0.0; tau <= t_max + 1e-15; tau += step) out.push_back({tau, ramsey_fringe(tau, p)});
  return out;
}

}  // namespace

// --- resonance lines ---------------------------------------------------------

TEST(ResonanceLines, ZeroFieldCollapsesToHyperfineTriplet) {
  EnsembleParams params;
  BiasField bias;
  bias.magnitude = 0.0;
  const auto lines = resonance_lines(params, bias);
  ASSERT_EQ(lines.size(), 24u);
  for (const auto& l : lines)
    EXPECT_DOUBLE_EQ(l.frequency, params.zero_field_splitting + l.m_i * params.hyperfine_parallel);
}

TEST(ResonanceLines, ZeemanOffsetsAtOperatingField) {
  // Oracle: integer <111> vectors; cos of the angle between (1,1,1) and
  // (1,-1,-1) is (1-1-1)/3 = -1/3.
  const double aligned = 28e9 * 0.52e-3;  // 14.56 MHz by hand
  EXPECT_NEAR(aligned, 14.56e6, 1e-6);
  const double misaligned = aligned * std::abs((1.0 - 1.0 - 1.0) / 3.0);

  EnsembleParams params;
  BiasField bias;
  const auto lines = resonance_lines(params, bias);
  for (const auto& l : lines) {
    const double offset = l.frequency - params.zero_field_splitting - l.m_i * params.hyperfine_parallel;
    const double expected = l.axis_index == 0 ? aligned : misaligned;
    EXPECT_NEAR(offset, l.ms_sign * expected, 1e-3) << "axis " << l.axis_index;
  }
  EXPECT_NEAR(misaligned, 4.8533e6, 1e2);
}

TEST(ResonanceLines, RejectsBadBias) {
  EnsembleParams params;
  BiasField bias;
  bias.axis = Vec3(1.0, 1.0, 0.0);
  EXPECT_THROW(resonance_lines(params, bias), std::invalid_argument);
  bias = BiasField{};
  bias.magnitude = -1e-3;
  EXPECT_THROW(resonance_lines(params, bias), std::invalid_argument);
  bias = BiasField{};
  bias.nv_axes[1] = Vec3::UnitX();
  EXPECT_THROW(resonance_lines(params, bias), std::invalid_argument);
}

TEST(ResonanceLines, AxisPermutationLeavesFrequencyMultisetUnchanged) {
  EnsembleParams params;
  BiasField bias;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    bias.axis = Vec3(u(rng), u(rng), u(rng)).normalized();
    bias.nv_axes = tetrahedral_axes();
    auto ref = resonance_lines(params, bias);
    std::vector<double> fa;
    for (const auto& l : ref) fa.push_back(l.frequency);
    std::shuffle(bias.nv_axes.begin(), bias.nv_axes.end(), rng);
    std::vector<double> fb;
    for (const auto& l : resonance_lines(params, bias)) fb.push_back(l.frequency);
    std::sort(fa.begin(), fa.end());
    std::sort(fb.begin(), fb.end());
    for (std::size_t i = 0; i < fa.size(); ++i) EXPECT_NEAR(fa[i], fb[i], 1e-6);
  }
}

// --- ODMR spectrum -----------------------------------------------------------

TEST(OdmrSpectrum, DipDepthAtLineCenter) {
  EnsembleParams params;
  BiasField bias;
  bias.magnitude = 0.0;
  params.hyperfine_parallel = 0.0;
  OdmrOptions opt;
  opt.axis_weights = {1.0, 0.0, 0.0, 0.0};
  // With B = 0 and A = 0 all six lines of axis 0 sit on D.
  const std::vector<double> grid{params.zero_field_splitting};
  EXPECT_NEAR(1.0 - odmr_spectrum(params, bias, opt, grid)[0], 6.0 * opt.depth, 1e-15);

  // Single isolated line: only one of 24 lines has nonzero weight-and-position.
  EnsembleParams p2;
  BiasField b2;
  OdmrOptions o2;
  o2.linewidth = 100.0;  // neighbours 2.16 MHz away contribute ~1e-11
  o2.axis_weights = {1.0, 0.0, 0.0, 0.0};
  const auto lines = resonance_lines(p2, b2);
  const std::vector<double> g2{lines[1].frequency};
  EXPECT_NEAR(1.0 - odmr_spectrum(p2, b2, o2, g2)[0], o2.depth, 1e-9);
}

TEST(OdmrSpectrum, FourResolvedTripletsAtOperatingField) {
  EnsembleParams params;
  BiasField bias;
  OdmrOptions opt;  // 0.5 MHz FWHM < |A|/2
  ASSERT_LT(opt.linewidth, std::abs(params.hyperfine_parallel) / 2.0);
  std::vector<double> grid;
  for (double f = params.zero_field_splitting - 25e6; f <= params.zero_field_splitting + 25e6; f += 10e3)
    grid.push_back(f);
  const auto s = odmr_spectrum(params, bias, opt, grid);
  std::vector<double> minima;
  for (std::size_t i = 1; i + 1 < s.size(); ++i)
    if (s[i] < s[i - 1] && s[i] < s[i + 1]) minima.push_back(grid[i]);
  ASSERT_EQ(minima.size(), 12u);
  // Group minima into clusters separated by more than 2|A|.
  int clusters = 1;
  for (std::size_t i = 1; i < minima.size(); ++i)
    if (minima[i] - minima[i - 1] > 2.0 * std::abs(params.hyperfine_parallel)) ++clusters;
  EXPECT_EQ(clusters, 4);
}

TEST(OdmrSpectrum, SymmetricAboutZeroFieldSplitting) {
  EnsembleParams params;
  BiasField bias;
  std::vector<double> lo, hi;
  for (double df = 1e5; df < 25e6; df += 137e3) {
    lo.insert(lo.begin(), params.zero_field_splitting - df);
    hi.push_back(params.zero_field_splitting + df);
  }
  const auto a = odmr_spectrum(params, bias, {}, lo);
  const auto b = odmr_spectrum(params, bias, {}, hi);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[a.size() - 1 - i], b[i], 1e-12);
}

TEST(OdmrSpectrum, RejectsBadGrid) {
  EnsembleParams params;
  BiasField bias;
  EXPECT_THROW(odmr_spectrum(params, bias, {}, std::vector<double>{}), std::invalid_argument);
  EXPECT_THROW(odmr_spectrum(params, bias, {}, std::vector<double>{2.0, 1.0}), std::invalid_argument);
  OdmrOptions bad;
  bad.linewidth = 0.0;
  EXPECT_THROW(odmr_spectrum(params, bias, bad, std::vector<double>{1.0}), std::invalid_argument);
}

// --- Ramsey fringe -----------------------------------------------------------

TEST(RamseyFringe, ZeroDelayAndEnvelope) {
  RamseyFringeParams p;
  p.contrast = 0.3;
  EXPECT_DOUBLE_EQ(ramsey_fringe(0.0, p), 0.3);
  p.detuning = 0.0;
  p.stretch = 1.0;
  EXPECT_NEAR(ramsey_fringe(p.t2_star, p), 0.3 * std::exp(-1.0), 1e-15);
  EXPECT_THROW(ramsey_fringe(-1e-9, p), std::invalid_argument);
}

TEST(RamseyFringe, BoundedByEnvelope) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    RamseyFringeParams p;
    p.contrast = u(rng);
    p.t2_star = 1e-6 + 10e-6 * u(rng);
    p.stretch = 0.5 + 2.0 * u(rng);
    p.detuning = 1e7 * (u(rng) - 0.5);
    p.phase = 6.3 * u(rng);
    p.delta_ms = u(rng) < 0.5 ? 1 : 2;
    const double tau = 20e-6 * u(rng);
    EXPECT_LE(std::abs(ramsey_fringe(tau, p)),
              p.contrast * dephasing_envelope(tau, p.t2_star, p.stretch) * (1.0 + 1e-15));
  }
}

// --- Ramsey fit --------------------------------------------------------------

TEST(RamseyFit, RecoversSingleQuantumT2) {
  RamseyFringeParams truth;
  truth.detuning = 5e6;
  truth.t2_star = 5.5e-6;
  truth.delta_ms = 1;
  const auto data = make_fringe(truth, 16e-6, 10e-9);
  const auto guess = ramsey_initial_guess(data, 1, 10e6);
  const auto fit = fit_ramsey(data, guess);
  ASSERT_TRUE(fit.converged) << fit.message;
  EXPECT_NEAR(fit.params.t2_star, 5.5e-6, 0.02 * 5.5e-6);
  EXPECT_LT(fit.residual_norm, 1e-9);
}

TEST(RamseyFit, RecoversDoubleQuantumT2) {
  RamseyFringeParams truth;
  truth.detuning = 5e6;
  truth.t2_star = 4.4e-6;
  truth.delta_ms = 2;
  const auto data = make_fringe(truth, 14e-6, 10e-9);
  const auto guess = ramsey_initial_guess(data, 2, 10e6);
  const auto fit = fit_ramsey(data, guess);
  ASSERT_TRUE(fit.converged) << fit.message;
  EXPECT_NEAR(fit.params.t2_star, 4.4e-6, 0.005 * 4.4e-6);
}

TEST(RamseyFit, NoiselessRoundTripIsIdentityOnAllParameters) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    RamseyFringeParams truth;
    truth.delta_ms = trial % 2 ? 2 : 1;
    truth.detuning = 2e6 + 6e6 * u(rng);
    truth.t2_star = 2e-6 + 6e-6 * u(rng);
    truth.stretch = 0.8 + 1.2 * u(rng);
    truth.contrast = 0.005 + 0.5 * u(rng);
    truth.phase = 2.0 * (u(rng) - 0.5);
    const auto data = make_fringe(truth, 3.0 * truth.t2_star, 8e-9);
    RamseyFringeParams init = truth;
    init.t2_star *= 1.2;
    init.stretch = 1.0;
    init.contrast *= 0.8;
    init.phase += 0.2;
    init.detuning *= 1.0 + 1e-4;
    const auto fit = fit_ramsey(data, init);
    ASSERT_TRUE(fit.converged) << fit.message;
    EXPECT_NEAR(fit.params.t2_star / truth.t2_star, 1.0, 0.005);
    EXPECT_NEAR(fit.params.detuning / truth.detuning, 1.0, 0.005);
    EXPECT_NEAR(fit.params.contrast / truth.contrast, 1.0, 0.005);
    EXPECT_NEAR(fit.params.stretch / truth.stretch, 1.0, 0.005);
    EXPECT_NEAR(fit.params.phase, truth.phase, 0.005 * std::max(1.0, std::abs(truth.phase)));
  }
}

TEST(RamseyFit, ConstantZeroInputFails) {
  std::vector<RamseySample> zeros;
  for (int i = 0; i < 100; ++i) zeros.push_back({i * 10e-9, 0.0});
  RamseyFringeParams init;
  const auto fit = fit_ramsey(zeros, init);
  EXPECT_FALSE(fit.converged);
  EXPECT_FALSE(fit.message.empty());
}

TEST(RamseyFit, RejectsTooFewSamplesOrShortSpan) {
  RamseyFringeParams init;
  std::vector<RamseySample> few(5, {0.0, 1.0});
  EXPECT_THROW(fit_ramsey(few, init), std::invalid_argument);
  std::vector<RamseySample> short_span;
  for (int i = 0; i < 10; ++i) short_span.push_back({i * 1e-9, 1.0});  // 9 ns < 200 ns period
  EXPECT_THROW(fit_ramsey(short_span, init), std::invalid_argument);
}

TEST(RamseyFit, NoisyFitWithinFivePercentOverSeeds) {
  // Monte-Carlo: 100 seeds at per-point SNR 20; every recovered T2* must
  // stay within 5% (the observed spread is about 1%).
  RamseyFringeParams truth;
  truth.detuning = 5e6;
  truth.t2_star = 4.4e-6;
  truth.delta_ms = 2;
  const auto clean = make_fringe(truth, 14e-6, 10e-9);
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, truth.contrast / 20.0);
    auto noisy = clean;
    for (auto& s : noisy) s.value += noise(rng);
    const auto fit = fit_ramsey(noisy, ramsey_initial_guess(noisy, 2, 10e6));
    ASSERT_TRUE(fit.converged) << "seed " << seed << ": " << fit.message;
    worst = std::max(worst, std::abs(fit.params.t2_star / truth.t2_star - 1.0));
  }
  EXPECT_LT(worst, 0.05);
}

// --- slope / optimal tau / shot noise ------------------------------------------

TEST(RamseySlope, OperatingPointValue) {
  EnsembleParams params;  // Δm=2, I=5 mA, C=0.89%, p=1, T2*=3.9 µs
  const double slope = ramsey_slope(params, 3.957e-6);
  EXPECT_NEAR(slope, 802e-12, 0.01 * 802e-12);
}

TEST(RamseySlope, LinearInTauNearZeroAndInCurrent) {
  EnsembleParams params;
  const double s1 = ramsey_slope(params, 1e-12), s2 = ramsey_slope(params, 2e-12);
  EXPECT_NEAR(s2 / s1, 2.0, 1e-6);
  EnsembleParams doubled = params;
  doubled.photocurrent *= 2.0;
  EXPECT_DOUBLE_EQ(ramsey_slope(doubled, 3.957e-6), 2.0 * ramsey_slope(params, 3.957e-6));
  EXPECT_THROW(ramsey_slope(params, 0.0), std::invalid_argument);
}

TEST(OptimalTau, MatchesGridSearch) {
  EXPECT_DOUBLE_EQ(optimal_tau(3.9e-6, 1.0), 3.9e-6);
  EXPECT_NEAR(optimal_tau(1.0, 2.0), 1.0 / std::sqrt(2.0), 1e-15);
  for (double p : {0.5, 1.0, 1.5, 2.0}) {
    const double t2 = 3.9e-6;
    const double t_max = 5.0 * t2;
    constexpr int kGrid = 10000;
    double best_tau = 0.0, best = -1.0;
    for (int i = 1; i <= kGrid; ++i) {
      const double tau = t_max * i / kGrid;
      const double v = tau * std::exp(-std::pow(tau / t2, p));
      if (v > best) best = v, best_tau = tau;
    }
    EXPECT_NEAR(optimal_tau(t2, p), best_tau, t_max / kGrid) << "p = " << p;
  }
  EXPECT_NEAR(optimal_tau(3.9e-6, 1.0) / 3.957e-6, 1.0, 0.02);
}

TEST(ShotNoise, OperatingPointAndScaling) {
  const double eta = shot_noise_sensitivity(5e-3, 761e-12);
  EXPECT_NEAR(eta, 1.9e-12, 0.03 * 1.9e-12);
  EXPECT_DOUBLE_EQ(shot_noise_sensitivity(5e-3, 2 * 761e-12), 0.5 * eta);
  EXPECT_NEAR(shot_noise_sensitivity(20e-3, 761e-12), 2.0 * eta, 1e-27);
  EXPECT_DOUBLE_EQ(shot_noise_sensitivity(5e-3, 761e-12, 28e9, 1.5), 1.5 * eta);
  EXPECT_THROW(shot_noise_sensitivity(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(shot_noise_sensitivity(1.0, 0.0), std::invalid_argument);
}
