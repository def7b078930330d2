#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nvmag/spin_model.hpp"

namespace nvmag::spin {

struct RamseySample {
  double tau;
  double value;
};

struct RamseyFitOptions {
  int max_iterations = 200;
  double step_tolerance = 1e-10;  // relative parameter step
  bool fit_stretch = true;
};

/// Parameter order used for `sigma`: T₂*, δ, C, p, φ.
enum RamseyParam : std::size_t { kT2 = 0, kDetuning = 1, kContrast = 2, kStretch = 3, kPhase = 4 };

struct RamseyFit {
  RamseyFringeParams params;
  std::array<double, 5> sigma{};
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string message;
};

namespace detail {

using Vec5 = Eigen::Matrix<double, 5, 1>;

inline RamseyFringeParams unpack(const Vec5& x, const RamseyFringeParams& base) {
  RamseyFringeParams p = base;
  p.t2_star = x[kT2];
  p.detuning = x[kDetuning];
  p.contrast = x[kContrast];
  p.stretch = x[kStretch];
  p.phase = x[kPhase];
  return p;
}

// Residuals r = model − data and Jacobian ∂model/∂x.
inline void residual_jacobian(std::span<const RamseySample> samples, const Vec5& x, int delta_ms,
                              Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
  const double t2 = x[kT2], det = x[kDetuning], c = x[kContrast], p = x[kStretch], phi = x[kPhase];
  const auto n = static_cast<Eigen::Index>(samples.size());
  r.resize(n);
  jac.resize(n, 5);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double tau = samples[static_cast<std::size_t>(i)].tau;
    const double u = tau / t2;
    const double up = tau > 0.0 ? std::pow(u, p) : 0.0;
    const double env = std::exp(-up);
    const double w = constants::kTwoPi * delta_ms * tau;
    const double theta = w * det + phi;
    const double cs = std::cos(theta), sn = std::sin(theta);
    r[i] = c * env * cs - samples[static_cast<std::size_t>(i)].value;
    jac(i, kT2) = c * cs * env * p * up / t2;
    jac(i, kDetuning) = -c * env * sn * w;
    jac(i, kContrast) = env * cs;
    jac(i, kStretch) = tau > 0.0 ? -c * cs * env * up * std::log(u) : 0.0;
    jac(i, kPhase) = -c * env * sn;
  }
}

inline double wrap_phase(double phi) {
  phi = std::remainder(phi, constants::kTwoPi);
  return phi <= -constants::kPi ? phi + constants::kTwoPi : phi;
}

}  // namespace detail

/// Damped least-squares (Levenberg–Marquardt) fit of C·exp(-(τ/T₂*)^p)·cos(2π·Δm_s·δ·τ + φ).
/// Δm_s is taken from `init` and held fixed. Failure to converge, or a
/// singular normal matrix at the solution, is reported through
/// `converged == false` with a message; the caller decides what to do.
inline RamseyFit fit_ramsey(std::span<const RamseySample> samples, const RamseyFringeParams& init,
                            const RamseyFitOptions& options = {}) {
  init.validate();
  if (samples.size() < 8) throw std::invalid_argument("fit_ramsey: need at least 8 samples");
  auto [lo, hi] = std::minmax_element(samples.begin(), samples.end(),
                                      [](const auto& a, const auto& b) { return a.tau < b.tau; });
  const double span = hi->tau - lo->tau;
  if (init.detuning != 0.0 && span * std::abs(init.delta_ms * init.detuning) < 1.0)
    throw std::invalid_argument("fit_ramsey: samples must span at least one oscillation period");

  RamseyFit fit;
  fit.params = init;

  double max_abs = 0.0;
  for (const auto& s : samples) max_abs = std::max(max_abs, std::abs(s.value));
  if (!(max_abs > 0.0) || !std::isfinite(max_abs)) {
    fit.message = "no signal: all samples are zero or non-finite, parameters are unidentifiable";
    return fit;
  }

  detail::Vec5 x;
  x << init.t2_star, init.detuning, init.contrast, init.stretch, init.phase;
  const int active = options.fit_stretch ? 5 : 4;
  auto mask = [&](Eigen::MatrixXd& jac) {
    if (!options.fit_stretch) jac.col(kStretch).setZero();
  };

  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  detail::residual_jacobian(samples, x, init.delta_ms, r, jac);
  mask(jac);
  double cost = r.squaredNorm();
  double lambda = 1e-3;

  for (int it = 1; it <= options.max_iterations; ++it) {
    fit.iterations = it;
    const Eigen::Matrix<double, 5, 5> jtj = jac.transpose() * jac;
    const detail::Vec5 grad = jac.transpose() * r;
    detail::Vec5 diag = jtj.diagonal();
    for (int k = 0; k < 5; ++k)
      if (!(diag[k] > 0.0)) diag[k] = (k == kStretch && !options.fit_stretch) ? 1.0 : 0.0;
    if ((diag.array() == 0.0).any()) {
      fit.message = "singular Jacobian: a parameter has no influence on the model";
      fit.params = detail::unpack(x, init);
      return fit;
    }

    bool accepted = false;
    detail::Vec5 step = detail::Vec5::Zero();
    for (int tries = 0; tries < 60; ++tries) {
      Eigen::Matrix<double, 5, 5> lhs = jtj;
      lhs.diagonal() += lambda * diag;
      step = lhs.ldlt().solve(-grad);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      detail::Vec5 trial = x + step;
      if (!(trial[kT2] > 0.0) || !(trial[kStretch] > 0.0)) {
        lambda *= 10.0;
        continue;
      }
      Eigen::VectorXd r_trial;
      Eigen::MatrixXd jac_trial;
      detail::residual_jacobian(samples, trial, init.delta_ms, r_trial, jac_trial);
      const double trial_cost = r_trial.squaredNorm();
      if (trial_cost <= cost) {
        x = trial;
        r = std::move(r_trial);
        jac = std::move(jac_trial);
        mask(jac);
        cost = trial_cost;
        lambda = std::max(lambda * 0.3, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }

    // Relative step, with a unit floor for the phase (which may sit at zero).
    double rel = 0.0;
    for (int k = 0; k < 5; ++k) {
      const double scale = k == kPhase ? std::max(1.0, std::abs(x[k])) : std::abs(x[k]);
      if (scale > 0.0) rel = std::max(rel, std::abs(step[k]) / scale);
    }
    if (!accepted) {
      fit.message = "damping saturated without reducing the residual";
      fit.params = detail::unpack(x, init);
      fit.residual_norm = std::sqrt(cost);
      return fit;
    }
    if (rel < options.step_tolerance) {
      fit.converged = true;
      break;
    }
  }

  fit.residual_norm = std::sqrt(cost);
  if (!fit.converged) {
    fit.message = "iteration cap reached before the relative step fell below tolerance";
    fit.params = detail::unpack(x, init);
    return fit;
  }

  if (x[kContrast] < 0.0) {
    x[kContrast] = -x[kContrast];
    x[kPhase] += constants::kPi;
  }
  x[kPhase] = detail::wrap_phase(x[kPhase]);
  fit.params = detail::unpack(x, init);

  if (!(std::abs(x[kContrast]) > 1e-9 * max_abs)) {
    fit.converged = false;
    fit.message = "fitted contrast collapsed to zero";
    return fit;
  }

  detail::residual_jacobian(samples, x, init.delta_ms, r, jac);
  mask(jac);
  Eigen::MatrixXd jtj = jac.transpose() * jac;
  if (!options.fit_stretch) jtj(kStretch, kStretch) = 1.0;
  // Equilibrate before inverting: T₂* and δ differ by ~12 decades.
  const Eigen::VectorXd scale = jtj.diagonal().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd scaled = scale.asDiagonal() * jtj * scale.asDiagonal();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(scaled);
  if (!scale.allFinite() || !lu.isInvertible()) {
    fit.converged = false;
    fit.message = "normal matrix is singular at the solution";
    return fit;
  }
  const auto dof = static_cast<double>(samples.size()) - active;
  const double s2 = dof > 0 ? cost / dof : 0.0;
  const Eigen::MatrixXd cov = scale.asDiagonal() * lu.inverse() * scale.asDiagonal() * s2;
  for (int k = 0; k < 5; ++k) fit.sigma[static_cast<std::size_t>(k)] = std::sqrt(std::max(0.0, cov(k, k)));
  if (!options.fit_stretch) fit.sigma[kStretch] = 0.0;
  fit.message = "converged";
  return fit;
}

/// Starting point for `fit_ramsey` from the data alone: detuning from a
/// periodogram peak, contrast from the peak magnitude, T₂* from the
/// envelope's 1/e point.
inline RamseyFringeParams ramsey_initial_guess(std::span<const RamseySample> samples, int delta_ms,
                                               double max_detuning) {
  if (samples.size() < 8) throw std::invalid_argument("ramsey_initial_guess: need at least 8 samples");
  if (!(max_detuning > 0.0)) throw std::invalid_argument("ramsey_initial_guess: max_detuning must be > 0");
  double t_max = 0.0, y_max = 0.0;
  for (const auto& s : samples) {
    t_max = std::max(t_max, s.tau);
    y_max = std::max(y_max, std::abs(s.value));
  }
  RamseyFringeParams guess;
  guess.delta_ms = delta_ms;
  guess.contrast = y_max > 0.0 ? y_max : 1.0;
  guess.stretch = 1.0;

  const double resolution = 1.0 / (delta_ms * std::max(t_max, 1e-30));
  const int n_grid = static_cast<int>(std::ceil(8.0 * max_detuning / resolution)) + 1;
  double best = -1.0;
  std::complex<double> best_sum;
  for (int g = 0; g < n_grid; ++g) {
    const double det = max_detuning * g / std::max(1, n_grid - 1);
    std::complex<double> sum = 0.0;
    for (const auto& s : samples) sum += s.value * std::polar(1.0, -constants::kTwoPi * delta_ms * det * s.tau);
    if (std::abs(sum) > best) {
      best = std::abs(sum);
      best_sum = sum;
      guess.detuning = det;
    }
  }
  guess.phase = std::arg(best_sum);

  // Envelope 1/e point from the running peak magnitude.
  double t2 = t_max / 3.0;
  const double threshold = guess.contrast / std::exp(1.0);
  for (const auto& s : samples) {
    if (std::abs(s.value) >= threshold) t2 = std::max(t2, s.tau);
  }
  guess.t2_star = t2 > 0.0 ? t2 : 1.0;
  return guess;
}

}  // namespace nvmag::spin
