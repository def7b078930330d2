#pragma once

// Current-dipole field outside a homogeneous conducting sphere (Sarvas),
// sensor-aperture averaging, scan maps and phantom drive signals. The
// sphere center is the coordinate origin; all lengths are in metres.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "nvmag/constants.hpp"
#include "nvmag/quadrature.hpp"
#include "nvmag/time_series.hpp"

namespace nvmag::phantom {

using Vec3 = Eigen::Vector3d;

/// F = |a|(|a||r| + |r|² − r₀·r), a = r − r₀ (units m³).
inline double sarvas_F(const Vec3& r, const Vec3& r0) {
  const Vec3 a = r - r0;
  const double an = a.norm(), rn = r.norm();
  if (!(an > 0.0)) throw std::domain_error("sarvas_F: field point coincides with the dipole (r = r0)");
  if (!(rn > 0.0)) throw std::domain_error("sarvas_F: field point at the sphere center");
  return an * (an * rn + rn * rn - r0.dot(r));
}

/// ∇_r F = (|a|²/|r| + a·r/|a| + 2|a| + 2|r|)·r − (|a| + 2|r| + a·r/|a|)·r₀.
inline Vec3 sarvas_gradF(const Vec3& r, const Vec3& r0) {
  const Vec3 a = r - r0;
  const double an = a.norm(), rn = r.norm();
  if (!(an > 0.0)) throw std::domain_error("sarvas_gradF: field point coincides with the dipole (r = r0)");
  if (!(rn > 0.0)) throw std::domain_error("sarvas_gradF: field point at the sphere center");
  const double ar = a.dot(r) / an;
  return (an * an / rn + ar + 2.0 * an + 2.0 * rn) * r - (an + 2.0 * rn + ar) * r0;
}

struct DipoleScene {
  Vec3 moment = Vec3::Zero();  // Q, A·m
  Vec3 position = Vec3::Zero();  // r0, m
  Vec3 field_point = Vec3::Zero();  // r, m

  void validate() const {
    if (!(field_point.norm() > position.norm()))
      throw std::invalid_argument("DipoleScene: field point must lie outside the source radius (|r| > |r0|)");
    if (field_point == position) throw std::invalid_argument("DipoleScene: r must differ from r0");
  }
};

/// B(r) = μ₀/(4πF²)·[F·Q×r₀ − ((Q×r₀)·r)·∇F]  (T).
inline Vec3 dipole_field(const Vec3& moment, const Vec3& r0, const Vec3& r) {
  const double f = sarvas_F(r, r0);
  if (!(f != 0.0)) throw std::domain_error("dipole_field: F = 0 (singular geometry)");
  const Vec3 q_cross = moment.cross(r0);
  const double k = constants::kMu0 / (4.0 * constants::kPi * f * f);
  return k * (f * q_cross - q_cross.dot(r) * sarvas_gradF(r, r0));
}

inline Vec3 dipole_field(const DipoleScene& scene) {
  scene.validate();
  return dipole_field(scene.moment, scene.position, scene.field_point);
}

struct SensorAperture {
  Vec3 center = Vec3(0.0, 0.0, 12.0e-3);
  double side_u = 0.9e-3;  // m
  double side_v = 0.9e-3;  // m
  Vec3 axis_u = Vec3::UnitX();
  Vec3 axis_v = Vec3::UnitY();
  Vec3 sensitive_axis = Vec3::UnitZ();

  void validate() const {
    constexpr double tol = 1e-12;
    if (!(side_u > 0.0) || !(side_v > 0.0)) throw std::invalid_argument("SensorAperture: side lengths must be > 0");
    if (std::abs(axis_u.norm() - 1.0) > tol || std::abs(axis_v.norm() - 1.0) > tol ||
        std::abs(axis_u.dot(axis_v)) > tol)
      throw std::invalid_argument("SensorAperture: in-plane axes must be orthonormal");
    if (std::abs(sensitive_axis.norm() - 1.0) > tol)
      throw std::invalid_argument("SensorAperture: sensitive axis must be a unit vector");
  }
};

/// Mean of B·sensitive_axis over the rectangular aperture, tensor-product
/// Gauss–Legendre with `n` nodes per side.
inline double averaged_field(const Vec3& moment, const Vec3& r0, const SensorAperture& ap, int n = 8) {
  ap.validate();
  if (n < 2) throw std::invalid_argument("averaged_field: quadrature_n must be >= 2");
  // The source must not touch the aperture rectangle.
  const Vec3 d = r0 - ap.center;
  const Vec3 normal = ap.axis_u.cross(ap.axis_v);
  if (std::abs(d.dot(normal)) < 1e-15 && std::abs(d.dot(ap.axis_u)) <= 0.5 * ap.side_u &&
      std::abs(d.dot(ap.axis_v)) <= 0.5 * ap.side_v)
    throw std::domain_error("averaged_field: aperture intersects the dipole position");

  const auto rule = quadrature::gauss_legendre(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
      const Vec3 r = ap.center + (0.5 * ap.side_u * rule.nodes[i]) * ap.axis_u +
                     (0.5 * ap.side_v * rule.nodes[j]) * ap.axis_v;
      if (!(r.norm() > r0.norm()))
        throw std::domain_error("averaged_field: aperture reaches inside the source radius");
      acc += rule.weights[i] * rule.weights[j] * dipole_field(moment, r0, r).dot(ap.sensitive_axis);
    }
  }
  return acc / 4.0;
}

struct AveragedFieldCheck {
  double value;          // n nodes
  double refined;        // 2n nodes
  double relative_change;
  bool converged;        // relative_change < 1e-3
};

inline AveragedFieldCheck averaged_field_checked(const Vec3& moment, const Vec3& r0, const SensorAperture& ap,
                                                 int n = 8) {
  AveragedFieldCheck c{};
  c.value = averaged_field(moment, r0, ap, n);
  c.refined = averaged_field(moment, r0, ap, 2 * n);
  const double scale = std::max(std::abs(c.refined), std::numeric_limits<double>::min());
  c.relative_change = c.refined == c.value ? 0.0 : std::abs(c.value - c.refined) / scale;
  c.converged = c.relative_change < 1e-3;
  return c;
}

/// Sensor-center offsets (along the aperture's u and v axes) to scan.
struct ScanGrid {
  std::vector<double> u;  // m
  std::vector<double> v;  // m
  double extent = 2.0e-3;  // allowed square scan area side, m

  static ScanGrid uniform(double extent, std::size_t points) {
    if (points < 2) throw std::invalid_argument("ScanGrid: need at least 2 points per axis");
    ScanGrid g;
    g.extent = extent;
    for (std::size_t i = 0; i < points; ++i) {
      const double x = -0.5 * extent + extent * static_cast<double>(i) / static_cast<double>(points - 1);
      g.u.push_back(x);
      g.v.push_back(x);
    }
    return g;
  }

  void validate() const {
    if (u.empty() || v.empty()) throw std::invalid_argument("ScanGrid: empty axis");
    const double lim = 0.5 * extent * (1.0 + 1e-12);
    for (double x : u)
      if (std::abs(x) > lim) throw std::invalid_argument("ScanGrid: point outside the scan area");
    for (double y : v)
      if (std::abs(y) > lim) throw std::invalid_argument("ScanGrid: point outside the scan area");
  }
};

struct FieldMap {
  std::vector<double> u;  // m
  std::vector<double> v;  // m
  std::vector<double> values;  // T, row-major: values[iv * u.size() + iu]

  double at(std::size_t iu, std::size_t iv) const { return values[iv * u.size() + iu]; }
  double max_abs() const {
    double m = 0.0;
    for (double x : values) m = std::max(m, std::abs(x));
    return m;
  }
};

inline FieldMap phantom_map(const Vec3& moment, const Vec3& r0, const SensorAperture& aperture_template,
                            const ScanGrid& grid, int quadrature_n = 8) {
  grid.validate();
  FieldMap map{grid.u, grid.v, {}};
  map.values.reserve(grid.u.size() * grid.v.size());
  for (double y : grid.v) {
    for (double x : grid.u) {
      SensorAperture ap = aperture_template;
      ap.center = aperture_template.center + x * aperture_template.axis_u + y * aperture_template.axis_v;
      map.values.push_back(averaged_field(moment, r0, ap, quadrature_n));
    }
  }
  return map;
}

struct PhantomDrive {
  double current = 50.0e-6;        // A
  double frequency = 77.0;         // Hz
  double dipole_length = 0.7e-3;   // m
  double phase = 0.0;              // rad

  double moment() const { return current * dipole_length; }

  void validate() const {
    if (!(current >= 0.0)) throw std::invalid_argument("PhantomDrive: current must be >= 0");
    if (!(frequency > 0.0)) throw std::invalid_argument("PhantomDrive: frequency must be > 0");
    if (!(dipole_length > 0.0)) throw std::invalid_argument("PhantomDrive: dipole_length must be > 0");
  }
};

struct PhantomGeometry {
  Vec3 dipole_direction = Vec3::UnitY();
  Vec3 dipole_position = Vec3(0.0, 0.0, 9.5e-3);
  SensorAperture aperture{};
  int quadrature_n = 8;
};

/// Peak field amplitude along the sensitive axis for the given drive (T, signed).
inline double phantom_amplitude(const PhantomDrive& drive, const PhantomGeometry& geom) {
  drive.validate();
  const Vec3 q = drive.moment() * geom.dipole_direction.normalized();
  return averaged_field(q, geom.dipole_position, geom.aperture, geom.quadrature_n);
}

inline TimeSeries phantom_timeseries(const PhantomDrive& drive, const PhantomGeometry& geom, double duration,
                                     double sample_rate) {
  drive.validate();
  if (!(sample_rate > 2.0 * drive.frequency))
    throw std::invalid_argument("phantom_timeseries: Nyquist violation, sample rate must exceed twice the drive frequency");
  if (!(duration > 0.0)) throw std::invalid_argument("phantom_timeseries: duration must be > 0");
  const double amp = phantom_amplitude(drive, geom);
  const auto n = static_cast<std::size_t>(std::llround(duration * sample_rate));
  TimeSeries ts{sample_rate, std::vector<double>(n), Unit::tesla, 0.0};
  for (std::size_t i = 0; i < n; ++i)
    ts.samples[i] = amp * std::sin(constants::kTwoPi * drive.frequency * ts.time(i) + drive.phase);
  return ts;
}

/// Offset of the sensor center along the aperture's u axis, in [0, max_offset],
/// at which |phantom_amplitude| equals `target` (bisection on the rising flank).
inline double locate_sensor_offset(const PhantomDrive& drive, const PhantomGeometry& geom, double target,
                                   double max_offset) {
  auto amp_at = [&](double x) {
    PhantomGeometry g = geom;
    g.aperture.center = geom.aperture.center + x * geom.aperture.axis_u;
    return std::abs(phantom_amplitude(drive, g));
  };
  // Coarse scan for the first bracket, then bisection.
  constexpr int kScan = 200;
  double lo = 0.0;
  bool below = amp_at(lo) <= target;
  for (int i = 1; i <= kScan; ++i) {
    double hi = max_offset * i / kScan;
    if (below && amp_at(hi) >= target) {
      for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (amp_at(mid) < target) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      return 0.5 * (lo + hi);
    }
    lo = hi;
    below = amp_at(lo) <= target;
  }
  throw std::invalid_argument("locate_sensor_offset: target amplitude not reached within max_offset");
}

/// Far-field rescaling of an amplitude with distance: amplitude·(d_near/d_far)².
inline double geometric_attenuation(double d_near, double d_far, double amplitude_near) {
  if (!(d_near > 0.0) || !(d_far > 0.0)) throw std::invalid_argument("geometric_attenuation: distances must be > 0");
  const double ratio = d_near / d_far;
  return amplitude_near * ratio * ratio;
}

}  // namespace nvmag::phantom
