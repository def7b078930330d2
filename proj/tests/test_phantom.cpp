#include <array>
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "nvmag/io.hpp"
#include "nvmag/phantom.hpp"

using namespace nvmag;
using namespace nvmag::phantom;

namespace {

// Independent plain-array reimplementation of the conducting-sphere field,
// with ∇F by central differences. Shares no code with the library.
namespace oracle {

using V = std::array<double, 3>;

double dot(const V& a, const V& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm(const V& a) { return std::sqrt(dot(a, a)); }
V cross(const V& a, const V& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double F(const V& r, const V& r0) {
  const V a{r[0] - r0[0], r[1] - r0[1], r[2] - r0[2]};
  const double an = norm(a), rn = norm(r);
  return an * (an * rn + rn * rn - dot(r0, r));
}

V gradF(const V& r, const V& r0) {
  V g{};
  const double h = 1e-7 * norm(r);
  for (int k = 0; k < 3; ++k) {
    V p = r, m = r;
    p[k] += h;
    m[k] -= h;
    g[k] = (F(p, r0) - F(m, r0)) / (2.0 * h);
  }
  return g;
}

V B(const V& q, const V& r0, const V& r) {
  const double f = F(r, r0);
  const V qx = cross(q, r0);
  const V g = gradF(r, r0);
  const double k = 1e-7 / (f * f);  // μ0/4π
  const double s = dot(qx, r);
  return {k * (f * qx[0] - s * g[0]), k * (f * qx[1] - s * g[1]), k * (f * qx[2] - s * g[2])};
}

}  // namespace oracle

oracle::V arr(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

const Vec3 kQ(0.0, 35e-9, 0.0);
const Vec3 kR0(0.0, 0.0, 9.5e-3);

struct RandomScene {
  Vec3 q, r0, r;
};

RandomScene random_scene(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RandomScene s;
  s.q = Vec3(u(rng), u(rng), u(rng)) * 1e-8;
  s.r0 = Vec3(u(rng), u(rng), u(rng)) * 6e-3;
  do {
    s.r = Vec3(u(rng), u(rng), u(rng)) * 20e-3;
  } while (s.r.norm() < s.r0.norm() + 1e-3 || (s.r - s.r0).norm() < 1e-3);
  return s;
}

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  return q.normalized().toRotationMatrix();
}

}  // namespace

// --- F and ∇F ----------------------------------------------------------------

TEST(SarvasF, OriginDipoleIsTwiceRadiusCubed) {
  const Vec3 r(3e-3, -4e-3, 12e-3);
  EXPECT_NEAR(sarvas_F(r, Vec3::Zero()), 2.0 * std::pow(r.norm(), 3), 1e-22);
  EXPECT_NEAR((sarvas_gradF(r, Vec3::Zero()) - 6.0 * r.norm() * r).norm(), 0.0, 1e-18);
}

TEST(SarvasF, OnAxisHandValue) {
  // a = 2.5 mm: 2.5e-3·(2.5e-3·12e-3 + 144e-6 − 114e-6) = 1.5e-7 m³.
  EXPECT_NEAR(sarvas_F(Vec3(0, 0, 12e-3), kR0), 1.5e-7, 1e-20);
}

TEST(SarvasF, Homogeneity) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto s = random_scene(rng);
    for (double k : {0.3, 2.0, 17.0}) {
      const double f = sarvas_F(s.r, s.r0);
      EXPECT_NEAR(sarvas_F(k * s.r, k * s.r0), k * k * k * f, 1e-12 * std::abs(k * k * k * f));
      const Vec3 g = sarvas_gradF(s.r, s.r0);
      EXPECT_NEAR((sarvas_gradF(k * s.r, k * s.r0) - k * k * g).norm(), 0.0, 1e-12 * k * k * g.norm());
    }
  }
}

TEST(SarvasGradF, MatchesCentralDifferences) {
  std::mt19937_64 rng(2);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto s = random_scene(rng);
    const double h = 1e-6 * s.r.norm();
    Vec3 fd;
    for (int k = 0; k < 3; ++k) {
      Vec3 e = Vec3::Zero();
      e[k] = h;
      fd[k] = (sarvas_F(s.r + e, s.r0) - sarvas_F(s.r - e, s.r0)) / (2.0 * h);
    }
    const Vec3 g = sarvas_gradF(s.r, s.r0);
    worst = std::max(worst, (g - fd).norm() / g.norm());
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(SarvasF, SingularitiesAreErrors) {
  EXPECT_THROW(sarvas_F(kR0, kR0), std::domain_error);
  EXPECT_THROW(sarvas_gradF(kR0, kR0), std::domain_error);
  EXPECT_THROW(sarvas_F(Vec3::Zero(), kR0), std::domain_error);
}

// --- dipole field ------------------------------------------------------------

TEST(DipoleField, RadialDipoleIsSilent) {
  const Vec3 b = dipole_field(2.0 * kR0, kR0, Vec3(1e-3, 2e-3, 12e-3));
  EXPECT_EQ(b.norm(), 0.0);
}

TEST(DipoleField, ReferenceSceneRegressionAgainstOracle) {
  const Vec3 r(0.0, 0.0, 12e-3);
  const Vec3 b = dipole_field(DipoleScene{kQ, kR0, r});
  // Pinned: on axis B = μ0/4π·|Q×r0|/F = 1e-7·3.325e-10/1.5e-7.
  EXPECT_NEAR(b.x(), 2.2166666666666667e-10, 1e-22);
  EXPECT_NEAR(b.y(), 0.0, 1e-24);
  EXPECT_NEAR(b.z(), 0.0, 1e-24);
  const Vec3 off(0.5e-3, -0.3e-3, 12e-3);
  const auto o = oracle::B(arr(kQ), arr(kR0), arr(off));
  const Vec3 lib = dipole_field(kQ, kR0, off);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(lib[k], o[static_cast<std::size_t>(k)], 1e-7 * lib.norm());
  // Off-axis reference values from an external numpy evaluation.
  EXPECT_NEAR(lib.x(), 1.97708982e-10, 1e-18);
  EXPECT_NEAR(lib.y(), 8.39685674e-12, 1e-19);
  EXPECT_NEAR(lib.z(), -8.99219909e-11, 1e-18);
}

TEST(DipoleField, OracleAgreesOnRandomScenes) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 300; ++i) {
    const auto s = random_scene(rng);
    const Vec3 lib = dipole_field(s.q, s.r0, s.r);
    const auto o = oracle::B(arr(s.q), arr(s.r0), arr(s.r));
    const double scale = std::max(lib.norm(), 1e-300);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(lib[k], o[static_cast<std::size_t>(k)], 1e-6 * scale);
  }
}

TEST(DipoleField, DivergenceFree) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 200; ++i) {
    const auto s = random_scene(rng);
    const double h = 1e-5 * s.r.norm();
    double div = 0.0;
    for (int k = 0; k < 3; ++k) {
      Vec3 e = Vec3::Zero();
      e[k] = h;
      div += (dipole_field(s.q, s.r0, s.r + e)[k] - dipole_field(s.q, s.r0, s.r - e)[k]) / (2.0 * h);
    }
    const double scale = dipole_field(s.q, s.r0, s.r).norm() / (s.r - s.r0).norm();
    EXPECT_LT(std::abs(div), 1e-6 * scale + 1e-300);
  }
}

TEST(DipoleField, RotationalCovariance) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto s = random_scene(rng);
    const Eigen::Matrix3d R = random_rotation(rng);
    const Vec3 b = dipole_field(s.q, s.r0, s.r);
    const Vec3 rb = dipole_field(R * s.q, R * s.r0, R * s.r);
    EXPECT_LT((rb - R * b).norm(), 1e-12 * b.norm() + 1e-300);
  }
}

TEST(DipoleField, LinearInMoment) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 100; ++i) {
    const auto s1 = random_scene(rng);
    const auto s2 = random_scene(rng);
    const double alpha = 1.7, beta = -0.4;
    const Vec3 lhs = dipole_field(alpha * s1.q + beta * s2.q, s1.r0, s1.r);
    const Vec3 rhs = alpha * dipole_field(s1.q, s1.r0, s1.r) + beta * dipole_field(s2.q, s1.r0, s1.r);
    EXPECT_LT((lhs - rhs).norm(), 1e-14 * rhs.norm() + 1e-300);
  }
}

TEST(DipoleField, SceneValidation) {
  EXPECT_THROW(dipole_field(DipoleScene{kQ, kR0, Vec3(0, 0, 5e-3)}), std::invalid_argument);
  EXPECT_THROW(dipole_field(DipoleScene{kQ, kR0, kR0}), std::invalid_argument);
}

// --- aperture averaging ----------------------------------------------------------

TEST(AveragedField, FarFieldEqualsCenterValue) {
  SensorAperture ap;
  ap.center = Vec3(0.2, 0.1, 0.5);  // ~0.5 m from a source near the origin
  const Vec3 r0(0.0, 0.0, 5e-3);
  const double avg = averaged_field(kQ, r0, ap);
  const double point = dipole_field(kQ, r0, ap.center).z();
  EXPECT_NEAR(avg / point, 1.0, 1e-4);
}

TEST(AveragedField, QuadratureSelfConvergence) {
  SensorAperture ap;
  for (double x : {0.3e-3, 0.6e-3, 1e-3}) {  // x = 0 averages to ~0 by symmetry
    ap.center = Vec3(x, 0.2e-3, 12e-3);
    const auto c = averaged_field_checked(kQ, kR0, ap, 8);
    EXPECT_TRUE(c.converged) << x;
    EXPECT_LT(c.relative_change, 1e-3);
  }
}

TEST(AveragedField, ShrinkingApertureTendsToPointValue) {
  SensorAperture ap;
  ap.center = Vec3(0.6e-3, 0.2e-3, 12e-3);
  const double point = dipole_field(kQ, kR0, ap.center).z();
  double previous = std::abs(averaged_field(kQ, kR0, ap) - point);
  for (double side : {0.3e-3, 0.1e-3, 0.01e-3}) {
    ap.side_u = ap.side_v = side;
    const double err = std::abs(averaged_field(kQ, kR0, ap) - point);
    EXPECT_LT(err, previous);
    previous = err;
  }
  EXPECT_LT(previous, 1e-4 * std::abs(point));  // residual ∝ side²
}

TEST(AveragedField, MatchesOracleAverage) {
  // Independent 2-D midpoint rule with the oracle field.
  SensorAperture ap;
  ap.center = Vec3(1e-3, 0.0, 12e-3);
  constexpr int kN = 200;
  double acc = 0.0;
  for (int i = 0; i < kN; ++i)
    for (int j = 0; j < kN; ++j) {
      const oracle::V r{ap.center.x() + 0.9e-3 * ((i + 0.5) / kN - 0.5),
                        ap.center.y() + 0.9e-3 * ((j + 0.5) / kN - 0.5), 12e-3};
      acc += oracle::B(arr(kQ), arr(kR0), r)[2];
    }
  acc /= kN * kN;
  EXPECT_NEAR(averaged_field(kQ, kR0, ap) / acc, 1.0, 1e-4);
  EXPECT_NEAR(averaged_field(kQ, kR0, ap), -1.4684400238747022e-10, 1e-17);
}

TEST(AveragedField, Errors) {
  SensorAperture ap;
  ap.center = kR0;
  EXPECT_THROW(averaged_field(kQ, kR0, ap), std::domain_error);
  ap = SensorAperture{};
  EXPECT_THROW(averaged_field(kQ, kR0, ap, 1), std::invalid_argument);
  ap.axis_v = Vec3(1.0, 1.0, 0.0).normalized();
  EXPECT_THROW(averaged_field(kQ, kR0, ap), std::invalid_argument);
  ap = SensorAperture{};
  ap.side_u = 0.0;
  EXPECT_THROW(averaged_field(kQ, kR0, ap), std::invalid_argument);
}

// --- map ---------------------------------------------------------------------

TEST(PhantomMap, AntisymmetricInXAndBounded) {
  const auto grid = ScanGrid::uniform(2e-3, 21);
  const auto map = phantom_map(kQ, kR0, SensorAperture{}, grid);
  ASSERT_EQ(map.values.size(), 21u * 21u);
  for (std::size_t iv = 0; iv < 21; ++iv)
    for (std::size_t iu = 0; iu < 21; ++iu)
      EXPECT_NEAR(map.at(iu, iv), -map.at(20 - iu, iv), 1e-12 * map.max_abs());
  EXPECT_LE(map.max_abs(), 150e-12 * 1.2);
  EXPECT_GE(map.max_abs(), 150e-12 * 0.8);
}

TEST(PhantomMap, ZeroDipoleGivesZeroMap) {
  const auto map = phantom_map(Vec3::Zero(), kR0, SensorAperture{}, ScanGrid::uniform(2e-3, 5));
  for (double v : map.values) EXPECT_EQ(v, 0.0);
}

TEST(PhantomMap, GridOutsideScanAreaIsAnError) {
  auto grid = ScanGrid::uniform(2e-3, 5);
  grid.u.push_back(1.5e-3);
  EXPECT_THROW(phantom_map(kQ, kR0, SensorAperture{}, grid), std::invalid_argument);
}

TEST(PhantomMap, CsvInMillimetresAndPicotesla) {
  const auto map = phantom_map(kQ, kR0, SensorAperture{}, ScanGrid::uniform(2e-3, 3));
  std::ostringstream os;
  io::write_map_csv(os, map);
  EXPECT_NE(os.str().find("v_mm\\u_mm,-1,0,1"), std::string::npos);
}

// --- drive and time series -----------------------------------------------------

TEST(PhantomDrive, MomentFromCurrentAndLength) {
  PhantomDrive d;
  EXPECT_NEAR(d.moment(), 35e-9, 1e-21);
}

TEST(PhantomDrive, HalvedCurrentHalvesAmplitude) {
  PhantomGeometry g;
  g.aperture.center = Vec3(0.5e-3, 0.0, 12e-3);
  PhantomDrive d;
  const double full = phantom_amplitude(d, g);
  d.current *= 0.5;
  EXPECT_DOUBLE_EQ(phantom_amplitude(d, g), 0.5 * full);
}

TEST(PhantomDrive, TimeSeriesShapeAndNyquist) {
  PhantomGeometry g;
  g.aperture.center = Vec3(0.5e-3, 0.0, 12e-3);
  PhantomDrive d;
  const auto ts = phantom_timeseries(d, g, 2.0, 1000.0);
  ASSERT_EQ(ts.size(), 2000u);
  const double amp = phantom_amplitude(d, g);
  for (std::size_t i = 0; i < ts.size(); i += 37)
    EXPECT_DOUBLE_EQ(ts.samples[i], amp * std::sin(constants::kTwoPi * 77.0 * ts.time(i)));
  EXPECT_THROW(phantom_timeseries(d, g, 2.0, 150.0), std::invalid_argument);
}

TEST(PhantomDrive, LocateOffsetForMeasuredAmplitude) {
  const PhantomDrive d;
  const PhantomGeometry g;
  const double x = locate_sensor_offset(d, g, 77.7e-12, 1e-3);
  PhantomGeometry at = g;
  at.aperture.center.x() = x;
  EXPECT_NEAR(std::abs(phantom_amplitude(d, at)), 77.7e-12, 1e-20);
  EXPECT_GT(x, 0.0);
  EXPECT_LT(x, 1e-3);
  EXPECT_THROW(locate_sensor_offset(d, g, 1e-9, 1e-3), std::invalid_argument);
}

TEST(GeometricAttenuation, Values) {
  EXPECT_NEAR(geometric_attenuation(2.5e-3, 7.1e-3, 77.7e-12), 9.63e-12, 0.005e-12);
  EXPECT_DOUBLE_EQ(geometric_attenuation(3e-3, 3e-3, 5.0), 5.0);
  EXPECT_DOUBLE_EQ(geometric_attenuation(1.0, 2.0, 8.0), 2.0);
  EXPECT_THROW(geometric_attenuation(0.0, 1.0, 1.0), std::invalid_argument);
}
