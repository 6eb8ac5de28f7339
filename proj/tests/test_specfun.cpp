#include <gtest/gtest.h>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

#include "msdd/specfun.hpp"

using namespace msdd;

namespace {

// Slow reference: ascending series in 100-digit complex arithmetic.
using mpc = boost::multiprecision::cpp_complex_100;
using mpf = boost::multiprecision::cpp_bin_float_100;

struct Ref {
  cplx j0, j1, h0, h1;
};

Ref series_reference(cplx zd) {
  const mpc z(mpf(zd.real()), mpf(zd.imag()));
  const mpc q = -z * z / 4;
  const mpf pi = boost::math::constants::pi<mpf>();
  const mpf gamma = boost::math::constants::euler<mpf>();
  mpc t0 = 1, t1 = 1, j0 = 1, j1s = 1, y0h = 0, y1h = 1;
  mpf harm = 0;
  for (int m = 1; m < 600; ++m) {
    t0 *= q / mpf(m * m);
    t1 *= q / mpf(m * (m + 1));
    harm += mpf(1) / m;
    j0 += t0;
    j1s += t1;
    y0h += harm * t0;
    y1h += (2 * harm + mpf(1) / (m + 1)) * t1;
    if (m > 4 * std::abs(zd) + 20 && abs(t0) < mpf("1e-80")) break;
  }
  const mpc hz = z / 2;
  const mpc logh = log(hz) + gamma;
  const mpc j1 = hz * j1s;
  const mpc y0 = (2 / pi) * (logh * j0 - y0h);
  const mpc y1 = (2 / pi) * logh * j1 - 2 / (pi * z) - hz * y1h / pi;
  const mpc i(0, 1);
  auto c = [](const mpc& v) {
    return cplx(static_cast<double>(v.real()), static_cast<double>(v.imag()));
  };
  return {c(j0), c(j1), c(j0 + i * y0), c(j1 + i * y1)};
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Specfun, RealValuesAtOne) {
  const auto a = bessel_jy(0, 1.0);
  EXPECT_NEAR(a.j, 0.7651976866, 1e-10);
  EXPECT_NEAR(a.y, 0.0882569642, 1e-10);
  const auto b = bessel_jy(1, 1.0);
  EXPECT_NEAR(b.j, 0.4400505857, 1e-10);
  EXPECT_NEAR(b.y, -0.7812128213, 1e-10);
}

TEST(Specfun, GreensKernelAtUnitDistance) {
  const cplx g = greens_kernel(1.0, 1.0);
  EXPECT_NEAR(g.real(), -0.0220642411, 1e-10);
  EXPECT_NEAR(g.imag(), 0.1912994216, 1e-10);
}

TEST(Specfun, RealAxisMatchesMultiprecisionSeries) {
  for (double x : {1e-3, 0.1, 0.5, 1.0, 2.5, 7.0, 11.9, 12.1, 16.0, 25.0, 40.0}) {
    const Ref r = series_reference(x);
    for (int order : {0, 1}) {
      const auto jy = bessel_jy(order, x);
      const cplx ref_h = order == 0 ? r.h0 : r.h1;
      EXPECT_LT(std::abs(cplx(jy.j, jy.y) - ref_h) / std::abs(ref_h), 1e-12) << "x=" << x;
      EXPECT_LT(rel(hankel1(order, x), ref_h), 1e-12) << "x=" << x;
    }
  }
}

TEST(Specfun, ComplexArgumentsMatchMultiprecisionSeries) {
  const cplx pts[] = {{0.3, 0.05}, {1.0, 0.4}, {2.0, 1e-6}, {5.0, 0.5},  {8.0, 2.0},
                      {11.0, 3.0}, {12.0, 0.3}, {3.0, 10.0}, {16.0, 4.0}, {16.9, 1.0},
                      {17.1, 1.0}, {20.0, 2.2}, {25.0, 2.0}, {0.0, 6.0}, {40.0, 5.6}};
  for (cplx z : pts) {
    const Ref r = series_reference(z);
    const CylinderValues v = cylinder01(z);
    EXPECT_LT(rel(v.h0, r.h0), 1e-12) << z;
    EXPECT_LT(rel(v.h1, r.h1), 1e-12) << z;
    EXPECT_LT(rel(v.j0, r.j0), 1e-12) << z;
    EXPECT_LT(rel(v.j1, r.j1), 1e-12) << z;
  }
}

TEST(Specfun, ComplexPathAgreesWithRealPathOnAxis) {
  for (double x : {0.7, 3.0, 9.5, 15.0, 17.5, 30.0}) {
    const CylinderValues c = detail::cylinder_complex(cplx(x, 0.0));
    const CylinderValues r = detail::cylinder_real(x);
    EXPECT_LT(rel(c.h0, r.h0), 1e-12) << x;
    EXPECT_LT(rel(c.h1, r.h1), 1e-12) << x;
  }
}

TEST(Specfun, ContinuousAcrossSeriesSwitch) {
  // The two evaluations straddle the switch; their difference must be the
  // smooth first-order change f'(z) (hi - lo) and nothing more.
  for (double arg : {0.0, 0.3, 1.0}) {
    const cplx dir = std::polar(1.0, arg * 0.2);
    const cplx lo = (kSeriesSwitch - 1e-8) * dir, hi = (kSeriesSwitch + 1e-8) * dir;
    const cplx mid = kSeriesSwitch * dir, dz = hi - lo;
    const CylinderValues a = detail::cylinder_complex(lo), b = detail::cylinder_complex(hi);
    const CylinderValues c = detail::cylinder_complex(mid);
    auto jump = [&](cplx fa, cplx fb, cplx deriv, cplx f) {
      return std::abs(fb - fa - deriv * dz) / std::abs(f);
    };
    EXPECT_LT(jump(a.h0, b.h0, -c.h1, c.h0), 1e-10);
    EXPECT_LT(jump(a.h1, b.h1, c.h0 - c.h1 / mid, c.h1), 1e-10);
    EXPECT_LT(jump(a.j0, b.j0, -c.j1, c.j0), 1e-10);
    EXPECT_LT(jump(a.j1, b.j1, c.j0 - c.j1 / mid, c.j1), 1e-10);
  }
}

TEST(Specfun, WronskianOnComplexArguments) {
  // J1 Y0 - J0 Y1 = 2/(π z), with Y = (H - J)/i.
  for (cplx z : {cplx(0.5, 0.2), cplx(4.0, 1.0), cplx(13.0, 0.7), cplx(30.0, 3.0)}) {
    const CylinderValues v = cylinder01(z);
    const cplx y0 = (v.h0 - v.j0) / kI, y1 = (v.h1 - v.j1) / kI;
    EXPECT_LT(rel(v.j1 * y0 - v.j0 * y1, 2.0 / (kPi * z)), 1e-11) << z;
  }
}

TEST(Specfun, RejectsInvalidArguments) {
  EXPECT_THROW(bessel_jy(2, 1.0), DomainError);
  EXPECT_THROW(bessel_jy(0, 0.0), DomainError);
  EXPECT_THROW(hankel1(0, cplx(0.0, 0.0)), DomainError);
  EXPECT_THROW(hankel1(0, cplx(1.0, -0.1)), DomainError);
  EXPECT_THROW(hankel1(0, cplx(2e5, 0.0)), DomainError);
  EXPECT_THROW(greens_kernel(1.0, 0.0), DomainError);
  EXPECT_THROW(Wavenumber(-1.0), DomainError);
  EXPECT_THROW(Wavenumber(cplx(1.0, -0.5)), DomainError);
}
