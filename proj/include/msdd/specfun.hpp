#pragma once
//
// Bessel and Hankel functions of orders 0 and 1, and the 2D Helmholtz
// Green's function G_k(r) = (i/4) H0(k r).
//
// Real arguments go through Boost.Math's rational (minimax) approximations.
// Complex arguments with Im z >= 0 use an ascending power series in extended
// precision for |z| <= kSeriesSwitch and the Hankel asymptotic expansion
// beyond it. Inside the series disc H^(1) is taken from K_nu(-iz) by Steed's
// continued fraction once |z| >= 2, since J + iY cancels badly when Im z > 0.
//

#include <cmath>
#include <complex>

#include <boost/math/special_functions/bessel.hpp>

#include "msdd/common.hpp"

namespace msdd {

/// Wavenumber with Re k > 0 and Im k >= 0.
class Wavenumber {
 public:
  Wavenumber(double k) : Wavenumber(cplx{k, 0.0}) {}  // NOLINT: implicit by intent
  explicit Wavenumber(cplx k) : value_(k) {
    if (!(k.real() > 0.0) || k.imag() < 0.0)
      throw DomainError("wavenumber must have Re k > 0 and Im k >= 0");
  }
  cplx value() const { return value_; }
  bool is_real() const { return value_.imag() == 0.0; }
  double real() const { return value_.real(); }

 private:
  cplx value_;
};

struct BesselJY {
  double j;
  double y;
};

/// Values of J0, J1, H0^(1), H1^(1) at one argument.
struct CylinderValues {
  cplx j0, j1, h0, h1;
};

/// Radius at which hankel1 switches from the power series to the asymptotic
/// expansion.
inline constexpr double kSeriesSwitch = 17.0;
/// Largest |z| accepted by the complex-argument routines.
inline constexpr double kHankelArgumentBound = 1.0e5;

namespace detail {

using pol_t = boost::math::policies::policy<
    boost::math::policies::promote_double<false>>;

using ldcplx = std::complex<long double>;

inline CylinderValues cylinder_real(double x) {
  const double j0 = boost::math::cyl_bessel_j(0, x, pol_t());
  const double j1 = boost::math::cyl_bessel_j(1, x, pol_t());
  const double y0 = boost::math::cyl_neumann(0, x, pol_t());
  const double y1 = boost::math::cyl_neumann(1, x, pol_t());
  return {j0, j1, {j0, y0}, {j1, y1}};
}

// Ascending series. The alternating terms peak near m ~ |z|/2 with size
// ~e^{|z|}, so the sums run in long double to keep ~12 digits at the switch.
inline CylinderValues cylinder_series(cplx zd) {
  const ldcplx z(zd.real(), zd.imag());
  const ldcplx q = -z * z / 4.0L;
  const long double pi = 3.141592653589793238462643383279502884L;
  const long double gamma = 0.577215664901532860606512090082402431L;

  // t0 = q^m/(m!)^2, t1 = q^m/(m!(m+1)!); J0 = sum t0, J1 = (z/2) sum t1.
  ldcplx t0 = 1.0L, t1 = 1.0L;
  ldcplx j0 = 1.0L, j1s = 1.0L;
  ldcplx y0h = 0.0L;  // sum H_m t0
  ldcplx y1h = 1.0L;  // sum (H_m + H_{m+1}) t1
  long double harm = 0.0L;
  const long double az = std::abs(z);
  for (int m = 1; m < 400; ++m) {
    const long double lm = m;
    t0 *= q / (lm * lm);
    t1 *= q / (lm * (lm + 1.0L));
    harm += 1.0L / lm;
    j0 += t0;
    j1s += t1;
    y0h += harm * t0;
    y1h += (2.0L * harm + 1.0L / (lm + 1.0L)) * t1;
    if (lm > az && std::abs(t0) < 1e-22L && std::abs(t1) < 1e-22L) break;
  }
  const ldcplx half_z = z / 2.0L;
  const ldcplx logh = std::log(half_z) + gamma;
  const ldcplx j1 = half_z * j1s;
  const ldcplx y0 = (2.0L / pi) * (logh * j0 - y0h);
  const ldcplx y1 = (2.0L / pi) * logh * j1 - 2.0L / (pi * z) - half_z * y1h / pi;
  const ldcplx i(0.0L, 1.0L);
  auto c = [](ldcplx v) {
    return cplx(static_cast<double>(v.real()), static_cast<double>(v.imag()));
  };
  return {c(j0), c(j1), c(j0 + i * y0), c(j1 + i * y1)};
}

// Hankel asymptotic expansion for |z| large; returns H^(1) and H^(2) of
// orders 0 and 1 (J = (H1 + H2)/2).
inline CylinderValues cylinder_asymptotic(cplx z) {
  const cplx i = kI;
  cplx sum1[2], sum2[2];
  for (int nu = 0; nu < 2; ++nu) {
    const double mu = 4.0 * nu * nu;
    cplx a = 1.0;  // a_k / z^k
    cplx s1 = 1.0, s2 = 1.0;
    double prev = 1.0;
    cplx ik = 1.0, mik = 1.0;
    for (int k = 1; k < 200; ++k) {
      const double odd = 2.0 * k - 1.0;
      a *= (mu - odd * odd) / (8.0 * k) / z;
      const double mag = std::abs(a);
      if (mag > prev) break;  // asymptotic series started diverging
      ik *= i;
      mik *= -i;
      s1 += ik * a;
      s2 += mik * a;
      prev = mag;
      if (mag < 1e-17) break;
    }
    sum1[nu] = s1;
    sum2[nu] = s2;
  }
  const cplx pref = std::sqrt(2.0 / (kPi * z));
  const cplx w0 = z - kPi / 4.0;
  const cplx w1 = z - 0.75 * kPi;
  const cplx h10 = pref * std::exp(i * w0) * sum1[0];
  const cplx h11 = pref * std::exp(i * w1) * sum1[1];
  const cplx h20 = pref * std::exp(-i * w0) * sum2[0];
  const cplx h21 = pref * std::exp(-i * w1) * sum2[1];
  return {0.5 * (h10 + h20), 0.5 * (h11 + h21), h10, h11};
}

// K0 and K1 at complex w, Re w >= 0, |w| >= 2 (Temme's CF2 with Steed's
// summation).
inline void bessel_k01(cplx w, cplx& k0, cplx& k1) {
  cplx b = 2.0 * (1.0 + w);
  cplx d = 1.0 / b;
  cplx h = d, delh = d;
  cplx q1 = 0.0, q2 = 1.0;
  const double a1 = 0.25;
  cplx q = a1, c = a1;
  double a = -a1;
  cplx s = 1.0 + q * delh;
  for (int i = 2; i < 2000; ++i) {
    a -= 2.0 * (i - 1);
    c = -a * c / double(i);
    const cplx qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const cplx dels = q * delh;
    s += dels;
    if (std::abs(dels) < 1e-17 * std::abs(s)) break;
  }
  h = a1 * h;
  k0 = std::sqrt(kPi / (2.0 * w)) * std::exp(-w) / s;
  k1 = k0 * (w + 0.5 - h) / w;
}

/// J0, J1, H0, H1 at a complex argument through the complex-argument path
/// (no real-axis shortcut).
inline CylinderValues cylinder_complex(cplx z) {
  if (std::abs(z) > kSeriesSwitch) return cylinder_asymptotic(z);
  CylinderValues v = cylinder_series(z);
  if (std::abs(z) >= 2.0) {
    cplx k0, k1;
    bessel_k01(-kI * z, k0, k1);
    v.h0 = -2.0 * kI / kPi * k0;
    v.h1 = -2.0 / kPi * k1;
  }
  return v;
}

}  // namespace detail

/// J and Y of order 0 or 1 at x > 0.
inline BesselJY bessel_jy(int order, double x) {
  if (order != 0 && order != 1) throw DomainError("bessel_jy: order must be 0 or 1");
  if (!(x > 0.0)) throw DomainError("bessel_jy: argument must be positive");
  using detail::pol_t;
  return {boost::math::cyl_bessel_j(order, x, pol_t()),
          boost::math::cyl_neumann(order, x, pol_t())};
}

/// J0, J1, H0, H1 at z != 0, Im z >= 0. Real z uses the real routines.
inline CylinderValues cylinder01(cplx z) {
  if (z == cplx(0.0)) throw DomainError("hankel1: singular argument z = 0");
  if (z.imag() < 0.0) throw DomainError("hankel1: Im z must be >= 0");
  if (std::abs(z) > kHankelArgumentBound) throw DomainError("hankel1: |z| above overflow bound");
  if (z.imag() == 0.0 && z.real() > 0.0) return detail::cylinder_real(z.real());
  return detail::cylinder_complex(z);
}

inline cplx hankel1(int order, cplx z) {
  if (order != 0 && order != 1) throw DomainError("hankel1: order must be 0 or 1");
  const CylinderValues v = cylinder01(z);
  return order == 0 ? v.h0 : v.h1;
}

/// G_k(r) = (i/4) H0^(1)(k r).
inline cplx greens_kernel(const Wavenumber& k, double r) {
  if (!(r > 0.0)) throw DomainError("greens_kernel: distance must be positive");
  return 0.25 * kI * hankel1(0, k.value() * r);
}

}  // namespace msdd
