#pragma once
//
// Reference solutions: the Mie series for one sound-soft circle and a global
// first-kind single-layer solver for a whole cloud.
//

#include <chrono>

#include <boost/math/special_functions/bessel.hpp>

#include "msdd/bio.hpp"
#include "msdd/fields.hpp"

namespace msdd {

struct FarFieldSamples {
  std::vector<double> angles;
  CVector values;

  static std::vector<double> uniform_angles(int count) {
    std::vector<double> a(count);
    for (int q = 0; q < count; ++q) a[q] = 2.0 * kPi * q / count;
    return a;
  }
  std::vector<Vec2> directions() const {
    std::vector<Vec2> d;
    for (double t : angles) d.emplace_back(std::cos(t), std::sin(t));
    return d;
  }
};

/// max|a - b| / max|b| over identical direction grids.
inline double compare_far_fields(const FarFieldSamples& a, const FarFieldSamples& b) {
  if (a.angles.size() != b.angles.size() || a.values.size() != b.values.size())
    throw ParameterError("far-field grids differ in size");
  for (std::size_t i = 0; i < a.angles.size(); ++i)
    if (std::abs(a.angles[i] - b.angles[i]) > 1e-14)
      throw ParameterError("far-field direction grids differ");
  return rel_max_error(a.values, b.values);
}

/// Plane-wave scattering by a sound-soft circle, expanded about its centre.
class MieSeries {
 public:
  MieSeries(double radius, Vec2 center, double k, double incident_angle, int n_terms = -1)
      : a_(radius), c_(center), k_(k), alpha_(incident_angle) {
    if (!(radius > 0.0) || !(k > 0.0)) throw ParameterError("Mie series needs a > 0 and k > 0");
    const int guard = static_cast<int>(std::ceil(k * radius)) + 15;
    n_ = n_terms < 0 ? guard + 20 : n_terms;
    if (n_ < guard) throw ParameterError("Mie series needs at least ka + 15 terms");
    const double ka = k * radius;
    for (int n = 0; n <= n_ + 1; ++n) {
      const cplx h = hankel(n, ka);
      ratio_.push_back(boost::math::cyl_bessel_j(n, ka) / h);
      inv_h_.push_back(1.0 / h);
    }
    tail_ = std::abs(ratio_[n_ + 1]);
  }

  int terms() const { return n_; }
  /// |J_{N+1}(ka)/H_{N+1}(ka)|, the first omitted coefficient.
  double tail_estimate() const { return tail_; }
  bool truncation_warning() const { return tail_ > 1e-12; }
  /// J_n(ka)/H_n⁽¹⁾(ka).
  cplx coefficient(int n) const { return ratio_.at(std::abs(n)); }

  CVector far_field(const std::vector<double>& angles) const {
    const Vec2 d(std::cos(alpha_), std::sin(alpha_));
    const cplx pre = -std::sqrt(2.0 / (kPi * k_)) * std::exp(-0.25 * kI * kPi);
    CVector u(static_cast<Eigen::Index>(angles.size()));
    for (std::size_t q = 0; q < angles.size(); ++q) {
      const double th = angles[q];
      const Vec2 xh(std::cos(th), std::sin(th));
      cplx s = ratio_[0];
      for (int n = 1; n <= n_; ++n) s += 2.0 * ratio_[n] * std::cos(n * (th - alpha_));
      u[static_cast<Eigen::Index>(q)] = pre * std::exp(kI * k_ * (d - xh).dot(c_)) * s;
    }
    return u;
  }

  FarFieldSamples far_field_samples(int count) const {
    FarFieldSamples f;
    f.angles = FarFieldSamples::uniform_angles(count);
    f.values = far_field(f.angles);
    return f;
  }

  /// Scattered field at points outside the circle.
  CVector scattered(const std::vector<Vec2>& points) const {
    const cplx phase = std::exp(kI * k_ * direction().dot(c_));
    CVector u(static_cast<Eigen::Index>(points.size()));
    for (std::size_t q = 0; q < points.size(); ++q) {
      const Vec2 x = points[q] - c_;
      const double r = x.norm(), th = std::atan2(x.y(), x.x());
      if (!(r > a_)) throw ParameterError("Mie field requested inside the circle");
      cplx s = ratio_[0] * hankel(0, k_ * r);
      cplx in = 1.0;
      for (int n = 1; n <= n_; ++n) {
        in *= kI;
        s += 2.0 * in * ratio_[n] * hankel(n, k_ * r) * std::cos(n * (th - alpha_));
      }
      u[static_cast<Eigen::Index>(q)] = -phase * s;
    }
    return u;
  }

  /// Gradient of the scattered field at points outside the circle.
  std::vector<Eigen::Vector2cd> scattered_gradient(const std::vector<Vec2>& points) const {
    const cplx phase = std::exp(kI * k_ * direction().dot(c_));
    std::vector<Eigen::Vector2cd> out;
    for (const auto& p : points) {
      const Vec2 x = p - c_;
      const double r = x.norm(), th = std::atan2(x.y(), x.x());
      if (!(r > a_)) throw ParameterError("Mie field requested inside the circle");
      const double kr = k_ * r;
      // H_n' = H_{n-1} - (n/x) H_n, and H_0' = -H_1.
      cplx dr = -ratio_[0] * k_ * hankel(1, kr), dth = 0.0;
      cplx in = 1.0;
      for (int n = 1; n <= n_; ++n) {
        in *= kI;
        const cplx h = hankel(n, kr);
        const cplx c = 2.0 * in * ratio_[n];
        dr += c * k_ * (hankel(n - 1, kr) - (n / kr) * h) * std::cos(n * (th - alpha_));
        dth -= c * h * static_cast<double>(n) * std::sin(n * (th - alpha_));
      }
      const Vec2 er = x / r, et(-er.y(), er.x());
      out.push_back(-phase * (dr * er.cast<cplx>() + (dth / r) * et.cast<cplx>()));
    }
    return out;
  }

  /// ∂_r of the total field on the circle at polar angles `theta`.
  CVector neumann_trace(const std::vector<double>& theta) const {
    const cplx phase = std::exp(kI * k_ * direction().dot(c_));
    CVector v(static_cast<Eigen::Index>(theta.size()));
    for (std::size_t q = 0; q < theta.size(); ++q) {
      cplx s = inv_h_[0];
      cplx in = 1.0;
      for (int n = 1; n <= n_; ++n) {
        in *= kI;
        s += 2.0 * in * inv_h_[n] * std::cos(n * (theta[q] - alpha_));
      }
      v[static_cast<Eigen::Index>(q)] = -2.0 * kI / (kPi * a_) * phase * s;
    }
    return v;
  }

 private:
  static cplx hankel(int n, double x) {
    return {boost::math::cyl_bessel_j(n, x), boost::math::cyl_neumann(n, x)};
  }
  Vec2 direction() const { return {std::cos(alpha_), std::sin(alpha_)}; }

  double a_;
  Vec2 c_;
  double k_, alpha_;
  int n_ = 0;
  std::vector<cplx> ratio_, inv_h_;
  double tail_ = 0.0;
};

struct GlobalBieOptions {
  int n_per_scatterer = 32;
  double unknown_budget = 2e4;
  /// Bytes allowed for the dense system matrix.
  double memory_budget = 4.0 * 1024 * 1024 * 1024;
};

struct GlobalBieResult {
  std::vector<MeshedBoundary> meshes;
  std::vector<CVector> densities;  // SL densities, u^s = Σ SL_p φ_p
  int unknowns = 0;
  double condition = 0.0;
  double seconds = 0.0;
};

/// First-kind single-layer formulation on all scatterers: Σ_q S_pq φ_q = -u^inc.
inline GlobalBieResult global_bie_solve(const std::vector<Scatterer>& cloud, double k,
                                        const IncidentField& f, const GlobalBieOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  GlobalBieResult res;
  std::vector<int> off{0};
  for (const auto& s : cloud) {
    res.meshes.push_back(build_scatterer_mesh(s, opt.n_per_scatterer));
    off.push_back(off.back() + res.meshes.back().size());
  }
  const int N = off.back();
  res.unknowns = N;
  const double bytes = 16.0 * N * static_cast<double>(N);
  if (N > opt.unknown_budget || bytes > opt.memory_budget)
    throw BudgetError("global BIE needs " + std::to_string(N) + " unknowns (" +
                      std::to_string(bytes / (1024.0 * 1024 * 1024)) +
                      " GiB); budget " + std::to_string(static_cast<long long>(opt.unknown_budget)) +
                      " unknowns, " + std::to_string(opt.memory_budget / (1024.0 * 1024 * 1024)) + " GiB");
  const Wavenumber kw(k);
  const int P = static_cast<int>(cloud.size());
  CMatrix A(N, N);
  CVector rhs(N);
  for (int p = 0; p < P; ++p) {
    const MeshedBoundary& mp = res.meshes[p];
    A.block(off[p], off[p], mp.size(), mp.size()) =
        mp.closed() ? assemble_self(OpKind::S, mp, kw) : assemble_arc_self_S(mp, kw);
    for (int q = 0; q < P; ++q)
      if (q != p)
        A.block(off[p], off[q], mp.size(), res.meshes[q].size()) =
            assemble_cross(OpKind::SLcross, res.meshes[q], mp, kw);
    rhs.segment(off[p], mp.size()) = -f.values(mp.nodes);
  }
  // In-place factorization keeps one N×N matrix alive.
  Eigen::PartialPivLU<Eigen::Ref<CMatrix>> lu(A);
  const double rc = lu.rcond();
  res.condition = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
  const CVector phi = lu.solve(rhs);
  for (int p = 0; p < P; ++p) res.densities.push_back(phi.segment(off[p], res.meshes[p].size()));
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

inline FarFieldSamples global_bie_far_field(const GlobalBieResult& r, double k,
                                            const std::vector<double>& angles) {
  FarFieldSamples out;
  out.angles = angles;
  out.values = CVector::Zero(static_cast<Eigen::Index>(angles.size()));
  const std::vector<Vec2> dirs = out.directions();
  for (std::size_t p = 0; p < r.meshes.size(); ++p)
    out.values += far_field(LayerKind::SL, r.meshes[p], r.densities[p], dirs, Wavenumber(k));
  return out;
}

inline std::vector<Scatterer> flatten_cloud(const BoxGrid& g) {
  std::vector<Scatterer> all;
  for (const auto& v : g.scatterers) all.insert(all.end(), v.begin(), v.end());
  return all;
}

}  // namespace msdd
