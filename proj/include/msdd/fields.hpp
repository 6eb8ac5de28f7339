#pragma once
//
// Known fields sampled on boundary nodes: the incident plane wave and a
// radiating point source, as Cauchy data and as Robin data (∂_n ∓ iη)u.
//

#include <vector>

#include "msdd/specfun.hpp"

namespace msdd {

struct IncidentField {
  Vec2 direction = Vec2(1.0, 0.0);
  double k = 1.0;

  static IncidentField plane_wave(double k, double angle) {
    IncidentField f;
    f.k = k;
    f.direction = Vec2(std::cos(angle), std::sin(angle));
    return f;
  }
  void validate() const {
    if (!(k > 0.0)) throw ParameterError("incident wavenumber must be positive");
    if (std::abs(direction.norm() - 1.0) > 1e-12) throw ParameterError("direction must be a unit vector");
  }
  cplx value(const Vec2& x) const { return std::exp(kI * k * direction.dot(x)); }
  CVector values(const std::vector<Vec2>& xs) const {
    CVector v(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) v[i] = value(xs[i]);
    return v;
  }
};

struct CauchyData {
  CVector u, dn;
};

struct RobinData {
  CVector minus, plus;  // (∂_n - iη)u and (∂_n + iη)u
};

inline RobinData to_robin(const CauchyData& c, double eta) {
  return {c.dn - (kI * eta) * c.u, c.dn + (kI * eta) * c.u};
}

/// u = (g₊ - g₋)/(2iη), ∂_n u = (g₊ + g₋)/2.
inline CauchyData from_robin(const RobinData& r, double eta) {
  return {(r.plus - r.minus) / (2.0 * kI * eta), 0.5 * (r.plus + r.minus)};
}

inline CauchyData plane_wave_cauchy(const IncidentField& f, const std::vector<Vec2>& nodes,
                                    const std::vector<Vec2>& normals) {
  f.validate();
  const int n = static_cast<int>(nodes.size());
  CauchyData c{CVector(n), CVector(n)};
  for (int i = 0; i < n; ++i) {
    c.u[i] = f.value(nodes[i]);
    c.dn[i] = kI * f.k * f.direction.dot(normals[i]) * c.u[i];
  }
  return c;
}

/// Nodal samples of (∂_n ∓ iη)u^inc.
inline RobinData incident_traces(const IncidentField& f, const std::vector<Vec2>& nodes,
                                 const std::vector<Vec2>& normals, double eta) {
  return to_robin(plane_wave_cauchy(f, nodes, normals), eta);
}

/// Cauchy data of G_k(· - x0) = (i/4) H₀⁽¹⁾(k|· - x0|).
inline CauchyData point_source_cauchy(double k, const Vec2& x0, const std::vector<Vec2>& nodes,
                                      const std::vector<Vec2>& normals) {
  const int n = static_cast<int>(nodes.size());
  CauchyData c{CVector(n), CVector(n)};
  for (int i = 0; i < n; ++i) {
    const Vec2 d = nodes[i] - x0;
    const double r = d.norm();
    if (!(r > 0.0)) throw GeometryError("point source on a boundary node");
    const CylinderValues v = cylinder01(cplx(k * r));
    c.u[i] = 0.25 * kI * v.h0;
    c.dn[i] = -0.25 * kI * k * v.h1 * normals[i].dot(d) / r;
  }
  return c;
}

inline RobinData point_source_traces(double k, const Vec2& x0, const std::vector<Vec2>& nodes,
                                     const std::vector<Vec2>& normals, double eta) {
  return to_robin(point_source_cauchy(k, x0, nodes, normals), eta);
}

inline double rel_max_error(const CVector& a, const CVector& ref) {
  const double s = ref.cwiseAbs().maxCoeff();
  const double d = (a - ref).cwiseAbs().maxCoeff();
  return s > 0.0 ? d / s : d;
}

}  // namespace msdd
