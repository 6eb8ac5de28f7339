#pragma once
//
// Nyström matrices of the Helmholtz layer operators.
//
// Conventions (outward normal n, G(x,y) = (i/4) H0(k|x-y|)):
//   S φ(x)  = ∫ G φ ds,            K φ(x)  = ∫ ∂_{n_y} G φ ds,
//   Kᵀ φ(x) = ∫ ∂_{n_x} G φ ds,    N φ(x)  = ∂_{n_x} ∫ ∂_{n_y} G φ ds.
// Traces: interior Dirichlet of DL = -½ + K, exterior = ½ + K; interior
// Neumann of SL = ½ + Kᵀ, exterior = -½ + Kᵀ.
//
// Self-interaction on closed curves splits every log-singular kernel as
// M1(t,s) log(4 sin²((t-s)/2)) + M2(t,s) and integrates the first part with
// the Kussmaul-Martensen weights. N uses the Maue form
//   N φ = d/ds S[dφ/ds] + k² n_x · S[n_y φ],
// with d/ds realised by trigonometric differentiation in the parameter.
//

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <vector>

#include "msdd/common.hpp"
#include "msdd/geometry.hpp"
#include "msdd/specfun.hpp"

namespace msdd {

enum class OpKind { S, K, Kt, N, SLcross, DLcross, dnSLcross, dnDLcross };

/// Dense boundary operator blocks of one closed curve.
struct SelfOperators {
  CMatrix S, K, Kt, N;
};

/// Which self operators to assemble.
struct SelfMask {
  bool S = true, K = true, Kt = true, N = true;
};

namespace detail {

// Kussmaul-Martensen weights R(d), d = index difference on an N-point
// equispaced periodic grid (N even):
//   ∫_0^{2π} log(4 sin²((t_i - s)/2)) f(s) ds ≈ Σ_j R(i-j) f(t_j).
inline RVector km_weights(int N) {
  const int n = N / 2;
  RVector R(N);
  for (int d = 0; d < N; ++d) {
    double s = 0.0;
    for (int m = 1; m < n; ++m) s += std::cos(2.0 * kPi * m * d / N) / m;
    R[d] = -(2.0 * kPi / n) * s - (kPi / (double(n) * n)) * ((d % 2 == 0) ? 1.0 : -1.0);
  }
  return R;
}

// Trigonometric differentiation on an N-point equispaced grid (N even).
inline Eigen::MatrixXd spectral_diff(int N) {
  const double h = 2.0 * kPi / N;
  Eigen::MatrixXd D(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      D(i, j) = (i == j) ? 0.0
                         : 0.5 * (((i - j) % 2 == 0) ? 1.0 : -1.0) / std::tan(0.5 * h * (i - j));
  return D;
}

inline double log_periodic(double x) {
  const double s = std::sin(0.5 * x);
  return std::log(4.0 * s * s);
}

inline void require_closed(const MeshedBoundary& m, const char* who) {
  if (!m.closed()) throw TopologyError(std::string(who) + ": open-arc mesh passed to a closed-curve operator");
  if (m.size() % 2 != 0) throw ParameterError(std::string(who) + ": closed mesh needs an even node count");
}

}  // namespace detail

/// All requested self operators of a closed curve in one pass over the kernel.
inline SelfOperators assemble_self_set(const MeshedBoundary& m, const Wavenumber& kw,
                                       SelfMask mask = {}) {
  detail::require_closed(m, "assemble_self");
  const int N = m.size();
  const cplx k = kw.value();
  const double h = 2.0 * kPi / N;
  const RVector R = detail::km_weights(N);
  const bool need_st = mask.S || mask.N;
  CMatrix St, T, K, Kt;
  if (need_st) St.resize(N, N);
  if (mask.N) T.resize(N, N);
  if (mask.K) K.resize(N, N);
  if (mask.Kt) Kt.resize(N, N);
  const bool need_j1 = mask.K || mask.Kt;

#pragma omp parallel for schedule(static)
  for (int i = 0; i < N; ++i) {
    const Vec2 xi = m.nodes[i];
    const Vec2 ni = m.normals[i];
    for (int j = 0; j < N; ++j) {
      const int d = ((i - j) % N + N) % N;
      if (i == j) {
        const cplx m2 = 0.25 * kI - kEulerGamma / (2.0 * kPi) -
                        std::log(k * m.speed[i] / 2.0) / (2.0 * kPi);
        const cplx m1 = -1.0 / (4.0 * kPi);
        const cplx st = R[0] * m1 + h * m2;
        if (need_st) St(i, i) = st;
        if (mask.N) T(i, i) = st;  // n_i · n_i = 1
        const double kdiag = -m.curvature[i] * m.speed[i] / (4.0 * kPi) * h;
        if (mask.K) K(i, i) = kdiag;
        if (mask.Kt) Kt(i, i) = kdiag;
        continue;
      }
      const Vec2 dx = xi - m.nodes[j];
      const double r = dx.norm();
      const cplx z = k * r;
      const CylinderValues cv = cylinder01(z);
      const double lg = detail::log_periodic(m.param[i] - m.param[j]);
      if (need_st) {
        const cplx g = 0.25 * kI * cv.h0;
        const cplx m1 = -cv.j0 / (4.0 * kPi);
        const cplx m2 = g - m1 * lg;
        const cplx st = R[d] * m1 + h * m2;
        if (need_st) St(i, j) = st;
        if (mask.N) T(i, j) = st * ni.dot(m.normals[j]);
      }
      if (need_j1) {
        const cplx a = 0.25 * kI * k * cv.h1 / r;
        const cplx a1 = -k * cv.j1 / (4.0 * kPi * r);
        if (mask.K) {
          const double c = m.normals[j].dot(dx) * m.speed[j];
          K(i, j) = R[d] * (a1 * c) + h * (a * c - a1 * c * lg);
        }
        if (mask.Kt) {
          const double c = -ni.dot(dx) * m.speed[j];
          Kt(i, j) = R[d] * (a1 * c) + h * (a * c - a1 * c * lg);
        }
      }
    }
  }

  SelfOperators out;
  const Eigen::VectorXd speed = m.speed;
  if (mask.N) {
    const Eigen::MatrixXd D = detail::spectral_diff(N);
    const CMatrix Dc = D.cast<cplx>();
    CMatrix tmp = St * Dc;
    CMatrix n_op = Dc * tmp;
    for (int i = 0; i < N; ++i) n_op.row(i) /= speed[i];
    n_op.noalias() += (k * k) * (T * speed.cast<cplx>().asDiagonal());
    out.N = std::move(n_op);
  }
  if (mask.S) out.S = St * speed.cast<cplx>().asDiagonal();
  if (mask.K) out.K = std::move(K);
  if (mask.Kt) out.Kt = std::move(Kt);
  return out;
}

/// One self operator (S, K, Kt or N) on a closed curve.
inline CMatrix assemble_self(OpKind kind, const MeshedBoundary& m, const Wavenumber& k) {
  SelfMask mask{false, false, false, false};
  switch (kind) {
    case OpKind::S: mask.S = true; break;
    case OpKind::K: mask.K = true; break;
    case OpKind::Kt: mask.Kt = true; break;
    case OpKind::N: mask.N = true; break;
    default: throw ParameterError("assemble_self: not a self-operator kind");
  }
  SelfOperators ops = assemble_self_set(m, k, mask);
  switch (kind) {
    case OpKind::S: return std::move(ops.S);
    case OpKind::K: return std::move(ops.K);
    case OpKind::Kt: return std::move(ops.Kt);
    default: return std::move(ops.N);
  }
}

// ---------------------------------------------------------------------------
// Corner corrections on graded polygons
//
// Near a corner the kernels vary on the scale of the node-to-corner distance
// and the quadrature over the adjacent edge loses its order. For every target
// and every other edge the Laplace part of the rule is replaced by exact edge
// integrals of a local model density: the nearest edge value for S and Kᵀ,
// the Taylor polynomial u_i + ∇u_i·(y - x_i) for K and N. The N correction
// uses N₀v = (-½ + K₀ᵀ) ∂_n v for linear v. The Taylor polynomial needs ∂_n u
// at the target, so corrected K and N act on the Cauchy pair (u, ∂_n u).

namespace detail {

// (1/2π) ∫_a^b n_x·(y - x)/|y - x|² ds_y.
inline double edge_kt0(const Vec2& x, const Vec2& nx, const Vec2& a, const Vec2& b) {
  const double L = (b - a).norm();
  const Vec2 t = (b - a) / L;
  const Vec2 p = a - x;
  const double pt = p.dot(t);
  const Vec2 pp = p - pt * t;
  const double d = pp.norm();
  double v = nx.dot(t) * std::log((b - x).norm() / (a - x).norm());
  if (d > 1e-14) v += nx.dot(pp) / d * (std::atan((L + pt) / d) - std::atan(pt / d));
  return v / (2.0 * kPi);
}

// (1/2π) ∫_a^b n_e·(x - y)/|x - y|² c·(y - x) ds_y.
inline double edge_k0_linear(const Vec2& x, const Vec2& a, const Vec2& b, const Vec2& c) {
  const double L = (b - a).norm();
  const Vec2 t = (b - a) / L;
  const Vec2 ne(t.y(), -t.x());
  const double h = ne.dot(x - a);
  const Vec2 p = a - x;
  const double pt = t.dot(p);
  const double d = std::abs(h);
  const double at = d > 1e-14 ? (std::atan((L + pt) / d) - std::atan(pt / d)) / d : 0.0;
  const double lg = 0.5 * std::log(((pt + L) * (pt + L) + d * d) / (pt * pt + d * d));
  const double alpha = p.dot(c) - pt * t.dot(c);
  return h * (alpha * at + t.dot(c) * lg) / (2.0 * kPi);
}

// -(1/2π) ∫_a^b log|x - y| ds_y.
inline double edge_s0(const Vec2& x, const Vec2& a, const Vec2& b) {
  const double L = (b - a).norm();
  const Vec2 t = (b - a) / L;
  const double pt = t.dot(a - x);
  const Vec2 ne(t.y(), -t.x());
  const double d = std::abs(ne.dot(x - a));
  auto F = [d](double s) {
    const double q = s * s + d * d;
    return 0.5 * (s * (q > 0.0 ? std::log(q) : 0.0) - 2.0 * s + (d > 0.0 ? 2.0 * d * std::atan(s / d) : 0.0));
  };
  return -(F(pt + L) - F(pt)) / (2.0 * kPi);
}

// Weights of the derivative at 0 of the Lagrange interpolant through s.
inline std::vector<double> lagrange_derivative(const std::vector<double>& s) {
  const int m = static_cast<int>(s.size());
  std::vector<double> w(m);
  for (int a = 0; a < m; ++a) {
    double den = 1.0, der = 0.0;
    for (int b = 0; b < m; ++b)
      if (b != a) den *= s[a] - s[b];
    for (int c = 0; c < m; ++c) {
      if (c == a) continue;
      double prod = 1.0;
      for (int b = 0; b < m; ++b)
        if (b != a && b != c) prod *= -s[b];
      der += prod;
    }
    w[a] = der / den;
  }
  return w;
}

inline constexpr int kTangentStencil = 8;

}  // namespace detail

/// Corrections of the self operators of a graded polygon.
struct CornerCorrection {
  CMatrix S, Kt;         // added to S and Kᵀ
  RVector k_diag;        // added to the diagonal of K
  RVector k_dn, k_dt;    // K picks up k_dn ∂_n u + k_dt ∂_t u at the target
  RVector n_dn, n_dt;    // N likewise
  Eigen::MatrixXd Dt;    // ∂_t along each edge from nodal values
};

inline CornerCorrection corner_correction(const MeshedBoundary& m) {
  if (m.topology != Topology::closed_cornered || m.per_edge <= 0 || m.vertices.empty())
    throw TopologyError("corner_correction needs a graded polygon mesh");
  const int N = m.size(), n = m.per_edge, E = static_cast<int>(m.vertices.size());
  if (E * n != N) throw ParameterError("corner_correction: vertex count does not match the mesh");
  const int ns = std::min(detail::kTangentStencil, n);
  const double h = 2.0 * kPi / N;
  CornerCorrection c;
  c.S.setZero(N, N);
  c.Kt.setZero(N, N);
  c.k_diag.setZero(N);
  c.k_dn.setZero(N);
  c.k_dt.setZero(N);
  c.Dt.setZero(N, N);

  // Discrete Laplace N on the coordinate functions.
  const RVector R = detail::km_weights(N);
  Eigen::MatrixXd S0(N, N);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      const double m1 = -1.0 / (4.0 * kPi);
      const double m2 = i == j ? -std::log(m.speed[i]) / (2.0 * kPi)
                               : -std::log((m.nodes[i] - m.nodes[j]).norm()) / (2.0 * kPi) -
                                     m1 * detail::log_periodic(m.param[i] - m.param[j]);
      S0(i, j) = R[((i - j) % N + N) % N] * m1 + h * m2;
    }
  const Eigen::MatrixXd D = detail::spectral_diff(N);
  Eigen::MatrixXd X(N, 2);
  for (int i = 0; i < N; ++i) X.row(i) = m.nodes[i].transpose();
  Eigen::MatrixXd NX = D * (S0 * (D * X));
  for (int i = 0; i < N; ++i) NX.row(i) /= m.speed[i];
  c.n_dn.resize(N);
  c.n_dt.resize(N);

#pragma omp parallel for schedule(static)
  for (int i = 0; i < N; ++i) {
    const int ei = i / n;
    const Vec2 x = m.nodes[i], nx = m.normals[i], tx(-nx.y(), nx.x());
    // Contiguous window of ns edge nodes around i, shifted inside the edge.
    const int lo = std::clamp(i - ns / 2, ei * n, (ei + 1) * n - ns);
    std::vector<int> st(ns);
    for (int q = 0; q < ns; ++q) st[q] = lo + q;
    std::vector<double> s(ns);
    for (int q = 0; q < ns; ++q) s[q] = tx.dot(m.nodes[st[q]] - x);
    const auto w = detail::lagrange_derivative(s);
    for (int q = 0; q < ns; ++q) c.Dt(i, st[q]) = w[q];

    double exact_n = -0.5, exact_t = 0.0, k0_row = 0.0;
    for (int e = 0; e < E; ++e) {
      if (e == ei) continue;
      const Vec2 a = m.vertices[e], b = m.vertices[(e + 1) % E];
      const double kt = detail::edge_kt0(x, nx, a, b);
      const Vec2 ne = m.normals[e * n];
      exact_n += ne.dot(nx) * kt;
      exact_t += ne.dot(tx) * kt;
      const double k_n = detail::edge_k0_linear(x, a, b, nx);
      const double k_t = detail::edge_k0_linear(x, a, b, tx);
      double kt_q = 0.0, k_one_q = 0.0, k_n_q = 0.0, k_t_q = 0.0, s_q = 0.0, best = 1e300;
      int jb = e * n;
      for (int j = e * n; j < (e + 1) * n; ++j) {
        const Vec2 d = m.nodes[j] - x;
        const double r2 = d.squaredNorm();
        kt_q += nx.dot(d) / (2.0 * kPi * r2) * m.weights[j];
        const double kk = -m.normals[j].dot(d) / (2.0 * kPi * r2) * m.weights[j];
        k_one_q += kk;
        k_n_q += kk * nx.dot(d);
        k_t_q += kk * tx.dot(d);
        s_q -= std::log(r2) / (4.0 * kPi) * m.weights[j];
        if (r2 < best) {
          best = r2;
          jb = j;
        }
      }
      c.Kt(i, jb) += kt - kt_q;
      c.S(i, jb) += detail::edge_s0(x, a, b) - s_q;
      k0_row += k_one_q;
      c.k_dn[i] += k_n - k_n_q;
      c.k_dt[i] += k_t - k_t_q;
    }
    // Gauss: interior Dirichlet trace of DL₀[1] is -1; the curvature term
    // vanishes on straight edges.
    c.k_diag[i] = -0.5 - k0_row;
    c.n_dn[i] = exact_n - nx.dot(NX.row(i).transpose());
    c.n_dt[i] = exact_t - tx.dot(NX.row(i).transpose());
  }
  return c;
}

/// K and N as operators on the Cauchy pair (u, ∂_n u).
struct CauchyOperator {
  CMatrix on_u, on_dn;
};

/// Self operators of a closed curve with the corner corrections applied on
/// graded polygons. K and N come back split over (u, ∂_n u).
struct CorrectedOperators {
  CMatrix S, Kt;
  CauchyOperator K, N;
};

inline CorrectedOperators corrected_self_set(const MeshedBoundary& m, const Wavenumber& k,
                                             const CornerCorrection* corr = nullptr) {
  SelfOperators ok = assemble_self_set(m, k);
  CorrectedOperators out;
  const int N = m.size();
  out.K.on_dn.setZero(N, N);
  out.N.on_dn.setZero(N, N);
  if (m.topology == Topology::closed_cornered) {
    std::optional<CornerCorrection> own;
    if (!corr) corr = &own.emplace(corner_correction(m));
    if (corr->S.rows() != N) throw ParameterError("corner correction does not match the mesh");
    ok.S += corr->S;
    ok.Kt += corr->Kt;
    const Eigen::MatrixXd kt_part = corr->k_dt.asDiagonal() * corr->Dt;
    const Eigen::MatrixXd nt_part = corr->n_dt.asDiagonal() * corr->Dt;
    ok.K += kt_part.cast<cplx>();
    ok.K.diagonal() += corr->k_diag.cast<cplx>();
    ok.N += nt_part.cast<cplx>();
    out.K.on_dn.diagonal() = corr->k_dn.cast<cplx>();
    out.N.on_dn.diagonal() = corr->n_dn.cast<cplx>();
  }
  out.S = std::move(ok.S);
  out.Kt = std::move(ok.Kt);
  out.K.on_u = std::move(ok.K);
  out.N.on_u = std::move(ok.N);
  return out;
}

/// Single-layer self matrix on a segment, acting on the physical density at
/// the arc nodes.
inline CMatrix assemble_arc_self_S(const MeshedBoundary& m, const Wavenumber& kw) {
  if (m.topology != Topology::open_arc)
    throw TopologyError("assemble_arc_self_S: mesh is not an open arc");
  const int n = m.size();
  const int N2 = 2 * n;
  const cplx k = kw.value();
  const RVector R = detail::km_weights(N2);
  const double L = 2.0 * m.speed[0] / std::sin(m.param[0]);
  CMatrix A(n, n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const double t = m.param[i];
    for (int j = 0; j < n; ++j) {
      const int sigma = N2 - 1 - j;  // mirror node 2π - s_j
      const double rsum = R[((i - j) % N2 + N2) % N2] + R[((i - sigma) % N2 + N2) % N2];
      cplx m1, m2;
      if (i == j) {
        m1 = -1.0 / (4.0 * kPi);
        m2 = 0.25 * kI - (kEulerGamma + std::log(k * L / 8.0)) / (2.0 * kPi);
      } else {
        const double s = m.param[j];
        const double r = (m.nodes[i] - m.nodes[j]).norm();
        const CylinderValues cv = cylinder01(k * r);
        m1 = -cv.j0 / (4.0 * kPi);
        m2 = 0.25 * kI * cv.h0 + cv.j0 / (4.0 * kPi) *
                                     (detail::log_periodic(t - s) + detail::log_periodic(t + s));
      }
      A(i, j) = (rsum * m1 + (kPi / n) * m2) * m.speed[j];
    }
  }
  return A;
}

/// Cross interaction between disjoint curves (plain quadrature with source
/// weights). Rows are target nodes, columns source nodes.
inline CMatrix assemble_cross(OpKind kind, const MeshedBoundary& src, const MeshedBoundary& tgt,
                              const Wavenumber& kw) {
  if (kind != OpKind::SLcross && kind != OpKind::DLcross && kind != OpKind::dnSLcross &&
      kind != OpKind::dnDLcross)
    throw ParameterError("assemble_cross: not a cross-operator kind");
  const cplx k = kw.value();
  const int M = tgt.size(), Ns = src.size();
  CMatrix A(M, Ns);
  std::atomic<bool> overlap{false};
#pragma omp parallel for schedule(static)
  for (int i = 0; i < M; ++i) {
    const Vec2 x = tgt.nodes[i];
    const Vec2 nx = tgt.normals[i];
    for (int j = 0; j < Ns; ++j) {
      const Vec2 d = x - src.nodes[j];
      const double r = d.norm();
      if (!(r > 1e-10)) {
        overlap = true;
        A(i, j) = 0.0;
        continue;
      }
      const CylinderValues cv = cylinder01(k * r);
      const double w = src.weights[j];
      const Vec2 ny = src.normals[j];
      switch (kind) {
        case OpKind::SLcross: A(i, j) = 0.25 * kI * cv.h0 * w; break;
        case OpKind::DLcross: A(i, j) = 0.25 * kI * k * cv.h1 * (ny.dot(d) / r) * w; break;
        case OpKind::dnSLcross: A(i, j) = -0.25 * kI * k * cv.h1 * (nx.dot(d) / r) * w; break;
        default: {
          const double a = nx.dot(d) / r, b = ny.dot(d) / r;
          A(i, j) = 0.25 * kI * k * (k * cv.h0 * a * b + cv.h1 / r * (nx.dot(ny) - 2.0 * a * b)) * w;
        }
      }
    }
  }
  if (overlap) throw GeometryError("assemble_cross: source and target curves overlap");
  return A;
}

// ---------------------------------------------------------------------------
// Off-surface evaluation

/// Field values with the indices of points that were too close to the source
/// curve to evaluate (those entries are NaN).
struct FieldResult {
  CVector values;
  std::vector<int> near_points;
};

/// Default near-field threshold in units of the local mesh spacing.
inline constexpr double kNearFieldFactor = 3.0;

enum class LayerKind { SL, DL };

inline bool is_near(const MeshedBoundary& m, const Vec2& x, double factor = kNearFieldFactor) {
  int best = 0;
  double d2 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m.size(); ++i) {
    const double di = (m.nodes[i] - x).squaredNorm();
    if (di < d2) {
      d2 = di;
      best = i;
    }
  }
  return std::sqrt(d2) < factor * m.weights[best];
}

inline FieldResult eval_potential(LayerKind kind, const MeshedBoundary& src, const CVector& density,
                                  const std::vector<Vec2>& points, const Wavenumber& kw,
                                  double near_factor = kNearFieldFactor) {
  if (density.size() != src.size()) throw ParameterError("eval_potential: density size mismatch");
  const cplx k = kw.value();
  const int P = static_cast<int>(points.size());
  FieldResult out;
  out.values = CVector::Zero(P);
  std::vector<char> near(P, 0);
#pragma omp parallel for schedule(static)
  for (int p = 0; p < P; ++p) {
    const Vec2 x = points[p];
    if (src.size() > 0 && is_near(src, x, near_factor)) {
      near[p] = 1;
      out.values[p] = cplx(std::nan(""), std::nan(""));
      continue;
    }
    cplx acc = 0.0;
    for (int j = 0; j < src.size(); ++j) {
      const Vec2 d = x - src.nodes[j];
      const double r = d.norm();
      const CylinderValues cv = cylinder01(k * r);
      const cplx ker = kind == LayerKind::SL
                           ? 0.25 * kI * cv.h0
                           : 0.25 * kI * k * cv.h1 * (src.normals[j].dot(d) / r);
      acc += ker * src.weights[j] * density[j];
    }
    out.values[p] = acc;
  }
  for (int p = 0; p < P; ++p)
    if (near[p]) out.near_points.push_back(p);
  return out;
}

/// γ_k = e^{iπ/4} / sqrt(8πk).
inline cplx far_field_constant(double k) {
  return std::exp(0.25 * kI * kPi) / std::sqrt(8.0 * kPi * k);
}

inline CVector far_field(LayerKind kind, const MeshedBoundary& src, const CVector& density,
                         const std::vector<Vec2>& directions, const Wavenumber& kw) {
  if (!kw.is_real()) throw UnsupportedError("far field requires a real wavenumber");
  if (density.size() != src.size()) throw ParameterError("far_field: density size mismatch");
  const double k = kw.real();
  const cplx gamma = far_field_constant(k);
  CVector out(directions.size());
  for (std::size_t q = 0; q < directions.size(); ++q) {
    const Vec2 xh = directions[q];
    cplx acc = 0.0;
    for (int j = 0; j < src.size(); ++j) {
      const cplx e = std::exp(-kI * k * xh.dot(src.nodes[j]));
      const cplx f = kind == LayerKind::SL ? cplx(1.0) : -kI * k * xh.dot(src.normals[j]);
      acc += f * e * src.weights[j] * density[j];
    }
    out[q] = gamma * acc;
  }
  return out;
}

/// Unit vectors at angles 2π q / count.
inline std::vector<Vec2> uniform_directions(int count) {
  std::vector<Vec2> d(count);
  for (int q = 0; q < count; ++q) {
    const double th = 2.0 * kPi * q / count;
    d[q] = Vec2(std::cos(th), std::sin(th));
  }
  return d;
}

}  // namespace msdd
