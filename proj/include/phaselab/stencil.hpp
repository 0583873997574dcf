#pragma once

#include "phaselab/grid.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace phaselab {

namespace detail {

// Neighbour value along `axis` at offset +-1, honouring the boundary rule.
// Returns NaN only for Dirichlet faces, where callers never ask.
inline double neighbour(const ScalarField& f, const std::array<int, 3>& ijk,
                        int axis, int step) {
  const int n = f.grid.count(axis);
  int i = ijk[axis] + step;
  if (i >= 0 && i < n) {
    auto q = ijk;
    q[axis] = i;
    return f.values[f.grid.flatten(q[0], q[1], q[2])];
  }
  auto q = ijk;
  if (f.grid.periodic(axis)) {
    q[axis] = (i + n) % n;
  } else {  // NeumannZero mirror ghost
    q[axis] = ijk[axis] - step;
  }
  return f.values[f.grid.flatten(q[0], q[1], q[2])];
}

}  // namespace detail

// Second-order central Laplacian. Dirichlet boundary nodes get value 0 (they
// carry data, not equations); Neumann faces use mirror ghosts, periodic wrap.
inline ScalarField laplacian(const ScalarField& f) {
  for (int a = 0; a < f.grid.dim(); ++a)
    if (f.grid.count(a) < 3) throw ConfigError("laplacian: need >= 3 nodes per axis");
  if (!f.values.isFinite().all()) throw NumericsError("laplacian: non-finite field");
  ScalarField out = f;
  out.values.setZero();
  const std::int64_t n = f.grid.size();
  for (std::int64_t id = 0; id < n; ++id) {
    const auto ijk = f.grid.unflatten(id);
    bool dirichlet_node = false;
    for (int a = 0; a < f.grid.dim(); ++a) {
      if (!f.grid.periodic(a) && (ijk[a] == 0 || ijk[a] == f.grid.count(a) - 1)) {
        const BcKind k = ijk[a] == 0 ? f.bc.lo(a) : f.bc.hi(a);
        if (k == BcKind::Dirichlet) dirichlet_node = true;
      }
    }
    if (dirichlet_node) continue;
    double lap = 0.0;
    for (int a = 0; a < f.grid.dim(); ++a) {
      const double h = f.grid.spacing(a);
      const double up = detail::neighbour(f, ijk, a, +1);
      const double dn = detail::neighbour(f, ijk, a, -1);
      lap += (up - 2.0 * f.values[id] + dn) / (h * h);
    }
    out.values[id] = lap;
  }
  return out;
}

// First derivative along one axis: central inside, second-order one-sided at
// non-periodic faces.
inline Eigen::ArrayXd gradient_component(const ScalarField& f, int axis) {
  const std::int64_t n = f.grid.size();
  Eigen::ArrayXd g(n);
  const double h = f.grid.spacing(axis);
  const int na = f.grid.count(axis);
  for (std::int64_t id = 0; id < n; ++id) {
    const auto ijk = f.grid.unflatten(id);
    const int i = ijk[axis];
    auto value_at = [&](int ii) {
      auto q = ijk;
      q[axis] = ii;
      return f.values[f.grid.flatten(q[0], q[1], q[2])];
    };
    if (f.grid.periodic(axis)) {
      g[id] = (value_at((i + 1) % na) - value_at((i - 1 + na) % na)) / (2.0 * h);
    } else if (i == 0) {
      g[id] = (-3.0 * value_at(0) + 4.0 * value_at(1) - value_at(2)) / (2.0 * h);
    } else if (i == na - 1) {
      g[id] = (3.0 * value_at(na - 1) - 4.0 * value_at(na - 2) + value_at(na - 3)) / (2.0 * h);
    } else {
      g[id] = (value_at(i + 1) - value_at(i - 1)) / (2.0 * h);
    }
  }
  return g;
}

// |grad u|^2 by central differences (one-sided at non-periodic boundaries).
inline ScalarField gradient_sq(const ScalarField& f) {
  for (int a = 0; a < f.grid.dim(); ++a)
    if (f.grid.count(a) < 3) throw ConfigError("gradient_sq: need >= 3 nodes per axis");
  if (!f.values.isFinite().all()) throw NumericsError("gradient_sq: non-finite field");
  ScalarField out = f;
  out.values.setZero();
  for (int a = 0; a < f.grid.dim(); ++a)
    out.values += gradient_component(f, a).square();
  return out;
}

// Second derivative d^2 u / dx_a dx_b (central; mirrors/wraps per bc, one-sided
// second derivative is not needed because callers mask boundary collars).
inline Eigen::ArrayXd hessian_component(const ScalarField& f, int a, int b) {
  const std::int64_t n = f.grid.size();
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(n);
  if (a == b) {
    const double h2 = f.grid.spacing(a) * f.grid.spacing(a);
    for (std::int64_t id = 0; id < n; ++id) {
      const auto ijk = f.grid.unflatten(id);
      if (!f.grid.periodic(a) && (ijk[a] == 0 || ijk[a] == f.grid.count(a) - 1)) continue;
      out[id] = (detail::neighbour(f, ijk, a, +1) - 2.0 * f.values[id] +
                 detail::neighbour(f, ijk, a, -1)) / h2;
    }
    return out;
  }
  const double den = 4.0 * f.grid.spacing(a) * f.grid.spacing(b);
  for (std::int64_t id = 0; id < n; ++id) {
    const auto ijk = f.grid.unflatten(id);
    bool edge = false;
    for (int ax : {a, b})
      if (!f.grid.periodic(ax) && (ijk[ax] == 0 || ijk[ax] == f.grid.count(ax) - 1))
        edge = true;
    if (edge) continue;
    auto value_at = [&](int da, int db) {
      auto q = ijk;
      const int nA = f.grid.count(a), nB = f.grid.count(b);
      q[a] = f.grid.periodic(a) ? (q[a] + da + nA) % nA : q[a] + da;
      q[b] = f.grid.periodic(b) ? (q[b] + db + nB) % nB : q[b] + db;
      return f.values[f.grid.flatten(q[0], q[1], q[2])];
    };
    out[id] = (value_at(1, 1) - value_at(1, -1) - value_at(-1, 1) + value_at(-1, -1)) / den;
  }
  return out;
}

// Plain weighted integral with trapezoid node volumes.
inline double integrate(const GridSpec& g, const Eigen::ArrayXd& values) {
  double s = 0.0;
  const std::int64_t n = g.size();
  for (std::int64_t id = 0; id < n; ++id)
    s += values[id] * g.node_volume(g.unflatten(id));
  return s;
}

// L^2-type inner products for the quadratic form machinery. The link-based
// gradient product is the exact summation-by-parts partner of `laplacian` for
// zero-boundary fields: <(-lap)phi, psi> == grad_inner(phi, psi).
inline double inner(const GridSpec& g, const Eigen::ArrayXd& u, const Eigen::ArrayXd& v) {
  double s = 0.0;
  const std::int64_t n = g.size();
  for (std::int64_t id = 0; id < n; ++id)
    s += u[id] * v[id] * g.node_volume(g.unflatten(id));
  return s;
}

inline double grad_inner(const ScalarField& u, const ScalarField& v) {
  const GridSpec& g = u.grid;
  double s = 0.0;
  const std::int64_t n = g.size();
  for (std::int64_t id = 0; id < n; ++id) {
    const auto ijk = g.unflatten(id);
    for (int a = 0; a < g.dim(); ++a) {
      const int na = g.count(a);
      const bool last = ijk[a] == na - 1;
      if (last && !g.periodic(a)) continue;
      auto q = ijk;
      q[a] = g.periodic(a) ? (ijk[a] + 1) % na : ijk[a] + 1;
      const std::int64_t idq = g.flatten(q[0], q[1], q[2]);
      const double du = (u.values[idq] - u.values[id]) / g.spacing(a);
      const double dv = (v.values[idq] - v.values[id]) / g.spacing(a);
      double w = g.spacing(a);
      for (int b = 0; b < g.dim(); ++b) {
        if (b == a) continue;
        double wb = g.spacing(b);
        if (!g.periodic(b) && (ijk[b] == 0 || ijk[b] == g.count(b) - 1)) wb *= 0.5;
        w *= wb;
      }
      s += du * dv * w;
    }
  }
  return s;
}

// Quadrature weights for integration over a ball: per-node fraction of the
// node's cell inside B_r, cut cells resolved on an 8^d midpoint sub-grid.
struct BallWeights {
  Eigen::ArrayXd fraction;  // in [0,1], aligned with field values
};

inline BallWeights restrict_to_ball(const GridSpec& g, const Eigen::Vector3d& center,
                                    double radius, int subsamples = 8) {
  if (!(radius > 0.0)) throw ConfigError("restrict_to_ball: radius must be positive");
  bool overlaps = true;
  for (int a = 0; a < g.dim(); ++a) {
    const double lo = g.origin(a) - 0.5 * g.spacing(a);
    const double hi = g.origin(a) + g.length(a) + 0.5 * g.spacing(a);
    if (center[a] + radius < lo || center[a] - radius > hi) overlaps = false;
  }
  if (!overlaps) throw ConfigError("restrict_to_ball: ball does not intersect grid");

  BallWeights bw;
  bw.fraction = Eigen::ArrayXd::Zero(g.size());
  const double r2 = radius * radius;
  const std::int64_t n = g.size();
  for (std::int64_t id = 0; id < n; ++id) {
    const auto ijk = g.unflatten(id);
    // Cell bounds, clipped to the domain on non-periodic axes.
    double lo[3], hi[3];
    double near2 = 0.0, far2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      const double x = g.coord(a, ijk[a]);
      lo[a] = x - 0.5 * g.spacing(a);
      hi[a] = x + 0.5 * g.spacing(a);
      if (!g.periodic(a)) {
        lo[a] = std::max(lo[a], g.origin(a));
        hi[a] = std::min(hi[a], g.origin(a) + g.length(a));
      }
      const double c = center[a];
      const double dn = (c < lo[a]) ? lo[a] - c : (c > hi[a] ? c - hi[a] : 0.0);
      const double df = std::max(std::abs(c - lo[a]), std::abs(c - hi[a]));
      near2 += dn * dn;
      far2 += df * df;
    }
    if (far2 <= r2) {
      bw.fraction[id] = 1.0;
      continue;
    }
    if (near2 >= r2) continue;
    // Cut cell: midpoint sub-grid.
    const int s = subsamples;
    int inside = 0, total = 0;
    const int sj = g.dim() >= 2 ? s : 1;
    const int sk = g.dim() >= 3 ? s : 1;
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < sj; ++j)
        for (int k = 0; k < sk; ++k) {
          double p[3] = {0, 0, 0};
          const int sub[3] = {i, j, k};
          const int cnt[3] = {s, sj, sk};
          double d2 = 0.0;
          for (int a = 0; a < g.dim(); ++a) {
            p[a] = lo[a] + (hi[a] - lo[a]) * (sub[a] + 0.5) / cnt[a];
            d2 += (p[a] - center[a]) * (p[a] - center[a]);
          }
          ++total;
          if (d2 <= r2) ++inside;
        }
    bw.fraction[id] = double(inside) / double(total);
  }
  return bw;
}

}  // namespace phaselab
