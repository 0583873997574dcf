#pragma once

#include "phaselab/grid.hpp"
#include "phaselab/linsolve.hpp"
#include "phaselab/potential.hpp"
#include "phaselab/stencil.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace phaselab {

struct SolveConfig {
  int max_iterations = 2000;
  double residual_tol = 1e-8;     // sup-norm of eps*Lap(u) - W'(u)/eps
  double dt = 0.0;                // 0 = auto per stepping mode
  double newton_switch_tol = 1e-3;
  double damping = 1.0;           // in (0, 1]
  bool explicit_stepping = false; // default: diffusion-implicit splitting

  double auto_dt(const ScalarField& f) const {
    if (dt > 0.0) return dt;
    if (explicit_stepping) {
      double h2min = 1e300;
      for (int a = 0; a < f.grid.dim(); ++a)
        h2min = std::min(h2min, f.grid.spacing(a) * f.grid.spacing(a));
      return 0.2 * h2min / (2.0 * f.grid.dim() * f.epsilon);
    }
    // Implicit diffusion leaves only the explicit W' term: dt ~ eps / max W''.
    return 0.25 * f.epsilon;
  }
};

struct SolveHistoryEntry {
  int iteration;
  double residual;
  double energy;
};

struct SolveReport {
  int iterations = 0;
  double final_residual = 0.0;
  bool converged = false;
  std::vector<SolveHistoryEntry> history;
  std::string note;
};

// eps*Lap(u) - W'(u)/eps on interior nodes; zero at Dirichlet nodes.
inline Eigen::ArrayXd residual_values(const ScalarField& f) {
  ScalarField lap = laplacian(f);
  Eigen::ArrayXd res = f.epsilon * lap.values - well_slope(f.values) / f.epsilon;
  const GridOperator mask_op(f.grid, f.bc, 0.0, 0.0, nullptr);
  const auto& mask = mask_op.dirichlet_mask();
  for (std::int64_t id = 0; id < f.grid.size(); ++id)
    if (mask[id]) res[id] = 0.0;
  return res;
}

inline double sup_residual(const ScalarField& f) {
  return residual_values(f).abs().maxCoeff();
}

// Unnormalised energy integrand eps|grad u|^2/2 + W(u)/eps (normalisation by
// sigma_{n-1} lives in the energy module; gradient flow only needs decrease).
inline double raw_energy(const ScalarField& f) {
  ScalarField gsq = gradient_sq(f);
  Eigen::ArrayXd e = 0.5 * f.epsilon * gsq.values + well(f.values) / f.epsilon;
  return integrate(f.grid, e);
}

// L^2 gradient flow of the energy with diffusion treated implicitly and W'
// explicitly (damped). Steps that would raise the energy are rejected and the
// time step halved; accepted steps keep the energy non-increasing.
inline std::pair<ScalarField, SolveReport> relax(const ScalarField& initial,
                                                 const SolveConfig& cfg = {}) {
  ScalarField u = initial;
  SolveReport rep;
  double dt = cfg.auto_dt(u);
  double res = sup_residual(u);
  double energy = raw_energy(u);
  double res_min = res;
  rep.history.push_back({0, res, energy});
  if (res <= cfg.newton_switch_tol) {
    rep.converged = true;
    rep.final_residual = res;
    return {u, rep};
  }

  const GridOperator identity_mask(u.grid, u.bc, 0.0, 0.0, nullptr);
  const auto& dirichlet = identity_mask.dirichlet_mask();
  Eigen::ArrayXd rhs(u.grid.size()), unew(u.grid.size());

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    const GridOperator A(u.grid, u.bc, 1.0, dt * u.epsilon, nullptr);
    const Eigen::ArrayXd diag = A.diagonal();
    if (cfg.explicit_stepping) {
      ScalarField lap = laplacian(u);
      unew = u.values +
             dt * (u.epsilon * lap.values - cfg.damping * well_slope(u.values) / u.epsilon);
      for (std::int64_t id = 0; id < u.grid.size(); ++id)
        if (dirichlet[id]) unew[id] = u.values[id];
    } else {
      rhs = u.values - (dt * cfg.damping / u.epsilon) * well_slope(u.values);
      for (std::int64_t id = 0; id < u.grid.size(); ++id)
        if (dirichlet[id]) rhs[id] = u.values[id];
      unew = u.values;
      cg_solve(A, rhs, unew, diag, 1e-12, 4000);
    }

    ScalarField cand = u;
    cand.values.swap(unew);
    const double e_new = raw_energy(cand);
    if (!cfg.explicit_stepping &&
        e_new > energy + 1e-12 * std::max(1.0, std::abs(energy))) {
      dt *= 0.5;  // reject: splitting too aggressive at this dt
      if (dt < 1e-14)
        throw NumericsError("relax: time step collapsed without energy decrease");
      continue;
    }
    u.values.swap(cand.values);
    energy = e_new;
    res = sup_residual(u);
    rep.iterations = it;
    rep.history.push_back({it, res, energy});
    if (res <= cfg.newton_switch_tol) {
      rep.converged = true;
      break;
    }
    res_min = std::min(res_min, res);
    if (!std::isfinite(res) || res > 10.0 * res_min)
      throw NumericsError("relax: residual grew 10x from its minimum (bad dt)");
  }
  rep.final_residual = res;
  if (!rep.converged) rep.note = "max_iterations exhausted";
  return {u, rep};
}

inline std::string fmt_residual(double r) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", r);
  return buf;
}

// Newton polish of a near-critical field. Linear solves use conjugate
// gradients on -eps*Lap + W''(u)/eps; an indefinite linearisation (expected
// near unstable critical points) falls back to a minimal-residual iteration.
inline std::pair<ScalarField, SolveReport> newton_refine(const ScalarField& field,
                                                         const SolveConfig& cfg = {}) {
  ScalarField u = field;
  SolveReport rep;
  double res = sup_residual(u);
  if (res > cfg.newton_switch_tol)
    throw ConfigError("newton_refine: residual above newton_switch_tol; relax first");
  rep.history.push_back({0, res, raw_energy(u)});
  const GridOperator mask_op(u.grid, u.bc, 0.0, 0.0, nullptr);
  const auto& dirichlet = mask_op.dirichlet_mask();

  const int max_newton = std::min(cfg.max_iterations, 50);
  for (int it = 1; it <= max_newton && res > cfg.residual_tol; ++it) {
    Eigen::ArrayXd q = well_curvature(u.values) / u.epsilon;
    for (std::int64_t id = 0; id < u.grid.size(); ++id)
      if (dirichlet[id]) q[id] = 0.0;
    const GridOperator L(u.grid, u.bc, 0.0, u.epsilon, &q);
    Eigen::ArrayXd rhs = residual_values(u);  // solve L delta = residual
    Eigen::ArrayXd delta = Eigen::ArrayXd::Zero(u.grid.size());
    Eigen::ArrayXd diag = L.diagonal().abs().max(1e-8);
    IterativeResult lin = cg_solve(L, rhs, delta, diag, 1e-10, 4000);
    if (lin.indefinite) {
      delta.setZero();
      lin = minres_solve(L, rhs, delta, 1e-10, 6000);
      rep.note = "indefinite linearisation: minimal-residual fallback";
    }
    double step = cfg.damping;
    ScalarField cand = u;
    double res_new = res;
    for (int bt = 0; bt < 8; ++bt) {
      cand.values = u.values + step * delta;
      res_new = sup_residual(cand);
      if (res_new < res) break;
      step *= 0.5;
    }
    if (res_new >= res) {
      rep.note += (rep.note.empty() ? "" : "; ");
      rep.note += "stagnation at residual " + fmt_residual(res);
      break;
    }
    u.values.swap(cand.values);
    res = res_new;
    rep.iterations = it;
    rep.history.push_back({it, res, raw_energy(u)});
  }
  rep.final_residual = res;
  rep.converged = res <= cfg.residual_tol;
  return {u, rep};
}

// ---------------------------------------------------------------------------
// Radial collocation solves: u'' + ((n-1)/r) u' = f(u, r).
// ---------------------------------------------------------------------------

struct RadialEquation {
  // rhs f(u, r) and its u-derivative.
  std::function<double(double, double)> f;
  std::function<double(double, double)> df_du;

  static RadialEquation allen_cahn(double eps) {
    return {[eps](double u, double) { return well_slope(u) / (eps * eps); },
            [eps](double u, double) { return well_curvature(u) / (eps * eps); }};
  }
  static RadialEquation liouville(double lambda = 1.0) {
    return {[lambda](double u, double) { return lambda * std::exp(-u); },
            [lambda](double u, double) { return -lambda * std::exp(-u); }};
  }
  static RadialEquation source(std::function<double(double)> s) {
    return {[s](double, double r) { return s(r); },
            [](double, double) { return 0.0; }};
  }
};

struct RadialBc {
  enum class Kind { Value, Derivative, LogSlope } kind = Kind::Value;
  double value = 0.0;
  static RadialBc value_at(double v) { return {Kind::Value, v}; }
  static RadialBc derivative(double v) { return {Kind::Derivative, v}; }
  static RadialBc log_slope(double c) { return {Kind::LogSlope, c}; }
};

// Damped-Newton collocation on the given radial grid. r = 0 uses the
// regularity condition u'(0) = 0 (the Laplacian limit n * u''(0)).
inline std::pair<RadialField, SolveReport> solve_radial(const RadialField& profile,
                                                        const RadialEquation& eq,
                                                        const RadialBc& inner,
                                                        const RadialBc& outer,
                                                        const SolveConfig& cfg = {}) {
  RadialField u = profile;
  const int n = int(u.r.size());
  if (n < 5) throw ConfigError("solve_radial: need at least 5 nodes");
  const int dim = u.dim;
  SolveReport rep;

  auto assemble = [&](const Eigen::ArrayXd& v, Eigen::VectorXd& F,
                      Eigen::SparseMatrix<double>& J) {
    std::vector<Eigen::Triplet<double>> trip;
    F.resize(n);
    for (int i = 0; i < n; ++i) {
      if (i == 0) {
        switch (inner.kind) {
          case RadialBc::Kind::Value:
            F[0] = v[0] - inner.value;
            trip.emplace_back(0, 0, 1.0);
            break;
          case RadialBc::Kind::Derivative: {
            const double h = u.r[1] - u.r[0];
            F[0] = (v[1] - v[0]) / h - inner.value;
            trip.emplace_back(0, 0, -1.0 / h);
            trip.emplace_back(0, 1, 1.0 / h);
            break;
          }
          case RadialBc::Kind::LogSlope: {
            const double h = u.r[1] - u.r[0];
            F[0] = u.r[0] * (v[1] - v[0]) / h - inner.value;
            trip.emplace_back(0, 0, -u.r[0] / h);
            trip.emplace_back(0, 1, u.r[0] / h);
            break;
          }
        }
        continue;
      }
      if (i == n - 1) {
        switch (outer.kind) {
          case RadialBc::Kind::Value:
            F[i] = v[i] - outer.value;
            trip.emplace_back(i, i, 1.0);
            break;
          case RadialBc::Kind::Derivative: {
            const double h = u.r[i] - u.r[i - 1];
            F[i] = (v[i] - v[i - 1]) / h - outer.value;
            trip.emplace_back(i, i, 1.0 / h);
            trip.emplace_back(i, i - 1, -1.0 / h);
            break;
          }
          case RadialBc::Kind::LogSlope: {
            const double h = u.r[i] - u.r[i - 1];
            F[i] = u.r[i] * (v[i] - v[i - 1]) / h - outer.value;
            trip.emplace_back(i, i, u.r[i] / h);
            trip.emplace_back(i, i - 1, -u.r[i] / h);
            break;
          }
        }
        continue;
      }
      const double hm = u.r[i] - u.r[i - 1];
      const double hp = u.r[i + 1] - u.r[i];
      const double wmm = 2.0 / (hm * (hm + hp));
      const double wpp = 2.0 / (hp * (hm + hp));
      const double wcc = -(wmm + wpp);
      // centered first derivative on a nonuniform 3-point stencil
      const double dm = -hp / (hm * (hm + hp));
      const double dp = hm / (hp * (hm + hp));
      const double dc = -(dm + dp);
      double lap_m, lap_c, lap_p;
      if (u.r[i] == 0.0) {
        lap_m = dim * wmm;
        lap_c = dim * wcc;
        lap_p = dim * wpp;
      } else {
        const double fr = (dim - 1) / u.r[i];
        lap_m = wmm + fr * dm;
        lap_c = wcc + fr * dc;
        lap_p = wpp + fr * dp;
      }
      F[i] = lap_m * v[i - 1] + lap_c * v[i] + lap_p * v[i + 1] - eq.f(v[i], u.r[i]);
      trip.emplace_back(i, i - 1, lap_m);
      trip.emplace_back(i, i, lap_c - eq.df_du(v[i], u.r[i]));
      trip.emplace_back(i, i + 1, lap_p);
    }
    J.resize(n, n);
    J.setFromTriplets(trip.begin(), trip.end());
  };

  Eigen::VectorXd F;
  Eigen::SparseMatrix<double> J;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  double res = 0.0;
  int restarts = 0;
  double damping = cfg.damping;
  for (int it = 0; it < std::max(cfg.max_iterations, 50); ++it) {
    assemble(u.values, F, J);
    res = F.cwiseAbs().maxCoeff();
    rep.iterations = it;
    rep.history.push_back({it, res, 0.0});
    if (res <= cfg.residual_tol) {
      rep.converged = true;
      break;
    }
    lu.compute(J);
    if (lu.info() != Eigen::Success)
      throw NumericsError("solve_radial: singular collocation Jacobian");
    Eigen::VectorXd delta = lu.solve(-F);
    Eigen::ArrayXd cand = u.values + damping * delta.array();
    Eigen::VectorXd Fc;
    Eigen::SparseMatrix<double> Jc;
    assemble(cand, Fc, Jc);
    int bt = 0;
    double step = damping;
    while (Fc.cwiseAbs().maxCoeff() > res && bt < 12) {
      step *= 0.5;
      cand = u.values + step * delta.array();
      assemble(cand, Fc, Jc);
      ++bt;
    }
    if (Fc.cwiseAbs().maxCoeff() > res) {
      if (++restarts > 3)
        throw NumericsError("solve_radial: non-convergence after damped restarts");
      damping *= 0.5;
      continue;
    }
    u.values = cand;
  }
  rep.final_residual = res;
  if (!rep.converged && res > cfg.residual_tol)
    throw NumericsError("solve_radial: non-convergence after damped restarts");
  return {u, rep};
}

}  // namespace phaselab
