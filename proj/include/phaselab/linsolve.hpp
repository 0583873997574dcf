#pragma once

#include "phaselab/grid.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace phaselab {

// Homogeneous-Dirichlet action of (c0*I + c1*(-Lap) + diag(q)) on the grid.
// Dirichlet rows act as identity so the operator stays SPD-compatible on the
// full vector; Neumann mirrors and periodic wraps are folded into the stencil.
class GridOperator {
 public:
  GridOperator(const GridSpec& g, const BoundaryCondition& bc, double c0, double c1,
               const Eigen::ArrayXd* q = nullptr)
      : g_(g), bc_(bc), c0_(c0), c1_(c1), q_(q) {
    dirichlet_ = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(g.size(), false);
    for (std::int64_t id = 0; id < g.size(); ++id) {
      const auto ijk = g.unflatten(id);
      for (int a = 0; a < g.dim(); ++a) {
        if (g.periodic(a)) continue;
        if ((ijk[a] == 0 && bc.lo(a) == BcKind::Dirichlet) ||
            (ijk[a] == g.count(a) - 1 && bc.hi(a) == BcKind::Dirichlet))
          dirichlet_[id] = true;
      }
    }
  }

  const Eigen::Array<bool, Eigen::Dynamic, 1>& dirichlet_mask() const { return dirichlet_; }

  void apply(const Eigen::ArrayXd& x, Eigen::ArrayXd& y) const {
    const std::int64_t n = g_.size();
    y.resize(n);
    for (std::int64_t id = 0; id < n; ++id) {
      if (dirichlet_[id]) {
        y[id] = x[id];
        continue;
      }
      const auto ijk = g_.unflatten(id);
      double lap = 0.0;
      for (int a = 0; a < g_.dim(); ++a) {
        const double h2 = g_.spacing(a) * g_.spacing(a);
        const int na = g_.count(a);
        double up, dn;
        auto fetch = [&](int i) {
          auto q = ijk;
          q[a] = i;
          return x[g_.flatten(q[0], q[1], q[2])];
        };
        if (g_.periodic(a)) {
          up = fetch((ijk[a] + 1) % na);
          dn = fetch((ijk[a] - 1 + na) % na);
        } else if (ijk[a] == 0) {  // NeumannZero face (Dirichlet handled above)
          up = fetch(1);
          dn = fetch(1);
        } else if (ijk[a] == na - 1) {
          up = fetch(na - 2);
          dn = fetch(na - 2);
        } else {
          up = fetch(ijk[a] + 1);
          dn = fetch(ijk[a] - 1);
        }
        lap += (up - 2.0 * x[id] + dn) / h2;
      }
      y[id] = c0_ * x[id] - c1_ * lap + (q_ ? (*q_)[id] * x[id] : 0.0);
    }
  }

  Eigen::ArrayXd diagonal() const {
    Eigen::ArrayXd d(g_.size());
    for (std::int64_t id = 0; id < g_.size(); ++id) {
      if (dirichlet_[id]) {
        d[id] = 1.0;
        continue;
      }
      double lapd = 0.0;
      for (int a = 0; a < g_.dim(); ++a)
        lapd += 2.0 / (g_.spacing(a) * g_.spacing(a));
      d[id] = c0_ + c1_ * lapd + (q_ ? (*q_)[id] : 0.0);
    }
    return d;
  }

 private:
  const GridSpec& g_;
  const BoundaryCondition& bc_;
  double c0_, c1_;
  const Eigen::ArrayXd* q_;
  Eigen::Array<bool, Eigen::Dynamic, 1> dirichlet_;
};

struct IterativeResult {
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  bool indefinite = false;  // CG met a non-positive curvature direction
};

// Jacobi-preconditioned conjugate gradients, matrix-free.
template <typename Op>
IterativeResult cg_solve(const Op& A, const Eigen::ArrayXd& b, Eigen::ArrayXd& x,
                         const Eigen::ArrayXd& diag, double tol, int maxit) {
  IterativeResult res;
  const double bnorm = std::sqrt((b * b).sum());
  if (bnorm == 0.0) {
    x.setZero();
    res.converged = true;
    return res;
  }
  Eigen::ArrayXd r(b.size()), z(b.size()), p(b.size()), Ap(b.size());
  A.apply(x, Ap);
  r = b - Ap;
  z = r / diag;
  p = z;
  double rz = (r * z).sum();
  for (int it = 0; it < maxit; ++it) {
    A.apply(p, Ap);
    const double pAp = (p * Ap).sum();
    if (!(pAp > 0.0)) {
      res.indefinite = true;
      res.iterations = it;
      res.residual = std::sqrt((r * r).sum()) / bnorm;
      return res;
    }
    const double alpha = rz / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    const double rn = std::sqrt((r * r).sum());
    res.iterations = it + 1;
    res.residual = rn / bnorm;
    if (res.residual <= tol) {
      res.converged = true;
      return res;
    }
    z = r / diag;
    const double rz_new = (r * z).sum();
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  return res;
}

// MINRES for symmetric (possibly indefinite) systems; used when Newton's
// linearisation is not positive definite near unstable critical points.
template <typename Op>
IterativeResult minres_solve(const Op& A, const Eigen::ArrayXd& b, Eigen::ArrayXd& x,
                             double tol, int maxit) {
  IterativeResult res;
  const std::int64_t n = b.size();
  Eigen::ArrayXd r(n), Ax(n);
  A.apply(x, Ax);
  r = b - Ax;
  double beta = std::sqrt((r * r).sum());
  const double bnorm = std::sqrt((b * b).sum());
  if (bnorm == 0.0) {
    x.setZero();
    res.converged = true;
    return res;
  }
  if (beta / bnorm <= tol) {
    res.converged = true;
    res.residual = beta / bnorm;
    return res;
  }
  Eigen::ArrayXd v_old = Eigen::ArrayXd::Zero(n), v = r / beta;
  Eigen::ArrayXd w = Eigen::ArrayXd::Zero(n), w_old = Eigen::ArrayXd::Zero(n);
  double eta = beta;
  double c_old = 1.0, c = 1.0, s_old = 0.0, s = 0.0;
  Eigen::ArrayXd Av(n);
  double beta_old = beta;
  for (int it = 0; it < maxit; ++it) {
    A.apply(v, Av);
    const double alpha = (v * Av).sum();
    Av -= alpha * v + beta_old * v_old;
    const double beta_new = std::sqrt((Av * Av).sum());
    // Givens updates
    const double rho1 = c * alpha - c_old * s * beta_old;
    const double rho2 = s * alpha + c_old * c * beta_old;
    const double rho3 = s_old * beta_old;
    const double rho1h = std::sqrt(rho1 * rho1 + beta_new * beta_new);
    const double c_new = rho1h > 0 ? rho1 / rho1h : 1.0;
    const double s_new = rho1h > 0 ? beta_new / rho1h : 0.0;
    Eigen::ArrayXd w_new = (v - rho3 * w_old - rho2 * w) / (rho1h > 0 ? rho1h : 1.0);
    x += c_new * eta * w_new;
    eta = -s_new * eta;
    res.iterations = it + 1;
    res.residual = std::abs(eta) / bnorm;
    if (res.residual <= tol) {
      res.converged = true;
      return res;
    }
    w_old = w;
    w = w_new;
    v_old = v;
    if (beta_new == 0.0) break;
    v = Av / beta_new;
    beta_old = beta_new;
    c_old = c;
    c = c_new;
    s_old = s;
    s = s_new;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Sparse assembly of L = -eps*Lap + diag(q) on a degree-of-freedom subset
// (homogeneous Dirichlet outside), plus a shift-invert Lanczos eigensolver.
// ---------------------------------------------------------------------------

struct DofMap {
  std::vector<std::int64_t> dof_to_node;
  std::vector<std::int64_t> node_to_dof;  // -1 when not a DOF
};

inline DofMap make_dof_map(const GridSpec& g,
                           const Eigen::Array<bool, Eigen::Dynamic, 1>& keep) {
  DofMap m;
  m.node_to_dof.assign(g.size(), -1);
  for (std::int64_t id = 0; id < g.size(); ++id) {
    if (keep[id]) {
      m.node_to_dof[id] = std::int64_t(m.dof_to_node.size());
      m.dof_to_node.push_back(id);
    }
  }
  return m;
}

inline Eigen::SparseMatrix<double> assemble_operator(
    const GridSpec& g, const BoundaryCondition& bc, double eps,
    const Eigen::ArrayXd& q, const DofMap& dofs) {
  const std::int64_t n = std::int64_t(dofs.dof_to_node.size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(std::size_t(n) * (2 * g.dim() + 1));
  for (std::int64_t d = 0; d < n; ++d) {
    const std::int64_t id = dofs.dof_to_node[d];
    const auto ijk = g.unflatten(id);
    double diag = q[id];
    for (int a = 0; a < g.dim(); ++a) {
      const double w = eps / (g.spacing(a) * g.spacing(a));
      const int na = g.count(a);
      for (int step : {-1, +1}) {
        int i = ijk[a] + step;
        double coeff = -w;
        if (i < 0 || i >= na) {
          if (g.periodic(a)) {
            i = (i + na) % na;
          } else if ((step < 0 ? bc.lo(a) : bc.hi(a)) == BcKind::NeumannZero) {
            i = ijk[a] - step;  // mirror ghost
          } else {
            diag += w;  // homogeneous Dirichlet ghost: just the diagonal part
            continue;
          }
        }
        diag += w;
        auto nb = ijk;
        nb[a] = i;
        const std::int64_t nid = g.flatten(nb[0], nb[1], nb[2]);
        const std::int64_t nd = dofs.node_to_dof[nid];
        if (nd >= 0)
          trip.emplace_back(int(d), int(nd), coeff);
        // neighbours outside the DOF set are held at zero
      }
    }
    trip.emplace_back(int(d), int(d), diag);
  }
  Eigen::SparseMatrix<double> A(static_cast<int>(n), static_cast<int>(n));
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

struct EigenPairs {
  Eigen::VectorXd values;                // ascending
  std::vector<Eigen::VectorXd> vectors;  // in DOF numbering
  bool converged = false;
};

// Lowest-k eigenpairs of a symmetric sparse matrix by shift-invert Lanczos
// with full reorthogonalisation. `sigma` must sit strictly below the spectrum
// so that A - sigma*I admits a Cholesky factorisation.
inline EigenPairs lanczos_lowest(const Eigen::SparseMatrix<double>& A, int k, double sigma,
                                 int max_steps = 400, double tol = 1e-12,
                                 std::uint64_t seed = 12345) {
  const int n = int(A.rows());
  k = std::min(k, n);
  Eigen::SparseMatrix<double> As = A;
  for (int i = 0; i < n; ++i) As.coeffRef(i, i) -= sigma;
  As.makeCompressed();
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
  llt.compute(As);
  if (llt.info() != Eigen::Success)
    throw NumericsError("eigensolver: shifted operator not positive definite");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  EigenPairs best;

  auto extract = [&](const std::vector<Eigen::VectorXd>& V, const std::vector<double>& alpha,
                     const std::vector<double>& beta, double b_last, bool& all_ok) {
    const int m = int(alpha.size());
    Eigen::VectorXd ad = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
    Eigen::VectorXd bd(std::max(m - 1, 0));
    for (int i = 0; i + 1 < m; ++i) bd[i] = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(ad, bd, Eigen::ComputeEigenvectors);
    const int kk = std::min(k, m);
    all_ok = m >= k;
    for (int j = 0; j < kk && all_ok; ++j) {
      const int col = m - 1 - j;  // largest Ritz values of the inverse
      const double resid = b_last * std::abs(es.eigenvectors()(m - 1, col));
      if (resid > tol * std::max(1.0, std::abs(es.eigenvalues()[col]))) all_ok = false;
    }
    EigenPairs out;
    out.values.resize(kk);
    for (int j = 0; j < kk; ++j) {
      // j-th largest Ritz value of the inverse is the j-th lowest of A.
      const int col = m - 1 - j;
      out.values[j] = sigma + 1.0 / es.eigenvalues()[col];
      Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
      for (int i = 0; i < m; ++i) y += es.eigenvectors()(i, col) * V[i];
      y.normalize();
      out.vectors.push_back(y);
    }
    return out;
  };

  const int restarts = 3;
  for (int attempt = 0; attempt < restarts; ++attempt) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = gauss(rng);
    v.normalize();
    std::vector<Eigen::VectorXd> V{v};
    std::vector<double> alpha, beta;
    const int m_max = std::min(max_steps, n);
    for (int m = 0; m < m_max; ++m) {
      Eigen::VectorXd w = llt.solve(V[m]);
      const double a = V[m].dot(w);
      alpha.push_back(a);
      w -= a * V[m];
      if (m > 0) w -= beta[m - 1] * V[m - 1];
      for (int rep = 0; rep < 2; ++rep)  // full reorthogonalisation
        for (const auto& q : V) w -= q.dot(w) * q;
      const double b = w.norm();
      const bool exhausted = b < 1e-13 || m == m_max - 1;
      if ((int(alpha.size()) >= k + 2 && m % 5 == 4) || exhausted) {
        bool all_ok = false;
        EigenPairs out = extract(V, alpha, beta, b, all_ok);
        out.converged = all_ok || (b < 1e-13 && int(alpha.size()) >= k);
        if (out.converged) return out;
        if (exhausted) best = out;
      }
      if (b < 1e-13) break;
      beta.push_back(b);
      V.push_back(w / b);
    }
  }
  if (best.values.size() == 0)
    throw NumericsError("eigensolver: non-convergence after restarts");
  return best;  // best effort; caller sees converged == false
}

// Dense spectrum of a symmetric tridiagonal operator (1D oracle path).
inline Eigen::VectorXd tridiagonal_eigenvalues(const Eigen::VectorXd& diag,
                                               const Eigen::VectorXd& sub) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace phaselab
