#include "phaselab/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace phaselab;

namespace {

ScalarField kink_problem(double L, int n, double eps = 1.0) {
  auto bc = BoundaryCondition::dirichlet();
  auto g = GridSpec::make(1, {n, 1, 1}, {2.0 * L, 1, 1}, bc, {-L, 0, 0});
  ScalarField f = ScalarField::make(g, bc, eps);
  f.at(0) = -std::tanh(L / (kSqrt2 * eps));
  f.at(n - 1) = std::tanh(L / (kSqrt2 * eps));
  return f;
}

void fill_sign(ScalarField& f) {
  const int n = f.grid.count(0);
  for (int i = 0; i < n; ++i) {
    const double x = f.grid.coord(0, i);
    f.at(i) = x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0);
  }
  f.at(0) = -std::tanh(-f.grid.origin(0) / (kSqrt2 * f.epsilon));
  f.at(n - 1) = std::tanh(-f.grid.origin(0) / (kSqrt2 * f.epsilon));
}

// Independent boundary-value oracle: shoot u'' = W'(u) from u(0) = 0 with RK4
// and bisect the initial slope so that u(L) hits the Dirichlet datum.
std::vector<double> shooting_kink(double L, int n) {
  auto integrate_to = [&](double slope, double x_end, std::vector<double>* out) {
    double u = 0.0, v = slope;
    const double h = 1e-4;
    const int steps = int(x_end / h);
    if (out) out->push_back(u);
    double next_sample = out ? (x_end / (n / 2)) : 1e300;
    int written = 0;
    for (int s = 0; s < steps; ++s) {
      auto f1u = v, f1v = well_slope(u);
      auto f2u = v + 0.5 * h * f1v, f2v = well_slope(u + 0.5 * h * f1u);
      auto f3u = v + 0.5 * h * f2v, f3v = well_slope(u + 0.5 * h * f2u);
      auto f4u = v + h * f3v, f4v = well_slope(u + h * f3u);
      u += h / 6.0 * (f1u + 2 * f2u + 2 * f3u + f4u);
      v += h / 6.0 * (f1v + 2 * f2v + 2 * f3v + f4v);
      const double x = (s + 1) * h;
      if (out && x >= next_sample - 1e-12) {
        out->push_back(u);
        ++written;
        next_sample = (written + 1) * (x_end / (n / 2));
      }
    }
    return u;
  };
  const double target = std::tanh(L / kSqrt2);
  double lo = 0.5, hi = 0.9;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (integrate_to(mid, L, nullptr) < target ? lo : hi) = mid;
  }
  std::vector<double> right;
  integrate_to(0.5 * (lo + hi), L, &right);
  std::vector<double> full(n);
  const int half = n / 2;
  for (int i = 0; i <= half; ++i) {
    full[half + i] = right[std::size_t(i)];
    full[half - i] = -right[std::size_t(i)];
  }
  return full;
}

}  // namespace

TEST_CASE("relax keeps the analytic kink: small residual, tiny drift") {
  ScalarField f = kink_problem(20.0, 4001);
  f.sample([](const Eigen::Vector3d& p) { return kink_eval(p[0]).value; });
  const Eigen::ArrayXd before = f.values;

  SolveConfig cfg;
  cfg.newton_switch_tol = 1e-6;
  cfg.max_iterations = 50;
  auto [u, rep] = relax(f, cfg);
  CHECK(rep.converged);
  CHECK(rep.iterations <= 50);
  CHECK(rep.final_residual < 1e-6);
  CHECK((u.values - before).abs().maxCoeff() < 1e-5);
}

TEST_CASE("sign initial data converges to the kink (shooting oracle)") {
  ScalarField f = kink_problem(20.0, 4001);
  fill_sign(f);
  auto [relaxed, rep1] = relax(f, {});
  CHECK(rep1.converged);
  auto [u, rep2] = newton_refine(relaxed, {});
  CHECK(rep2.converged);
  CHECK(rep2.final_residual <= 1e-8);

  // The oracle itself reproduces tanh(x/sqrt(2)) where shooting is well
  // conditioned; the solver is then compared on the whole interval.
  const auto oracle = shooting_kink(20.0, 4001);
  for (int i = 0; i < 4001; ++i) {
    const double x = u.grid.coord(0, i);
    if (std::abs(x) <= 5.0)
      REQUIRE(std::abs(oracle[std::size_t(i)] - std::tanh(x / kSqrt2)) < 1e-9);
  }
  double sup_tanh = 0.0, sup_oracle = 0.0;
  for (int i = 0; i < 4001; ++i) {
    const double x = u.grid.coord(0, i);
    sup_tanh = std::max(sup_tanh, std::abs(u.values[i] - std::tanh(x / kSqrt2)));
    sup_oracle = std::max(sup_oracle, std::abs(u.values[i] - oracle[std::size_t(i)]));
  }
  CHECK(sup_tanh < 1e-3);
  CHECK(sup_oracle < 1e-3);
}

TEST_CASE("uniform phase is a fixed point") {
  auto bc = BoundaryCondition::neumann();
  auto g = GridSpec::make(1, {201, 1, 1}, {10.0, 1, 1}, bc, {-5, 0, 0});
  ScalarField f = ScalarField::make(g, bc, 1.0, 1.0);
  auto [u, rep] = relax(f, {});
  CHECK(rep.converged);
  CHECK(rep.iterations == 0);
  CHECK((u.values - 1.0).abs().maxCoeff() == 0.0);
}

TEST_CASE("energy is non-increasing along accepted relax steps") {
  ScalarField f = kink_problem(20.0, 1001);
  fill_sign(f);
  auto [u, rep] = relax(f, {});
  for (std::size_t i = 1; i < rep.history.size(); ++i)
    REQUIRE(rep.history[i].energy <=
            rep.history[i - 1].energy + 1e-12 * std::max(1.0, std::abs(rep.history[i - 1].energy)));
}

TEST_CASE("newton from the analytic kink reaches the discrete root in one step") {
  ScalarField f = kink_problem(20.0, 4001);
  f.sample([](const Eigen::Vector3d& p) { return kink_eval(p[0]).value; });
  SolveConfig cfg;
  cfg.residual_tol = 1e-10;
  auto [u, rep] = newton_refine(f, cfg);
  CHECK(rep.converged);
  CHECK(rep.iterations <= 1);
  CHECK(rep.final_residual <= 1e-10);
}

TEST_CASE("newton repairs a 1e-3 perturbation within five steps") {
  ScalarField f = kink_problem(20.0, 2001);
  f.sample([](const Eigen::Vector3d& p) {
    const double x = p[0];
    const double bump = std::abs(x) < 10.0 ? std::cos(M_PI * x / 20.0) : 0.0;
    return kink_eval(x).value + 1e-3 * bump;
  });
  const int n = f.grid.count(0);
  f.at(0) = -std::tanh(20.0 / kSqrt2);
  f.at(n - 1) = std::tanh(20.0 / kSqrt2);
  SolveConfig cfg;
  cfg.newton_switch_tol = 1e-2;  // the W'' coupling puts the residual near 2e-3
  auto [u, rep] = newton_refine(f, cfg);
  CHECK(rep.converged);
  CHECK(rep.iterations <= 5);
  CHECK(rep.final_residual <= 1e-8);
}

TEST_CASE("zero state with periodic bc is a (unstable) critical point") {
  auto bc = BoundaryCondition::periodic();
  auto g = GridSpec::make(1, {128, 1, 1}, {40.0, 1, 1}, bc, {-20, 0, 0});
  ScalarField f = ScalarField::make(g, bc, 1.0, 0.0);
  CHECK(sup_residual(f) == 0.0);
  auto [u, rep] = newton_refine(f, {});
  CHECK((u.values == 0.0).all());
}

TEST_CASE("discrete Modica bound holds away from the boundary collar") {
  ScalarField f = kink_problem(20.0, 2001);
  fill_sign(f);
  auto [relaxed, r1] = relax(f, {});
  auto [u, r2] = newton_refine(relaxed, {});
  auto gsq = gradient_sq(u);
  double worst = -1e300;
  for (int i = 0; i < u.grid.count(0); ++i) {
    const double x = u.grid.coord(0, i);
    if (20.0 - std::abs(x) < 5.0 * u.epsilon) continue;
    worst = std::max(worst, 0.5 * gsq.values[i] - well(u.values[i]));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("second-order convergence under grid refinement") {
  auto solve_with = [&](int n) {
    ScalarField f = kink_problem(20.0, n);
    fill_sign(f);
    auto [relaxed, r1] = relax(f, {});
    auto [u, r2] = newton_refine(relaxed, {});
    double sup = 0.0;
    for (int i = 0; i < n; ++i)
      sup = std::max(sup, std::abs(u.values[i] - std::tanh(u.grid.coord(0, i) / kSqrt2)));
    return sup;
  };
  const double e_coarse = solve_with(501);   // h = 0.08
  const double e_fine = solve_with(1001);    // h = 0.04
  const double factor = e_coarse / e_fine;
  CHECK(factor >= 3.5);
  CHECK(factor <= 4.5);
}

TEST_CASE("explicit stepping with an oversized dt is reported as divergence") {
  ScalarField f = kink_problem(5.0, 201);
  fill_sign(f);
  SolveConfig cfg;
  cfg.explicit_stepping = true;
  cfg.dt = 0.05;  // far above the h^2/(2n) bound for h = 0.05
  CHECK_THROWS_AS(relax(f, cfg), NumericsError);
}

TEST_CASE("radial solve reproduces the 2D Liouville family") {
  for (double mu : {1.0}) {
    RadialField grid = RadialField::logspaced(0.1, 100.0, 16385, 2);
    auto exact = [mu](double r) {
      return -std::log(8.0 * mu * mu / std::pow(1.0 + mu * mu * r * r, 2));
    };
    // The annulus Dirichlet problem is multi-valued (fold of the exponential
    // nonlinearity); seed Newton inside the basin of the classical branch by
    // perturbing the closed form, and require it to come back.
    const double va = exact(0.1), vb = exact(100.0);
    for (int i = 0; i < grid.r.size(); ++i)
      grid.values[i] = exact(grid.r[i]) + 0.5 * std::sin(std::log(grid.r[i]));
    grid.values[0] = va;
    grid.values[grid.r.size() - 1] = vb;
    SolveConfig cfg;
    cfg.residual_tol = 5e-6;  // the 1/h^2 rows put the roundoff floor near 8e-7
    auto [v, rep] = solve_radial(grid, RadialEquation::liouville(1.0),
                                 RadialBc::value_at(va), RadialBc::value_at(vb), cfg);
    CHECK(rep.converged);
    double sup = 0.0;
    for (int i = 0; i < v.r.size(); ++i)
      sup = std::max(sup, std::abs(v.values[i] - exact(v.r[i])));
    CHECK(sup < 1e-6);
  }
}

TEST_CASE("radial allen-cahn in dimension 1 is the kink") {
  // dimension 1: no 1/r term; by odd symmetry the half line with u(0) = 0
  // carries the full profile.
  RadialField grid = RadialField::uniform(0.0, 20.0, 2001, 1);
  for (int i = 0; i < grid.r.size(); ++i)
    grid.values[i] = grid.r[i] > 0 ? 1.0 : 0.0;
  const double end = std::tanh(20.0 / kSqrt2);
  auto [v, rep] = solve_radial(grid, RadialEquation::allen_cahn(1.0),
                               RadialBc::value_at(0.0), RadialBc::value_at(end), {});
  CHECK(rep.converged);
  double sup = 0.0;
  for (int i = 0; i < v.r.size(); ++i)
    sup = std::max(sup, std::abs(v.values[i] - std::tanh(v.r[i] / kSqrt2)));
  CHECK(sup < 1e-3);
}

TEST_CASE("zero source with zero boundary data gives the zero solution") {
  RadialField grid = RadialField::logspaced(1.0, 50.0, 257, 3);
  grid.values.setConstant(0.3);
  auto [v, rep] = solve_radial(grid, RadialEquation::source([](double) { return 0.0; }),
                               RadialBc::value_at(0.0), RadialBc::value_at(0.0), {});
  CHECK(rep.converged);
  CHECK(v.values.abs().maxCoeff() < 1e-10);
}
