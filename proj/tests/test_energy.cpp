#include "phaselab/energy.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace phaselab;
using namespace phaselab::testing;

namespace {

ScalarField kink_1d(double L, int n, double eps = 1.0) {
  auto bc = BoundaryCondition::dirichlet();
  auto g = GridSpec::make(1, {n, 1, 1}, {2.0 * L, 1, 1}, bc, {-L, 0, 0});
  ScalarField f = ScalarField::make(g, bc, eps);
  f.sample([eps](const Eigen::Vector3d& p) { return std::tanh(p[0] / (kSqrt2 * eps)); });
  return f;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

}  // namespace

TEST_CASE("pure phases carry zero energy") {
  auto bc = BoundaryCondition::dirichlet();
  auto g = GridSpec::make(2, {51, 51, 1}, {4.0, 4.0, 1.0}, bc, {-2, -2, 0});
  ScalarField f = ScalarField::make(g, bc, 1.0, 1.0);
  CHECK(energy(f) == doctest::Approx(0.0));
}

TEST_CASE("a single kink has unit energy per cross-section") {
  ScalarField f = kink_1d(20.0, 2001);
  CHECK(energy(f) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("constant zero on the unit disc") {
  auto bc = BoundaryCondition::dirichlet();
  auto g = GridSpec::make(2, {151, 151, 1}, {3.0, 3.0, 1.0}, bc, {-1.5, -1.5, 0});
  ScalarField f = ScalarField::make(g, bc, 1.0, 0.0);
  const double ref = 3.0 * M_PI / (16.0 * kSqrt2);  // (pi/4) / (2 * 2 sqrt2/3)
  CHECK(energy(f, Eigen::Vector3d(0, 0, 0), 1.0) == doctest::Approx(ref).epsilon(0.01));
}

TEST_CASE("density profile of a flat layer plateaus at one") {
  ScalarField f = tilted_kink_2d(20.0, 0.1, 0.0);
  auto p = density_profile(f, {0, 0, 0}, linspace(5.0, 15.0, 21));
  for (double v : p.values) REQUIRE(v == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("pure phases give the zero profile; two layers give two") {
  auto bc = BoundaryCondition::dirichlet();
  auto g = GridSpec::make(2, {101, 101, 1}, {20.0, 20.0, 1.0}, bc, {-10, -10, 0});
  ScalarField pm = ScalarField::make(g, bc, 1.0, -1.0);
  auto p0 = density_profile(pm, {0, 0, 0}, linspace(1.0, 8.0, 8));
  for (double v : p0.values) REQUIRE(std::abs(v) < 1e-12);

  ScalarField two = multilayer_2d(20.0, 0.1, {-2.0, 2.0});
  auto p2 = density_profile(two, {0, 0, 0}, linspace(14.0, 19.0, 6));
  for (double v : p2.values) REQUIRE(v == doctest::Approx(2.0).epsilon(0.03));
}

TEST_CASE("monotonicity: clean on the kink, violated by noise, trivial on constants") {
  ScalarField f = tilted_kink_2d(20.0, 0.1, 0.0);
  auto prof = density_profile(f, {0, 0, 0}, linspace(1.0, 12.0, 23));
  auto rep = check_monotone(prof);
  CHECK(rep.clean());

  // Negative control: a localised noise blob. Its ball energy saturates, so
  // M_r ~ 1/r decreases — no solution behaves like this.
  ScalarField noise = f;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-0.9, 0.9);
  for (std::int64_t id = 0; id < noise.grid.size(); ++id) {
    const double r2 = noise.grid.point(id).head<2>().squaredNorm();
    noise.values[id] = dist(rng) * std::exp(-r2 / 8.0);
  }
  auto nprof = density_profile(noise, {0, 0, 0}, linspace(1.0, 12.0, 23));
  auto nrep = check_monotone(nprof);
  CHECK(!nrep.violations.empty());

  ScalarField c = ScalarField::make(f.grid, f.bc, 1.0, 1.0);
  auto cprof = density_profile(c, {0, 0, 0}, linspace(1.0, 12.0, 23));
  CHECK(check_monotone(cprof).clean());
}

TEST_CASE("pointwise gradient bound: equality case, slack case, discrete case") {
  // Equality case checked with the analytic gradient (no discretisation).
  ScalarField f = kink_1d(20.0, 2001);
  Eigen::ArrayXd gsq(f.grid.size());
  for (int i = 0; i < f.grid.count(0); ++i) {
    const double gp = kink_eval(f.grid.coord(0, i)).slope;
    gsq[i] = gp * gp;
  }
  auto eq = modica_defect(f, &gsq);
  CHECK(std::abs(eq.max_defect) <= 1e-10);

  // Strict slack for the zero state.
  ScalarField z = ScalarField::make(f.grid, f.bc, 1.0, 0.0);
  auto slack = modica_defect(z);
  CHECK(slack.max_defect == doctest::Approx(-0.25));

  // Discrete bound on a converged 2D saddle away from the boundary collar.
  ScalarField saddle = box_saddle(12.0, 0.1);
  auto disc = modica_defect(saddle);
  CHECK(disc.max_defect <= 1e-3);
}

TEST_CASE("density threshold classification") {
  ScalarField f = tilted_kink_2d(20.0, 0.1, 0.0);
  auto p1 = density_profile(f, {0, 0, 0}, linspace(13.0, 15.0, 3));
  auto r1 = allard_classify(p1, 0.1);
  CHECK(r1.verdict == DensityClass::TrivialOr1D);
  CHECK(r1.plateau == doctest::Approx(1.0).epsilon(0.02));

  ScalarField two = multilayer_2d(20.0, 0.1, {-2.0, 2.0});
  auto p2 = density_profile(two, {0, 0, 0}, linspace(16.0, 19.0, 4));
  CHECK(allard_classify(p2, 0.1).verdict == DensityClass::AboveThreshold);

  ScalarField ones = ScalarField::make(f.grid, f.bc, 1.0, 1.0);
  auto p3 = density_profile(ones, {0, 0, 0}, linspace(13.0, 15.0, 3));
  auto r3 = allard_classify(p3, 0.1);
  CHECK(r3.verdict == DensityClass::TrivialOr1D);
  CHECK(r3.plateau == doctest::Approx(0.0));

  // Non-plateaued profile: a growing ramp must be rejected.
  DensityProfile ramp;
  ramp.radii = {1, 2, 3, 4};
  ramp.values = {1.0, 1.5, 2.0, 2.5};
  CHECK_THROWS_AS(allard_classify(ramp, 0.1), NumericsError);
}

TEST_CASE("exponential decay fit recovers the 2 sqrt(2) rate") {
  ScalarField f = kink_1d(20.0, 4001);
  auto fit = decay_fit(f, 0, 0.0);
  CHECK(fit.rate >= 2.7);
  CHECK(fit.rate <= 2.9);

  ScalarField fh = kink_1d(20.0, 4001, 0.5);
  auto fit2 = decay_fit(fh, 0, 0.0);
  CHECK(fit2.rate / fit.rate == doctest::Approx(2.0).epsilon(0.05));

  ScalarField c = ScalarField::make(f.grid, f.bc, 1.0, 1.0);
  CHECK_THROWS_AS(decay_fit(c, 0, 0.0), ConfigError);
}

TEST_CASE("rescaling consistency M^eps_r = M_{r/eps}") {
  for (double eps : {1.0, 0.5, 0.25}) {
    ScalarField feps = kink_1d(20.0, 4001, eps);
    ScalarField unit = kink_1d(20.0 / eps, 4001, 1.0);
    for (double r : {2.0, 5.0, 10.0}) {
      const double meps = energy(feps, Eigen::Vector3d(0, 0, 0), r);
      const double munit = energy(unit, Eigen::Vector3d(0, 0, 0), r / eps);
      REQUIRE(meps == doctest::Approx(munit).epsilon(0.01));
    }
  }
}

TEST_CASE("layer density is orientation independent") {
  for (double deg : {0.0, 30.0, 45.0}) {
    ScalarField f = tilted_kink_2d(16.0, 0.1, deg * M_PI / 180.0);
    const double m = energy(f, Eigen::Vector3d(0, 0, 0), 10.0) / 10.0;
    REQUIRE(m == doctest::Approx(1.0).epsilon(0.02));
  }
}

TEST_CASE("well separated layers add") {
  // A wide box keeps the off-centre chord factor sqrt(1 - a^2/r^2) above 99%.
  const std::vector<std::vector<double>> families = {
      {0.0}, {-2.5, 2.5}, {-5.0, 0.0, 5.0}};
  for (std::size_t j = 0; j < families.size(); ++j) {
    ScalarField f = multilayer_2d(40.0, 0.2, families[j]);
    auto p = density_profile(f, {0, 0, 0}, linspace(35.0, 39.0, 3));
    const double plateau = (p.values[0] + p.values[1] + p.values[2]) / 3.0;
    REQUIRE(plateau == doctest::Approx(double(j + 1)).epsilon(0.03));
  }
}
