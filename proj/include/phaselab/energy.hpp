#pragma once

#include "phaselab/grid.hpp"
#include "phaselab/io.hpp"
#include "phaselab/potential.hpp"
#include "phaselab/stencil.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace phaselab {

// Normalised energy: (1/sigma_{n-1}) * integral of eps|grad u|^2/2 + W(u)/eps
// over a ball (or the whole grid). A single flat layer costs 1 per unit
// (n-1)-area in this normalisation.
inline double energy(const ScalarField& f,
                     const std::optional<Eigen::Vector3d>& center = std::nullopt,
                     double radius = 0.0) {
  ScalarField gsq = gradient_sq(f);
  Eigen::ArrayXd density =
      0.5 * f.epsilon * gsq.values + well(f.values) / f.epsilon;
  const double sigma = layer_normalisation(f.grid.dim());
  if (!center) return integrate(f.grid, density) / sigma;
  BallWeights w = restrict_to_ball(f.grid, *center, radius);
  double s = 0.0;
  for (std::int64_t id = 0; id < f.grid.size(); ++id)
    s += density[id] * w.fraction[id] * f.grid.node_volume(f.grid.unflatten(id));
  return s / sigma;
}

// M_r = r^{1-n} * energy(B_r), sampled over a list of radii.
struct DensityProfile {
  Eigen::Vector3d center;
  std::vector<double> radii;
  std::vector<double> values;
  double epsilon = 1.0;
};

inline DensityProfile density_profile(const ScalarField& f, const Eigen::Vector3d& center,
                                      const std::vector<double>& radii) {
  DensityProfile p;
  p.center = center;
  p.epsilon = f.epsilon;
  ScalarField gsq = gradient_sq(f);
  Eigen::ArrayXd density =
      0.5 * f.epsilon * gsq.values + well(f.values) / f.epsilon;
  const double sigma = layer_normalisation(f.grid.dim());
  double prev = 0.0;
  for (double r : radii) {
    if (!(r > prev)) throw ConfigError("density_profile: radii must be strictly increasing");
    prev = r;
    BallWeights w = restrict_to_ball(f.grid, center, r);
    double s = 0.0;
    for (std::int64_t id = 0; id < f.grid.size(); ++id)
      s += density[id] * w.fraction[id] * f.grid.node_volume(f.grid.unflatten(id));
    p.radii.push_back(r);
    p.values.push_back(s / sigma * std::pow(r, 1.0 - f.grid.dim()));
  }
  return p;
}

// Adjacent-radius decreases classified against the quadrature slack: drops
// beyond the slack are true violations; smaller dips are reported separately.
struct MonotoneReport {
  struct Dip {
    double r_lo, r_hi, drop;
  };
  std::vector<Dip> violations;  // beyond slack
  std::vector<Dip> slack_dips;  // within quadrature slack
  double slack_tol = 0.0;
  bool clean() const { return violations.empty(); }
};

inline MonotoneReport check_monotone(const DensityProfile& p, double base_tol = 1e-6,
                                     double slack_fraction = 0.02) {
  MonotoneReport rep;
  for (std::size_t i = 0; i + 1 < p.values.size(); ++i) {
    const double drop = p.values[i] - p.values[i + 1];
    if (drop <= 0) continue;
    const double slack = base_tol + slack_fraction * std::abs(p.values[i]);
    rep.slack_tol = slack;
    if (drop > slack)
      rep.violations.push_back({p.radii[i], p.radii[i + 1], drop});
    else
      rep.slack_dips.push_back({p.radii[i], p.radii[i + 1], drop});
  }
  return rep;
}

// Pointwise gradient-bound defect eps^2 |grad u|^2 / 2 - W(u), maximised over
// the interior (a 5*eps collar is excluded: the bound is for entire solutions
// and fails near artificial boundaries). An analytic |grad u|^2 array can be
// supplied to test the equality case without discretisation error.
struct ModicaResult {
  double max_defect;
  std::int64_t argmax_node;
};

inline ModicaResult modica_defect(const ScalarField& f,
                                  const Eigen::ArrayXd* analytic_gradient_sq = nullptr,
                                  double collar_factor = 5.0) {
  Eigen::ArrayXd gsq =
      analytic_gradient_sq ? *analytic_gradient_sq : gradient_sq(f).values;
  Eigen::ArrayXd defect =
      0.5 * f.epsilon * f.epsilon * gsq - well(f.values);
  ModicaResult res{-1e300, -1};
  const double collar = collar_factor * f.epsilon;
  for (std::int64_t id = 0; id < f.grid.size(); ++id) {
    const auto ijk = f.grid.unflatten(id);
    bool inside = true;
    for (int a = 0; a < f.grid.dim(); ++a) {
      if (f.grid.periodic(a)) continue;
      const double x = f.grid.coord(a, ijk[a]);
      if (x - f.grid.origin(a) < collar ||
          f.grid.origin(a) + f.grid.length(a) - x < collar)
        inside = false;
    }
    if (!inside) continue;
    if (defect[id] > res.max_defect) {
      res.max_defect = defect[id];
      res.argmax_node = id;
    }
  }
  if (res.argmax_node < 0)
    throw ConfigError("modica_defect: no interior nodes outside the boundary collar");
  return res;
}

// Plateau estimate of M_infinity and the threshold test: a plateau at most
// 1 + delta is the trivial-or-one-layer regime. Diagnostic only.
enum class DensityClass { TrivialOr1D, AboveThreshold };

struct AllardResult {
  DensityClass verdict;
  double plateau;
};

inline AllardResult allard_classify(const DensityProfile& p, double delta,
                                    double plateau_spread = 0.01) {
  if (p.values.size() < 3)
    throw ConfigError("allard_classify: need at least 3 radii");
  const std::size_t n = p.values.size();
  const double a = p.values[n - 3], b = p.values[n - 2], c = p.values[n - 1];
  const double lo = std::min({a, b, c}), hi = std::max({a, b, c});
  const double scale = std::max(std::abs(hi), 1e-12);
  if ((hi - lo) / scale > plateau_spread && hi > 1e-9)
    throw NumericsError("allard_classify: density profile has not plateaued");
  const double plateau = (a + b + c) / 3.0;
  return {plateau <= 1.0 + delta ? DensityClass::TrivialOr1D : DensityClass::AboveThreshold,
          plateau};
}

// Least-squares fit of log(eps|grad u|^2/2 + W/eps) against the distance to a
// flat layer {x_axis = height}, over distances [2 eps, 10 eps]. Returns the
// amplitude and the decay rate (2*sqrt(2)/eps for the 1D profile).
struct DecayFit {
  double amplitude;
  double rate;
  int shells;
  std::vector<double> distances, log_energy, fit_residual;
};

inline DecayFit decay_fit(const ScalarField& f, int axis, double layer_height) {
  ScalarField gsq = gradient_sq(f);
  Eigen::ArrayXd density =
      0.5 * f.epsilon * gsq.values + well(f.values) / f.epsilon;
  const double d_lo = 2.0 * f.epsilon, d_hi = 10.0 * f.epsilon;
  const double shell_width = f.grid.spacing(axis);
  const int nshell = int((d_hi - d_lo) / shell_width);
  std::vector<double> sum(nshell, 0.0);
  std::vector<int> cnt(nshell, 0);
  for (std::int64_t id = 0; id < f.grid.size(); ++id) {
    const auto ijk = f.grid.unflatten(id);
    const double d = std::abs(f.grid.coord(axis, ijk[axis]) - layer_height);
    if (d < d_lo || d >= d_hi) continue;
    const int s = int((d - d_lo) / shell_width);
    if (s < 0 || s >= nshell) continue;
    sum[s] += density[id];
    ++cnt[s];
  }
  DecayFit fit;
  for (int s = 0; s < nshell; ++s) {
    if (cnt[s] == 0) continue;
    const double mean = sum[s] / cnt[s];
    if (mean <= 0.0) continue;
    fit.distances.push_back(d_lo + (s + 0.5) * shell_width);
    fit.log_energy.push_back(std::log(mean));
  }
  fit.shells = int(fit.distances.size());
  if (fit.shells < 10)
    throw ConfigError("decay_fit: fewer than 10 usable sample shells (no layer?)");
  // linear LS: log e = log C - rate * d
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < fit.shells; ++i) {
    sx += fit.distances[i];
    sy += fit.log_energy[i];
    sxx += fit.distances[i] * fit.distances[i];
    sxy += fit.distances[i] * fit.log_energy[i];
  }
  const double n = fit.shells;
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icept = (sy - slope * sx) / n;
  fit.rate = -slope;
  fit.amplitude = std::exp(icept);
  for (int i = 0; i < fit.shells; ++i)
    fit.fit_residual.push_back(fit.log_energy[i] - (icept + slope * fit.distances[i]));
  return fit;
}

inline void write_density_csv(const DensityProfile& p, const std::string& path,
                              const std::string& note = "") {
  CsvWriter csv(path);
  if (!note.empty()) csv.comment(note);
  csv.header({"r", "M_r"});
  for (std::size_t i = 0; i < p.radii.size(); ++i) csv.row({p.radii[i], p.values[i]});
}

inline void write_decay_csv(const DecayFit& fit, const std::string& path,
                            const std::string& note = "") {
  CsvWriter csv(path);
  if (!note.empty()) csv.comment(note);
  csv.header({"distance", "log_energy", "fit_residual"});
  for (std::size_t i = 0; i < fit.distances.size(); ++i)
    csv.row({fit.distances[i], fit.log_energy[i], fit.fit_residual[i]});
}

}  // namespace phaselab
