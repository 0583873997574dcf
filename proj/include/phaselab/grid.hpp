#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace phaselab {

// Error taxonomy mirrored by the CLI exit codes.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;  // exit 1
};
struct NumericsError : std::runtime_error {
  using std::runtime_error::runtime_error;  // exit 2
};
struct ScopeError : std::runtime_error {
  using std::runtime_error::runtime_error;  // exit 3: input outside the regime
};

enum class BcKind : std::uint8_t { Dirichlet = 0, NeumannZero = 1, Periodic = 2 };

// One condition per face; periodic faces must come in matched pairs.
struct BoundaryCondition {
  std::array<BcKind, 6> face{BcKind::Dirichlet, BcKind::Dirichlet,
                             BcKind::Dirichlet, BcKind::Dirichlet,
                             BcKind::Dirichlet, BcKind::Dirichlet};

  static BoundaryCondition all(BcKind k) {
    BoundaryCondition bc;
    bc.face.fill(k);
    return bc;
  }
  static BoundaryCondition dirichlet() { return all(BcKind::Dirichlet); }
  static BoundaryCondition neumann() { return all(BcKind::NeumannZero); }
  static BoundaryCondition periodic() { return all(BcKind::Periodic); }

  BcKind lo(int axis) const { return face[2 * axis]; }
  BcKind hi(int axis) const { return face[2 * axis + 1]; }
  void set_axis(int axis, BcKind k) { face[2 * axis] = face[2 * axis + 1] = k; }
  bool periodic_axis(int axis) const { return lo(axis) == BcKind::Periodic; }

  void validate(int dim) const {
    for (int a = 0; a < dim; ++a) {
      const bool pl = lo(a) == BcKind::Periodic, ph = hi(a) == BcKind::Periodic;
      if (pl != ph)
        throw ConfigError("boundary condition: periodic faces must be paired on axis " +
                          std::to_string(a));
    }
  }
};

// Node-centred uniform grid, dimension 1..3. Non-periodic axes place nodes at
// both ends (h = length/(count-1)); periodic axes tile one period with
// h = length/count. Axis 0 is the fastest-varying index.
class GridSpec {
 public:
  static constexpr std::int64_t kDefaultNodeCap = 20'000'000;

  static GridSpec make(int dim, std::array<int, 3> count, std::array<double, 3> length,
                       const BoundaryCondition& bc = BoundaryCondition::dirichlet(),
                       std::array<double, 3> origin = {0.0, 0.0, 0.0},
                       std::int64_t node_cap = kDefaultNodeCap) {
    if (dim < 1 || dim > 3) throw ConfigError("grid: dimension must be 1, 2 or 3");
    bc.validate(dim);
    GridSpec g;
    g.dim_ = dim;
    std::int64_t total = 1;
    for (int a = 0; a < 3; ++a) {
      if (a < dim) {
        if (count[a] < 2) throw ConfigError("grid: need at least 2 nodes per axis");
        if (!(length[a] > 0.0)) throw ConfigError("grid: axis length must be positive");
        g.count_[a] = count[a];
        g.origin_[a] = origin[a];
        g.periodic_[a] = bc.periodic_axis(a);
        g.spacing_[a] = g.periodic_[a] ? length[a] / count[a] : length[a] / (count[a] - 1);
        total *= count[a];
      } else {
        g.count_[a] = 1;
        g.spacing_[a] = 1.0;
        g.origin_[a] = 0.0;
        g.periodic_[a] = false;
      }
    }
    if (total > node_cap)
      throw ConfigError("grid: node count " + std::to_string(total) +
                        " exceeds cap " + std::to_string(node_cap));
    return g;
  }

  int dim() const { return dim_; }
  int count(int a) const { return count_[a]; }
  double spacing(int a) const { return spacing_[a]; }
  double origin(int a) const { return origin_[a]; }
  bool periodic(int a) const { return periodic_[a]; }
  double length(int a) const {
    return periodic_[a] ? spacing_[a] * count_[a] : spacing_[a] * (count_[a] - 1);
  }

  std::int64_t size() const {
    return std::int64_t(count_[0]) * count_[1] * count_[2];
  }

  std::int64_t flatten(int i, int j = 0, int k = 0) const {
    return i + std::int64_t(count_[0]) * (j + std::int64_t(count_[1]) * k);
  }
  std::array<int, 3> unflatten(std::int64_t id) const {
    std::array<int, 3> ijk;
    ijk[0] = int(id % count_[0]);
    id /= count_[0];
    ijk[1] = int(id % count_[1]);
    ijk[2] = int(id / count_[1]);
    return ijk;
  }

  double coord(int axis, int i) const { return origin_[axis] + i * spacing_[axis]; }

  Eigen::Vector3d point(std::int64_t id) const {
    const auto ijk = unflatten(id);
    return {coord(0, ijk[0]), coord(1, ijk[1]), coord(2, ijk[2])};
  }

  // Trapezoid node volume (h/2 at non-periodic ends).
  double node_volume(const std::array<int, 3>& ijk) const {
    double w = 1.0;
    for (int a = 0; a < dim_; ++a) {
      double wa = spacing_[a];
      if (!periodic_[a] && (ijk[a] == 0 || ijk[a] == count_[a] - 1)) wa *= 0.5;
      w *= wa;
    }
    return w;
  }

  bool on_boundary(const std::array<int, 3>& ijk, int axis) const {
    return !periodic_[axis] && (ijk[axis] == 0 || ijk[axis] == count_[axis] - 1);
  }
  bool on_boundary(const std::array<int, 3>& ijk) const {
    for (int a = 0; a < dim_; ++a)
      if (on_boundary(ijk, a)) return true;
    return false;
  }

 private:
  int dim_ = 1;
  std::array<int, 3> count_{1, 1, 1};
  std::array<double, 3> spacing_{1.0, 1.0, 1.0};
  std::array<double, 3> origin_{0.0, 0.0, 0.0};
  std::array<bool, 3> periodic_{false, false, false};
};

// Sampled scalar function on a grid. Dirichlet data lives in the boundary
// nodes of `values`; solvers hold those entries fixed. `epsilon` is the
// transition length scale of the energy the field belongs to.
struct ScalarField {
  GridSpec grid;
  BoundaryCondition bc;
  double epsilon = 1.0;
  Eigen::ArrayXd values;

  static ScalarField make(const GridSpec& grid, const BoundaryCondition& bc,
                          double epsilon, double fill = 0.0) {
    if (!(epsilon > 0.0)) throw ConfigError("field: epsilon must be positive");
    bc.validate(grid.dim());
    ScalarField f;
    f.grid = grid;
    f.bc = bc;
    f.epsilon = epsilon;
    f.values = Eigen::ArrayXd::Constant(grid.size(), fill);
    return f;
  }

  template <typename F>
  void sample(F&& fn) {
    const std::int64_t n = grid.size();
    for (std::int64_t id = 0; id < n; ++id) values[id] = fn(grid.point(id));
  }

  double operator()(int i, int j = 0, int k = 0) const {
    return values[grid.flatten(i, j, k)];
  }
  double& at(int i, int j = 0, int k = 0) { return values[grid.flatten(i, j, k)]; }
};

// Radial samples on [r_min, r_max]; `dim` supplies the (n-1)/r first-order term
// of the radial Laplacian. r_min = 0 is allowed with the u'(0) = 0 regularity
// convention; exterior problems require r_min > 0.
struct RadialField {
  Eigen::ArrayXd r;
  Eigen::ArrayXd values;
  int dim = 2;

  static RadialField logspaced(double r0, double r1, int n, int dim) {
    if (!(r0 > 0.0) || !(r1 > r0)) throw ConfigError("radial grid: need 0 < r_min < r_max");
    RadialField f;
    f.dim = dim;
    f.r = Eigen::ArrayXd(n);
    f.values = Eigen::ArrayXd::Zero(n);
    const double s0 = std::log(r0), s1 = std::log(r1);
    for (int i = 0; i < n; ++i)
      f.r[i] = std::exp(s0 + (s1 - s0) * i / double(n - 1));
    f.r[0] = r0;
    f.r[n - 1] = r1;
    return f;
  }

  static RadialField uniform(double r0, double r1, int n, int dim) {
    if (r0 < 0.0 || !(r1 > r0)) throw ConfigError("radial grid: need 0 <= r_min < r_max");
    RadialField f;
    f.dim = dim;
    f.r = Eigen::ArrayXd::LinSpaced(n, r0, r1);
    f.values = Eigen::ArrayXd::Zero(n);
    return f;
  }
};

}  // namespace phaselab
