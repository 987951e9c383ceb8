#include "maxqed/green1d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/SparseLU>

#include "maxqed/errors.hpp"

namespace maxqed {

namespace {

constexpr double kInterfaceSnap = 1e-9;

}  // namespace

LayerStack::LayerStack(std::vector<Layer> layers, double origin) : layers_(std::move(layers)) {
  if (layers_.size() < 2) throw ValidationError("a stack needs two half-spaces");
  if (std::isfinite(layers_.front().thickness) || std::isfinite(layers_.back().thickness)) {
    throw ValidationError("the outer layers must be half-spaces (infinite thickness)");
  }
  if (!std::isfinite(origin)) throw ValidationError("stack origin must be finite");
  interfaces_.push_back(origin);
  for (std::size_t k = 1; k + 1 < layers_.size(); ++k) {
    const double d = layers_[k].thickness;
    if (!std::isfinite(d) || !(d > 0.0)) {
      throw ValidationError("inner layer " + std::to_string(k) +
                            " needs a finite positive thickness");
    }
    interfaces_.push_back(interfaces_.back() + d);
  }
}

LayerStack LayerStack::homogeneous(const MaterialModel& material) {
  return LayerStack({Layer{.material = material}, Layer{.material = material}});
}

LayerStack LayerStack::slab(const MaterialModel& material, double thickness) {
  return LayerStack({Layer{}, Layer{thickness, material}, Layer{}});
}

std::size_t LayerStack::layer_index(double z) const {
  const auto it = std::upper_bound(interfaces_.begin(), interfaces_.end(), z);
  return static_cast<std::size_t>(std::distance(interfaces_.begin(), it));
}

Grid1D::Grid1D(double origin, double spacing, std::size_t size)
    : origin_(origin), spacing_(spacing), size_(size) {
  if (!(spacing > 0.0) || !std::isfinite(spacing) || !std::isfinite(origin)) {
    throw ValidationError("grid spacing must be positive and finite");
  }
}

Grid1D Grid1D::covering(const LayerStack& stack, double spacing, double padding) {
  const double first = stack.interfaces().front();
  const double last = stack.interfaces().back();
  const auto pad = static_cast<std::size_t>(std::ceil(padding / spacing - kInterfaceSnap));
  const auto span =
      static_cast<std::size_t>(std::ceil((last - first) / spacing - kInterfaceSnap));
  return Grid1D(first - static_cast<double>(pad) * spacing, spacing, 2 * pad + span + 1);
}

std::size_t Grid1D::nearest(double z) const {
  const double x = std::round((z - origin_) / spacing_);
  if (x <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(x), size_ - 1);
}

bool Grid1D::interfaces_on_nodes(const LayerStack& stack) const {
  return std::all_of(stack.interfaces().begin(), stack.interfaces().end(), [&](double z) {
    return std::abs(node(nearest(z)) - z) <= kInterfaceSnap * spacing_;
  });
}

cdouble wavenumber(cdouble eps, cdouble kappa, double omega, const UnitsSystem& units,
                   double floor) {
  const double k0 = omega / units.c;
  cdouble k = k0 * std::sqrt(eps / kappa);
  if (k.imag() < 0.0 || (k.imag() == 0.0 && k.real() < 0.0)) k = -k;
  if (std::abs(k) < floor * std::abs(k0) || k == cdouble{}) {
    throw BranchAmbiguity("wavenumber vanishes; the outgoing branch is undefined");
  }
  return k;
}

cdouble homogeneous_green(cdouble eps, cdouble kappa, double omega, double z, double z_prime,
                          const UnitsSystem& units) {
  const cdouble k = wavenumber(eps, kappa, omega, units);
  const cdouble i{0.0, 1.0};
  return i * std::exp(i * k * std::abs(z - z_prime)) / (2.0 * kappa * k);
}

cdouble outgoing_root(cdouble kh_squared) {
  const cdouble half = 1.0 - 0.5 * kh_squared;
  const cdouble disc = std::sqrt(half * half - 1.0);
  const cdouble a = half + disc;
  const cdouble b = half - disc;
  const double ma = std::abs(a), mb = std::abs(b);
  if (std::abs(ma - mb) <= 1e-12 * std::max(ma, mb)) return a.imag() > 0.0 ? a : b;
  return ma < mb ? a : b;
}

cdouble DiscreteOperator::boundary_left() const {
  return kappa_left * (1.0 - lambda_left) / (spacing * spacing);
}

cdouble DiscreteOperator::boundary_right() const {
  return kappa_right * (1.0 - lambda_right) / (spacing * spacing);
}

Eigen::SparseMatrix<double> DiscreteOperator::difference() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::SparseMatrix<double> d(n - 1, n);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(2 * static_cast<std::size_t>(n));
  for (Eigen::Index f = 0; f + 1 < n; ++f) {
    t.emplace_back(f, f, -1.0 / spacing);
    t.emplace_back(f, f + 1, 1.0 / spacing);
  }
  d.setFromTriplets(t.begin(), t.end());
  return d;
}

DiscreteOperator assemble_operator(const LayerStack& stack, double omega, const Grid1D& grid,
                                   const UnitsSystem& units) {
  const std::size_t n = grid.size();
  if (n < 3) throw GridMismatch("a grid needs at least three nodes");
  const double h = grid.spacing();
  const double slack = kInterfaceSnap * h;
  if (grid.node(0) > stack.interfaces().front() + slack ||
      grid.node(n - 1) < stack.interfaces().back() - slack) {
    throw GridMismatch("grid [" + std::to_string(grid.node(0)) + ", " +
                       std::to_string(grid.node(n - 1)) +
                       "] must enclose every interface of the stack");
  }

  DiscreteOperator op;
  op.omega = omega;
  op.k0 = omega / units.c;
  op.spacing = h;
  op.eps_nodes.resize(n);
  op.kappa_faces.resize(n - 1);
  const auto eps_of = [omega](const MaterialModel& m) { return m.epsilon(omega); };
  const auto inv_kappa_of = [omega](const MaterialModel& m) { return 1.0 / m.kappa(omega); };
  for (std::size_t i = 0; i < n; ++i) {
    const double z = grid.node(i);
    op.eps_nodes[i] = stack.average(z - 0.5 * h, z + 0.5 * h, eps_of);
  }
  for (std::size_t f = 0; f + 1 < n; ++f) {
    op.kappa_faces[f] = 1.0 / stack.average(grid.node(f), grid.node(f + 1), inv_kappa_of);
  }

  const MaterialModel& left = stack.layers().front().material;
  const MaterialModel& right = stack.layers().back().material;
  op.kappa_left = left.kappa(omega);
  op.kappa_right = right.kappa(omega);
  const cdouble kl = wavenumber(left.epsilon(omega), op.kappa_left, omega, units);
  const cdouble kr = wavenumber(right.epsilon(omega), op.kappa_right, omega, units);
  op.lambda_left = outgoing_root(kl * kl * h * h);
  op.lambda_right = outgoing_root(kr * kr * h * h);

  const double inv_h2 = 1.0 / (h * h);
  const double k02 = op.k0 * op.k0;
  std::vector<Eigen::Triplet<cdouble>> t;
  t.reserve(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    cdouble diag = -k02 * op.eps_nodes[i];
    if (i > 0) {
      diag += op.kappa_faces[i - 1] * inv_h2;
      t.emplace_back(ii, ii - 1, -op.kappa_faces[i - 1] * inv_h2);
    } else {
      diag += op.boundary_left();
    }
    if (i + 1 < n) {
      diag += op.kappa_faces[i] * inv_h2;
      t.emplace_back(ii, ii + 1, -op.kappa_faces[i] * inv_h2);
    } else {
      diag += op.boundary_right();
    }
    t.emplace_back(ii, ii, diag);
  }
  op.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  op.matrix.setFromTriplets(t.begin(), t.end());
  op.matrix.makeCompressed();
  return op;
}

double max_phase_per_cell(const LayerStack& stack, double omega, const Grid1D& grid,
                          const UnitsSystem& units) {
  const std::size_t first = stack.layer_index(grid.node(0));
  const std::size_t last = stack.layer_index(grid.node(grid.size() - 1));
  double worst = 0.0;
  for (std::size_t l = first; l <= last && l < stack.layer_count(); ++l) {
    const auto& m = stack.layers()[l].material;
    const cdouble k = wavenumber(m.epsilon(omega), m.kappa(omega), omega, units);
    worst = std::max(worst, std::abs(k) * grid.spacing());
  }
  return worst;
}

bool resolves_wavelength(const LayerStack& stack, double omega, const Grid1D& grid,
                         const UnitsSystem& units, double nodes_per_wavelength) {
  return max_phase_per_cell(stack, omega, grid, units) <=
         2.0 * std::numbers::pi / nodes_per_wavelength;
}

GreenSolution solve_green(const LayerStack& stack, double omega, const Grid1D& grid,
                          const UnitsSystem& units, const GreenOptions& options) {
  if (!(omega > 0.0)) throw std::invalid_argument("solve_green: omega must be > 0");
  if (options.require_resolution &&
      !resolves_wavelength(stack, omega, grid, units, options.nodes_per_wavelength)) {
    throw GridMismatch("spacing " + std::to_string(grid.spacing()) + " gives fewer than " +
                       std::to_string(options.nodes_per_wavelength) +
                       " nodes per local wavelength");
  }

  GreenSolution sol;
  sol.omega = omega;
  sol.grid = grid;
  sol.op = assemble_operator(stack, omega, grid, units);

  Eigen::SparseLU<Eigen::SparseMatrix<cdouble>> lu;
  lu.compute(sol.op.matrix);
  if (lu.info() != Eigen::Success) {
    throw SingularOperator("LU factorization failed at omega = " + std::to_string(omega));
  }
  const auto n = static_cast<Eigen::Index>(grid.size());
  const double h = grid.spacing();
  const ComplexMatrix rhs = ComplexMatrix::Identity(n, n) / h;
  sol.kernel = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !sol.kernel.allFinite()) {
    throw SingularOperator("solve failed at omega = " + std::to_string(omega));
  }

  const ComplexMatrix check = sol.op.matrix * sol.kernel * h;
  sol.residual_norm = (check - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
  const double scale = sol.kernel.cwiseAbs().maxCoeff();
  sol.reciprocity_error =
      (sol.kernel - sol.kernel.transpose()).cwiseAbs().maxCoeff() / scale;
  if (sol.residual_norm > options.residual_tolerance) {
    throw std::runtime_error("solve_green: residual " + std::to_string(sol.residual_norm) +
                             " exceeds tolerance");
  }
  return sol;
}

ComplexVector field_from_current(const GreenSolution& green, const ComplexVector& current,
                                 const UnitsSystem& units) {
  if (current.size() != green.kernel.cols()) {
    throw GridMismatch("current has " + std::to_string(current.size()) +
                       " samples, kernel expects " + std::to_string(green.kernel.cols()));
  }
  const cdouble factor = units.mu0 * cdouble(0.0, green.omega) * green.grid.spacing();
  return factor * (green.kernel * current);
}

cdouble extract_reflection(const GreenSolution& green, std::size_t source,
                           std::size_t interface_node) {
  if (source == 0 || source >= interface_node || interface_node >= green.grid.size()) {
    throw GridMismatch("reflection needs 0 < source < interface node < size");
  }
  const auto col = green.kernel.col(static_cast<Eigen::Index>(source));
  const auto s = static_cast<Eigen::Index>(source);
  const cdouble lambda = col[s - 1] / col[s];
  const cdouble ratio = col[s + 1] / col[s];
  const int d = static_cast<int>(interface_node - source);
  // Right of the source g_m ~ lambda^(m-s) + rho lambda^(s-m), rho = r lambda^(2d).
  return (lambda - ratio) / (std::pow(lambda, 2 * d - 1) * (ratio * lambda - 1.0));
}

ComplexVector magnetic_from_electric(const ComplexVector& field, double omega, double spacing) {
  const Eigen::Index n = field.size();
  ComplexVector b = ComplexVector::Zero(n);
  if (n < 3) return b;
  const cdouble factor = cdouble(0.0, -1.0) / omega;
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    b[i] = factor * (field[i + 1] - field[i - 1]) / (2.0 * spacing);
  }
  b[0] = factor * (-3.0 * field[0] + 4.0 * field[1] - field[2]) / (2.0 * spacing);
  b[n - 1] = factor * (3.0 * field[n - 1] - 4.0 * field[n - 2] + field[n - 3]) / (2.0 * spacing);
  return b;
}

}  // namespace maxqed
