#include "maxqed/modes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "maxqed/errors.hpp"

namespace maxqed::modes {

namespace {

using std::numbers::pi;

double max_abs(const ComplexMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// Rounding can leave a lossless entry a hair on the wrong side of zero.
double clamp_loss(double v) { return v > 0.0 ? v : 0.0; }

}  // namespace

SourceKernels source_kernels(const DiscreteOperator& op, const UnitsSystem& units) {
  const auto n = static_cast<Eigen::Index>(op.size());
  const double w = op.omega;
  const double h = op.spacing;
  SourceKernels s;
  s.omega = w;
  s.spacing = h;
  s.electric_amplitude.resize(n);
  s.magnetic_amplitude.resize(n - 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double loss = clamp_loss(op.eps_nodes[static_cast<std::size_t>(i)].imag());
    s.electric_amplitude[i] = std::sqrt(units.hbar * units.eps0 * loss / pi);
  }
  for (Eigen::Index f = 0; f + 1 < n; ++f) {
    const double loss = clamp_loss(-op.kappa_faces[static_cast<std::size_t>(f)].imag());
    s.magnetic_amplitude[f] = std::sqrt(units.hbar * units.kappa0() * loss / pi);
  }
  s.electric = ComplexMatrix::Zero(n, n);
  s.electric.diagonal() = (w * w / h * s.electric_amplitude).cast<cdouble>();

  s.magnetic = ComplexMatrix::Zero(n, n - 1);
  const cdouble iw{0.0, w};
  // Column f of D^T holds -1/h at node f and +1/h at node f + 1.
  for (Eigen::Index f = 0; f + 1 < n; ++f) {
    const cdouble v = iw * s.magnetic_amplitude[f] / (h * h);
    s.magnetic(f, f) = -v;
    s.magnetic(f + 1, f) = v;
  }
  return s;
}

SourceKernels source_kernels(const LayerStack& stack, double omega, const Grid1D& grid,
                             const UnitsSystem& units) {
  return source_kernels(assemble_operator(stack, omega, grid, units), units);
}

ModeBundle mode_fE(const GreenSolution& green, const UnitsSystem& units) {
  ModeBundle b;
  b.omega = green.omega;
  b.grid = green.grid;
  b.sources = source_kernels(green.op, units);
  const double scale = units.mu0 * green.grid.spacing();
  b.electric = scale * (green.kernel * b.sources.electric);
  b.magnetic = scale * (green.kernel * b.sources.magnetic);
  b.normalization = std::sqrt(units.hbar / (2.0 * green.omega));
  return b;
}

double mode_equation_residual(const ModeBundle& bundle, const GreenSolution& green,
                              const UnitsSystem& units) {
  const auto& a = green.op.matrix;
  const ComplexMatrix re = a * bundle.electric - units.mu0 * bundle.sources.electric;
  const ComplexMatrix rm = a * bundle.magnetic - units.mu0 * bundle.sources.magnetic;
  const double scale = units.mu0 * std::max(max_abs(bundle.sources.electric),
                                            max_abs(bundle.sources.magnetic));
  const double worst = std::max(max_abs(re), max_abs(rm));
  return scale > 0.0 ? worst / scale : worst;
}

ComplexMatrix exterior_term(const GreenSolution& green) {
  const auto n = green.kernel.rows();
  const double h = green.grid.spacing();
  const auto& g = green.kernel;
  const double left = -h * green.op.boundary_left().imag();
  const double right = -h * green.op.boundary_right().imag();
  return left * g.col(0) * g.col(0).adjoint() + right * g.col(n - 1) * g.col(n - 1).adjoint();
}

FdtResult fdt_identity_check(const ModeBundle& bundle, const GreenSolution& green,
                             const UnitsSystem& units) {
  if (!(bundle.grid == green.grid) || bundle.omega != green.omega) {
    throw GridMismatch("mode bundle and Green solution differ in grid or frequency");
  }
  const double h = green.grid.spacing();
  const double w = green.omega;
  // sum_lambda f_E f_E^H h = (hbar mu0 w^2 / pi) (absorption-weighted |G|^2)
  const double to_green = pi / (units.hbar * units.mu0 * w * w);
  FdtResult r;
  r.electric = to_green * h * (bundle.electric * bundle.electric.adjoint());
  r.magnetic = to_green * h * (bundle.magnetic * bundle.magnetic.adjoint());
  r.exterior = exterior_term(green);
  const ComplexMatrix im_g = green.kernel.imag().cast<cdouble>();
  r.residual = r.electric + r.magnetic + r.exterior - im_g;
  r.max_residual = max_abs(r.residual);
  r.scale = max_abs(im_g);
  return r;
}

double normalization_residual(const ModeBundle& bundle, const DiscreteOperator& op,
                              const UnitsSystem& units) {
  const auto& s = bundle.sources;
  const auto n = s.electric_amplitude.size();
  const double h = s.spacing;
  const double w = s.omega;
  const double norm = bundle.normalization;

  // h_X, h_Y are norm * I / h; their Gram matrix under the h-weighted sum.
  const Eigen::MatrixXd hx = Eigen::MatrixXd::Identity(n, n) * (norm / h);
  const Eigen::MatrixXd gram = hx.transpose() * hx * h;
  const Eigen::MatrixXd target = Eigen::MatrixXd::Identity(n, n) * (units.hbar / (2.0 * w) / h);
  double worst = (gram - target).cwiseAbs().maxCoeff() / target(0, 0);

  for (Eigen::Index i = 0; i < n; ++i) {
    const double loss = clamp_loss(op.eps_nodes[static_cast<std::size_t>(i)].imag());
    const double alpha = std::sqrt(2.0 * units.eps0 / pi * w * loss);
    const double expected = w * w * alpha * hx(i, i);
    const double got = s.electric(i, i).real();
    const double scale = std::max(std::abs(expected), std::abs(got));
    if (scale > 0.0) worst = std::max(worst, std::abs(expected - got) / scale);
  }
  for (Eigen::Index f = 0; f + 1 < n; ++f) {
    const double loss = clamp_loss(-op.kappa_faces[static_cast<std::size_t>(f)].imag());
    const double beta = std::sqrt(2.0 * units.kappa0() / pi * w * loss);
    const double expected = w * beta * norm / (h * h);
    const double got = s.magnetic(f + 1, f).imag();
    const double scale = std::max(std::abs(expected), std::abs(got));
    if (scale > 0.0) worst = std::max(worst, std::abs(expected - got) / scale);
  }
  return worst;
}

NoiseKernel noise_kernel(const DiscreteOperator& op, const UnitsSystem& units) {
  const auto n = static_cast<Eigen::Index>(op.size());
  const double h = op.spacing;
  const double w = op.omega;
  NoiseKernel k;
  k.omega = w;
  k.electric = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k.electric(i, i) = 4.0 * pi * units.hbar * w * w * units.eps0 *
                       clamp_loss(op.eps_nodes[static_cast<std::size_t>(i)].imag()) / h;
  }
  k.magnetic = Eigen::MatrixXd::Zero(n, n);
  const double pref = 4.0 * pi * units.hbar * units.kappa0() / h;
  for (Eigen::Index f = 0; f + 1 < n; ++f) {
    const double c =
        pref * clamp_loss(-op.kappa_faces[static_cast<std::size_t>(f)].imag()) / (h * h);
    k.magnetic(f, f) += c;
    k.magnetic(f + 1, f + 1) += c;
    k.magnetic(f, f + 1) -= c;
    k.magnetic(f + 1, f) -= c;
  }
  return k;
}

NoiseKernel noise_kernel(const LayerStack& stack, double omega, const Grid1D& grid,
                         const UnitsSystem& units) {
  return noise_kernel(assemble_operator(stack, omega, grid, units), units);
}

double vacuum_spectrum(const GreenSolution& green, std::size_t node, const UnitsSystem& units) {
  const auto i = static_cast<Eigen::Index>(node);
  if (i >= green.kernel.rows()) throw GridMismatch("node outside the grid");
  const double w = green.omega;
  return units.hbar * units.mu0 * w * w / pi * green.kernel(i, i).imag();
}

double charge_conservation_check(const SourceKernels& kernels) {
  const double h = kernels.spacing;
  const double w = kernels.omega;
  const cdouble iw{0.0, w};

  // Central-difference divergence with zero extension beyond the grid.
  const auto div = [&](const ComplexMatrix& m) {
    ComplexMatrix d = ComplexMatrix::Zero(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (i + 1 < m.rows()) d.row(i) += m.row(i + 1);
      if (i > 0) d.row(i) -= m.row(i - 1);
    }
    return ComplexMatrix(d / (2.0 * h));
  };

  const ComplexMatrix amplitude =
      kernels.electric_amplitude.asDiagonal().toDenseMatrix().cast<cdouble>();
  const ComplexMatrix sigma = -2.0 * pi * div(amplitude) / h;
  const ComplexMatrix current = -2.0 * pi * iw * amplitude / h;
  const ComplexMatrix div_j = div(current);
  const ComplexMatrix residual = -iw * sigma + div_j;
  const double scale = max_abs(div_j);
  return scale > 0.0 ? max_abs(residual) / scale : max_abs(residual);
}

QuadraticFormReport magnetic_quadratic_form(const MaterialModel& material,
                                            const pvquad::FrequencyGrid& reservoir,
                                            const UnitsSystem& units) {
  const auto m = static_cast<Eigen::Index>(reservoir.size());
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(m + 1, m + 1);
  q(0, 0) = units.kappa0();
  double schur = units.kappa0();
  for (Eigen::Index n = 0; n < m; ++n) {
    const double w = reservoir.nodes()[static_cast<std::size_t>(n)];
    const double weight = reservoir.weights()[static_cast<std::size_t>(n)];
    const double beta = coupling_beta(material, w, units) * std::sqrt(weight);
    q(0, n + 1) = q(n + 1, 0) = -beta;
    q(n + 1, n + 1) = w * w;
    schur -= beta * beta / (w * w);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q, Eigen::EigenvaluesOnly);
  return {eig.eigenvalues().minCoeff(), schur};
}

}  // namespace maxqed::modes
