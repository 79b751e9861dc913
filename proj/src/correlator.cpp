#include "mollow/correlator.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace mollow {

namespace {

// Above this Liouvillian size the full eigendecomposition costs more than a
// handful of matrix exponentials.
constexpr Index kEigenMaxSize = 256;

double step_key(double t) { return std::round(t * 1e12) / 1e12; }

}  // namespace

Propagator::Propagator(const Superoperator& L) : d_(L.hilbert_dim()), dense_(L.dense()) {
  if (dense_.rows() > kEigenMaxSize) return;
  Eigen::ComplexEigenSolver<Matrix> es(dense_);
  if (es.info() != Eigen::Success) return;
  Eigen::PartialPivLU<Matrix> lu(es.eigenvectors());
  Matrix inv = lu.inverse();
  const double cond = es.eigenvectors().cwiseAbs().rowwise().sum().maxCoeff() *
                      inv.cwiseAbs().rowwise().sum().maxCoeff();
  const Matrix rebuilt = es.eigenvectors() * es.eigenvalues().asDiagonal() * inv;
  const double scale = std::max(1.0, max_abs(dense_));
  if (!(cond < 1e8) || max_abs(rebuilt - dense_) > 1e-10 * scale) return;
  vecs_ = es.eigenvectors();
  inv_ = std::move(inv);
  vals_ = es.eigenvalues();
  eigen_ = true;
}

const Matrix& Propagator::step_matrix(double t) const {
  const double key = step_key(t);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  Matrix p = (dense_ * Complex(t)).exp();
  return cache_.emplace(key, std::move(p)).first->second;
}

Vector Propagator::apply(const Vector& x, double t) const {
  require(std::isfinite(t) && t >= 0.0, ErrorCode::InvalidArgument,
          "propagation time must be finite and nonnegative");
  if (t == 0.0) return x;
  if (eigen_) {
    Vector c = inv_ * x;
    for (Index k = 0; k < c.size(); ++k) c(k) *= std::exp(vals_(k) * t);
    return vecs_ * c;
  }
  return step_matrix(t) * x;
}

Matrix Propagator::apply(const Matrix& x, double t) const { return unvec(apply(vec(x), t), d_); }

DensityMatrix evolve(const LindbladModel& model, const DensityMatrix& rho0, double t) {
  require(std::isfinite(t), ErrorCode::InvalidArgument, "non-finite evolution time");
  require(rho0.layout() == model.layout(), ErrorCode::LayoutMismatch, "state and model layouts differ");
  const Propagator prop(liouvillian_matrix(model));
  return DensityMatrix::from_approximate(Operator(model.layout_ptr(), prop.apply(rho0.matrix(), t)));
}

namespace {

// Tr[probe^dag probe e^{L tau}(src rho src^dag)] at every tau of `taus`
// (nonnegative, any order), propagating incrementally in sorted order.
std::vector<double> conditional_population(const Propagator& prop, const DensityMatrix& rho,
                                           const Operator& src, const Operator& probe,
                                           const std::vector<double>& taus) {
  std::vector<std::size_t> order(taus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return taus[a] < taus[b]; });
  const Matrix& s = src.matrix();
  const Matrix pp = probe.matrix().adjoint() * probe.matrix();
  Vector x = vec(Matrix(s * rho.matrix() * s.adjoint()));
  // Tr(A X) = vec(A^T) . vec(X)
  const Vector obs = vec(Matrix(pp.transpose()));
  std::vector<double> out(taus.size());
  double t = 0.0;
  for (std::size_t i : order) {
    x = prop.apply(x, taus[i] - t);
    t = taus[i];
    out[i] = (obs.transpose() * x)(0).real();
  }
  return out;
}

}  // namespace

CorrelationCurve g2_cross(const Propagator& prop, const DensityMatrix& rho_ss, const Operator& op1,
                          const Operator& op2, const std::vector<double>& tau_grid) {
  const double n1 = expectation(rho_ss, op1.dagger() * op1).real();
  const double n2 = expectation(rho_ss, op2.dagger() * op2).real();
  require(n1 > 1e-15 && n2 > 1e-15, ErrorCode::UndefinedCorrelation,
          "g2 normalization vanishes (unpopulated mode)");
  std::vector<double> fwd, bwd;
  for (double t : tau_grid) {
    require(std::isfinite(t), ErrorCode::InvalidArgument, "non-finite delay");
    (t >= 0.0 ? fwd : bwd).push_back(std::abs(t));
  }
  const auto gf = conditional_population(prop, rho_ss, op1, op2, fwd);
  const auto gb = conditional_population(prop, rho_ss, op2, op1, bwd);
  CorrelationCurve out;
  out.n1 = n1;
  out.n2 = n2;
  std::size_t i = 0, j = 0;
  for (double t : tau_grid) {
    const double g = t >= 0.0 ? gf[i++] : gb[j++];
    out.points.push_back({t, g / (n1 * n2)});
  }
  return out;
}

CorrelationCurve g2_cross(const LindbladModel& model, const Operator& op1, const Operator& op2,
                          const std::vector<double>& tau_grid, Direction direction,
                          const std::string& label1, const std::string& label2) {
  const Superoperator L = liouvillian_matrix(model);
  const DensityMatrix rho = steady_state(L);
  const Propagator prop(L);
  std::vector<double> taus = tau_grid;
  if (direction == Direction::Backward)
    for (double& t : taus) t = -t;
  CorrelationCurve out = g2_cross(prop, rho, op1, op2, taus);
  if (direction == Direction::Backward)
    for (std::size_t k = 0; k < out.points.size(); ++k) out.points[k].tau = tau_grid[k];
  out.label1 = label1;
  out.label2 = label2;
  return out;
}

double g2_auto_zero(const DensityMatrix& rho, const Operator& op) {
  const Operator od = op.dagger();
  const double n = expectation(rho, od * op).real();
  require(n > 1e-15, ErrorCode::UndefinedCorrelation, "g2 normalization vanishes");
  return expectation(rho, od * od * op * op).real() / (n * n);
}

double g2_auto_zero(const LindbladModel& model, const Operator& op) {
  return g2_auto_zero(steady_state(model), op);
}

}  // namespace mollow
