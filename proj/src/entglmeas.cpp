#include "mollow/entglmeas.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>

#include "mollow/diagnostics.hpp"

namespace mollow {

namespace {

constexpr double kClip = 1e-10;

// Square root with eigenvalues below 1e-14 of the largest set to zero, so
// that rank-deficient inputs do not pick up sqrt(roundoff) terms.
Matrix clipped_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(m));
  const RealVector& ev = es.eigenvalues();
  const double floor = 1e-14 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  RealVector w(ev.size());
  for (Index k = 0; k < ev.size(); ++k) w(k) = ev(k) > floor ? std::sqrt(ev(k)) : 0.0;
  return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

Operator partial_transpose(const Operator& op, const std::string& slot) {
  const SpaceLayout& l = op.layout();
  const std::size_t k = l.slot(slot);
  const Index stride = l.stride(k);
  const Index d = l.dim();
  const Matrix& m = op.matrix();
  Matrix out(d, d);
  for (Index j = 0; j < d; ++j) {
    const Index dj = l.digit(j, k);
    for (Index i = 0; i < d; ++i) {
      const Index di = l.digit(i, k);
      out(i, j) = m(i + (dj - di) * stride, j + (di - dj) * stride);
    }
  }
  return {op.layout_ptr(), std::move(out)};
}

Operator partial_transpose(const DensityMatrix& rho, const std::string& slot) {
  return partial_transpose(rho.op(), slot);
}

double log_negativity(const DensityMatrix& rho, const std::string& slot) {
  const RealVector ev = hermitian_eigenvalues(partial_transpose(rho, slot).matrix());
  // Unit trace, so the trace norm is 1 + 2 * (negative mass).
  double neg = 0.0;
  for (Index k = 0; k < ev.size(); ++k)
    if (ev(k) < -kPositivityTol) neg -= ev(k);
  return std::log1p(2.0 * neg) / std::log(2.0);
}

double csi_R(const DensityMatrix& rho, const Operator& a, const Operator& b) {
  const Operator ad = a.dagger(), bd = b.dagger();
  const double gab = expectation(rho, ad * bd * b * a).real();
  const double gaa = expectation(rho, ad * ad * a * a).real();
  const double gbb = expectation(rho, bd * bd * b * b).real();
  require(gaa > 1e-18 && gbb > 1e-18, ErrorCode::UndefinedRatio,
          "Cauchy-Schwarz coefficient undefined: vanishing autocorrelator");
  return gab * gab / (gaa * gbb);
}

DetectionMatrix detection_matrix(const DensityMatrix& rho, const std::string& slot_a,
                                 const std::string& slot_b, DetectionBasis basis,
                                 const PolaritonSpec* spec) {
  require(slot_a != slot_b, ErrorCode::InvalidArgument, "detection matrix needs two distinct slots");
  const DensityMatrix red = rho.layout().size() == 2 ? rho : partial_trace(rho, {slot_a, slot_b});
  const LayoutPtr& l = red.layout_ptr();
  const bool a_first = l->slot(slot_a) < l->slot(slot_b);
  auto bare = [&](Index m, Index n) {
    return StateVector::basis(l, a_first ? std::vector<Index>{m, n} : std::vector<Index>{n, m})
        .amplitudes();
  };
  std::array<Vector, 4> v;
  if (basis == DetectionBasis::Bare) {
    v = {bare(0, 0), bare(1, 0), bare(0, 1), bare(1, 1)};
  } else {
    require(spec != nullptr, ErrorCode::InvalidArgument, "polariton basis needs a PolaritonSpec");
    const double d = spec->omega_b - spec->omega_a;
    const double q = std::sqrt(d * d + 4.0 * spec->g * spec->g);
    const double ca = q > 0.0 ? std::sqrt(0.5 * (1.0 + d / q)) : 1.0;
    const double cb = q > 0.0 ? std::sqrt(0.5 * (1.0 - d / q)) : 0.0;
    const Matrix a = lowering(l, slot_a).matrix();
    const Matrix b = lowering(l, slot_b).matrix();
    const Matrix ld = (ca * a - cb * b).adjoint();
    const Matrix ud = (cb * a + ca * b).adjoint();
    const Vector vac = bare(0, 0);
    v = {vac, ld * vac, ud * vac, ld * ud * vac};
    for (auto& x : v) x.normalize();
  }
  Eigen::Matrix4cd theta;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) theta(i, j) = (v[i].adjoint() * red.matrix() * v[j])(0);
  const double norm = theta.trace().real();
  require(norm >= 1e-14, ErrorCode::VanishingNorm, "detection block carries no weight");
  theta /= norm;
  theta = 0.5 * (theta + theta.adjoint()).eval();
  return {theta, norm};
}

double concurrence(const Eigen::Matrix4cd& theta) {
  Eigen::Matrix4cd yy = Eigen::Matrix4cd::Zero();
  yy(0, 3) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  yy(3, 0) = -1.0;
  const Eigen::Matrix4cd tilde = yy * theta.conjugate() * yy;
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(theta * tilde, false);
  std::array<double, 4> l{};
  for (int k = 0; k < 4; ++k) {
    const double re = es.eigenvalues()(k).real();
    l[static_cast<std::size_t>(k)] = re > kClip ? std::sqrt(re) : 0.0;
  }
  std::sort(l.rbegin(), l.rend());
  return std::clamp(l[0] - l[1] - l[2] - l[3], 0.0, 1.0);
}

double concurrence(const DetectionMatrix& theta) { return concurrence(theta.theta); }

double root_fidelity(const Matrix& rho, const Matrix& sigma) {
  require(rho.rows() == sigma.rows() && rho.cols() == sigma.cols(), ErrorCode::DimensionMismatch,
          "fidelity of states of different size");
  // Tr sqrt(sqrt(r) s sqrt(r)) is the sum of singular values of sqrt(r) sqrt(s).
  const Matrix p = clipped_sqrt(rho) * clipped_sqrt(sigma);
  return std::min(Eigen::JacobiSVD<Matrix>(p).singularValues().sum(), 1.0);
}

double fidelity(const Matrix& rho, const Matrix& sigma) {
  const double f = root_fidelity(rho, sigma);
  return f * f;
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require(rho.layout() == sigma.layout(), ErrorCode::LayoutMismatch, "fidelity across layouts");
  return fidelity(rho.matrix(), sigma.matrix());
}

DensityMatrix postselect_remove_vacuum(const DensityMatrix& rho) {
  Matrix m = rho.matrix();
  m.row(0).setZero();
  m.col(0).setZero();
  const double w = m.trace().real();
  require(w > 1e-14, ErrorCode::VanishingNorm, "state is entirely vacuum");
  return DensityMatrix::from_approximate(Operator(rho.layout_ptr(), m / w));
}

DetectionMatrix postselect_remove_vacuum(const DetectionMatrix& theta) {
  Eigen::Matrix4cd m = theta.theta;
  m.row(0).setZero();
  m.col(0).setZero();
  const double w = m.trace().real();
  require(w > 1e-14, ErrorCode::VanishingNorm, "state is entirely vacuum");
  return {m / w, theta.norm * w};
}

Eigen::Vector4cd bell_vector(BellState bell) {
  const double r = 1.0 / std::sqrt(2.0);
  if (bell == BellState::PhiMinus) return Eigen::Vector4cd(r, 0.0, 0.0, -r);
  return Eigen::Vector4cd(0.0, -r, r, 0.0);
}

BellReport bell_report(const DetectionMatrix& theta, BellState bell) {
  const Eigen::Vector4cd b = bell_vector(bell);
  const Eigen::Vector4cd vac(1.0, 0.0, 0.0, 0.0);
  const Matrix t = theta.theta;
  auto f = [&](double w) {
    const Matrix model = (1.0 - w) * vac * vac.adjoint() + w * b * b.adjoint();
    return root_fidelity(t, model);
  };
  // Root fidelity is concave in the model state, hence in w.
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = 0.0, hi = 1.0;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > 1e-10) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    }
  }
  double w = 0.5 * (lo + hi), best = f(w);
  for (double edge : {0.0, 1.0})
    if (const double fe = f(edge); fe > best) {
      best = fe;
      w = edge;
    }
  BellReport r;
  r.bell_weight = w;
  r.vacuum_weight = 1.0 - w;
  r.fidelity_to_model = best;
  r.fidelity_squared = best * best;
  r.fidelity_full_space = std::sqrt(theta.norm) * best;
  r.bell_purity = (theta.theta * theta.theta).trace().real();
  r.block_weight = theta.norm;
  return r;
}

BellReport bell_report(const DensityMatrix& rho_detectors, BellState bell) {
  require(rho_detectors.layout().size() == 2, ErrorCode::InvalidArgument,
          "bell report needs a two-mode state");
  const auto& l = rho_detectors.layout();
  return bell_report(detection_matrix(rho_detectors, l[0].label, l[1].label), bell);
}

}  // namespace mollow
