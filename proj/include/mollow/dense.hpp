#pragma once

// Low-level dense helpers on Eigen expressions. Everything here is scalar
// generic; the typed layer in opalg.hpp fixes the scalar to complex<double>.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>

namespace mollow {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

// Default tolerances for algebraic identities and positivity slack.
inline constexpr double kAlgebraTol = 1e-10;
inline constexpr double kPositivityTol = 1e-8;

template <typename A, typename B>
Eigen::Matrix<typename A::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(
    const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  using Scalar = typename A::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(),
                                                            a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

template <typename A>
auto dagger(const Eigen::MatrixBase<A>& a) {
  return a.adjoint();
}

template <typename A, typename B>
auto commutator(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return (a * b - b * a).eval();
}

template <typename A, typename B>
auto anticommutator(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return (a * b + b * a).eval();
}

/// Column-stacking vectorization: vec(A)[i + j*d] = A(i, j).
template <typename A>
Eigen::Matrix<typename A::Scalar, Eigen::Dynamic, 1> vec(const Eigen::MatrixBase<A>& a) {
  Eigen::Matrix<typename A::Scalar, Eigen::Dynamic, Eigen::Dynamic> tmp = a;
  return Eigen::Map<const Eigen::Matrix<typename A::Scalar, Eigen::Dynamic, 1>>(
      tmp.data(), tmp.size());
}

template <typename V>
Eigen::Matrix<typename V::Scalar, Eigen::Dynamic, Eigen::Dynamic> unvec(
    const Eigen::MatrixBase<V>& v, Index d) {
  Eigen::Matrix<typename V::Scalar, Eigen::Dynamic, 1> tmp = v;
  return Eigen::Map<const Eigen::Matrix<typename V::Scalar, Eigen::Dynamic, Eigen::Dynamic>>(
      tmp.data(), d, d);
}

template <typename A>
double hermiticity_defect(const Eigen::MatrixBase<A>& a) {
  if (a.size() == 0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

template <typename A>
bool is_hermitian(const Eigen::MatrixBase<A>& a, double tol = kAlgebraTol) {
  return a.rows() == a.cols() && hermiticity_defect(a) <= tol;
}

template <typename A>
auto hermitian_part(const Eigen::MatrixBase<A>& a) {
  return (0.5 * (a + a.adjoint())).eval();
}

/// Ascending eigenvalues of the Hermitian part of `a`.
template <typename A>
RealVector hermitian_eigenvalues(const Eigen::MatrixBase<A>& a) {
  Matrix h = hermitian_part(a);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

/// Square root of a positive semidefinite matrix; eigenvalues below zero are
/// clipped.
template <typename A>
Matrix psd_sqrt(const Eigen::MatrixBase<A>& a) {
  Matrix h = hermitian_part(a);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  RealVector w = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
}

template <typename A>
double max_abs(const Eigen::MatrixBase<A>& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

}  // namespace mollow
