#include "mollow/liouville.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

#include "mollow/diagnostics.hpp"

namespace mollow {

namespace {

using Triplet = Eigen::Triplet<Complex>;

constexpr double kDropTol = 1e-15;

// Appends scale * (a kron b) to `out`, skipping structural zeros.
void kron_triplets(const Matrix& a, const Matrix& b, Complex scale, std::vector<Triplet>& out) {
  const Index n = b.rows();
  std::vector<std::pair<Index, Index>> nzb;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      if (std::abs(b(i, j)) > kDropTol) nzb.emplace_back(i, j);
  for (Index q = 0; q < a.cols(); ++q)
    for (Index p = 0; p < a.rows(); ++p) {
      const Complex apq = a(p, q);
      if (std::abs(apq) <= kDropTol) continue;
      for (auto [i, j] : nzb) out.emplace_back(p * n + i, q * n + j, scale * apq * b(i, j));
    }
}

Matrix effective_hamiltonian(const LindbladModel& model) {
  Matrix k = model.hamiltonian().matrix();
  for (const auto& c : model.channels()) {
    const Matrix& m = c.collapse.matrix();
    k -= (0.5 * c.rate) * kI * (m.adjoint() * m);
  }
  return k;
}

DensityMatrix density_from_vec(const LayoutPtr& layout, const Vector& x) {
  Matrix rho = unvec(x, layout->dim());
  return DensityMatrix::from_approximate(Operator(layout, std::move(rho)));
}

DensityMatrix steady_state_by_eigen(const Superoperator& L) {
  Eigen::ComplexEigenSolver<Matrix> es(L.dense());
  require(es.info() == Eigen::Success, ErrorCode::DegenerateSteadyState,
          "eigendecomposition of the Liouvillian failed");
  const auto& ev = es.eigenvalues();
  Index zero = -1, count = 0;
  for (Index k = 0; k < ev.size(); ++k)
    if (std::abs(ev(k)) < 1e-8) {
      zero = k;
      ++count;
    }
  require(count == 1, ErrorCode::DegenerateSteadyState,
          "Liouvillian kernel has dimension " + std::to_string(count));
  Vector x = es.eigenvectors().col(zero);
  const Index d = L.hilbert_dim();
  Complex tr = 0.0;
  for (Index k = 0; k < d; ++k) tr += x(k * d + k);
  require(std::abs(tr) > 1e-14, ErrorCode::DegenerateSteadyState, "stationary mode is traceless");
  return density_from_vec(L.layout_ptr(), x / tr);
}

}  // namespace

Superoperator::Superoperator(LayoutPtr layout, SparseMatrix matrix)
    : layout_(std::move(layout)), matrix_(std::move(matrix)) {
  const Index d2 = layout_->dim() * layout_->dim();
  require(matrix_.rows() == d2 && matrix_.cols() == d2, ErrorCode::DimensionMismatch,
          "superoperator does not match layout dimension");
}

Operator Superoperator::apply(const Operator& rho) const {
  require(rho.layout() == *layout_, ErrorCode::LayoutMismatch, "superoperator layout mismatch");
  return {layout_, unvec(apply(vec(rho.matrix())), hilbert_dim())};
}

Superoperator liouvillian_matrix(const LindbladModel& model) {
  const Index d = model.dim();
  const Matrix id = Matrix::Identity(d, d);
  const Matrix k = effective_hamiltonian(model);
  std::vector<Triplet> t;
  // -i K rho + i rho K^dag  ->  -i (I kron K) + i (conj(K) kron I)
  kron_triplets(id, k, -kI, t);
  kron_triplets(k.conjugate(), id, kI, t);
  for (const auto& c : model.channels()) {
    if (c.rate == 0.0) continue;
    const Matrix& m = c.collapse.matrix();
    kron_triplets(m.conjugate(), m, c.rate, t);
  }
  SparseMatrix l(d * d, d * d);
  l.setFromTriplets(t.begin(), t.end());
  l.prune(Complex(0.0), kDropTol);
  l.makeCompressed();
  return {model.layout_ptr(), std::move(l)};
}

Matrix lindblad_rhs(const LindbladModel& model, const Matrix& rho) {
  const Matrix& h = model.hamiltonian().matrix();
  Matrix out = -kI * (h * rho - rho * h);
  for (const auto& c : model.channels()) {
    const Matrix& m = c.collapse.matrix();
    const Matrix mdm = m.adjoint() * m;
    out += c.rate * (m * rho * m.adjoint() - 0.5 * (mdm * rho + rho * mdm));
  }
  return out;
}

DensityMatrix steady_state(const Superoperator& L) {
  const Index d = L.hilbert_dim();
  const Index n = d * d;
  // Bordered system: row 0 of L replaced by the trace functional.
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(L.sparse().nonZeros() + d));
  for (Index j = 0; j < L.sparse().outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(L.sparse(), j); it; ++it)
      if (it.row() != 0) t.emplace_back(it.row(), it.col(), it.value());
  for (Index k = 0; k < d; ++k) t.emplace_back(0, k * d + k, 1.0);
  SparseMatrix a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();

  Vector b = Vector::Zero(n);
  b(0) = 1.0;
  const double scale =
      L.sparse().nonZeros() == 0 ? 1.0 : std::max(1.0, L.sparse().coeffs().cwiseAbs().maxCoeff());
  auto accept = [&](const Vector& x) {
    return x.allFinite() && max_abs(L.apply(x)) <= 1e-9 * scale && x.norm() < 1e6;
  };
  // Preconditioned BiCGSTAB first; it is several times cheaper than a full
  // sparse LU on cascaded layouts. Either result must pass the residual test.
  // IncompleteLUT cannot handle an empty row, so those go straight to LU.
  std::vector<char> filled(static_cast<std::size_t>(n), 0);
  for (const auto& e : t) filled[static_cast<std::size_t>(e.row())] = 1;
  if (std::find(filled.begin(), filled.end(), 0) == filled.end()) {
    Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<Complex>> it;
    it.preconditioner().setDroptol(1e-2);
    it.setTolerance(1e-14);
    it.setMaxIterations(200);
    it.compute(a);
    if (it.info() == Eigen::Success) {
      const Vector x = it.solve(b);
      if (accept(x)) return density_from_vec(L.layout_ptr(), x);
    }
  }
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(a);
  if (lu.info() == Eigen::Success) {
    const Vector x = lu.solve(b);
    if (lu.info() == Eigen::Success && accept(x)) return density_from_vec(L.layout_ptr(), x);
  }
  return steady_state_by_eigen(L);
}

DensityMatrix steady_state(const LindbladModel& model) {
  return steady_state(liouvillian_matrix(model));
}

std::vector<double> transition_energies(const Superoperator& L, double merge_tol) {
  Eigen::ComplexEigenSolver<Matrix> es(L.dense(), false);
  std::vector<double> e;
  for (Index k = 0; k < es.eigenvalues().size(); ++k) e.push_back(-es.eigenvalues()(k).imag());
  std::sort(e.begin(), e.end());
  std::vector<double> out;
  for (double v : e)
    if (out.empty() || v - out.back() > merge_tol) out.push_back(v);
  return out;
}

SpectrumTable emission_spectrum(const LindbladModel& model, const Operator& emitter,
                                const std::vector<double>& omega_grid) {
  require(omega_grid.size() >= 2, ErrorCode::InvalidArgument, "spectrum grid needs two points");
  require(std::is_sorted(omega_grid.begin(), omega_grid.end()), ErrorCode::InvalidArgument,
          "spectrum grid must be ascending");
  const Superoperator L = liouvillian_matrix(model);
  const DensityMatrix rho = steady_state(L);
  const Matrix& c = emitter.matrix();
  const double population = (c.adjoint() * c * rho.matrix()).trace().real();
  require(population > 1e-300, ErrorCode::UndefinedCorrelation, "emitter is never populated");
  const Complex mean = (c * rho.matrix()).trace();

  // Initial condition of the regression with the stationary part removed.
  Matrix x0 = c * rho.matrix() - mean * rho.matrix();
  Eigen::ComplexEigenSolver<Matrix> es(L.dense());
  require(es.info() == Eigen::Success, ErrorCode::DegenerateSteadyState,
          "eigendecomposition of the Liouvillian failed");
  const Matrix& r = es.eigenvectors();
  const Vector amp = r.partialPivLu().solve(vec(x0));
  const Vector probe = vec(Matrix(c.conjugate()));  // Tr(c^dag X) = vec(conj(c)) . vec(X)

  std::vector<std::pair<Complex, Complex>> modes;  // (weight, eigenvalue)
  for (Index k = 0; k < amp.size(); ++k) {
    const Complex lk = es.eigenvalues()(k);
    if (std::abs(lk) < 1e-8) continue;
    const Complex w = (probe.transpose() * r.col(k))(0) * amp(k);
    if (std::abs(w) > 1e-14) modes.emplace_back(w, lk);
  }

  SpectrumTable out;
  out.coherent_fraction = std::norm(mean) / population;
  double clipped = 0.0, total = 0.0;
  for (double w : omega_grid) {
    double s = 0.0;
    for (const auto& [wk, lk] : modes) s += (wk / (kI * w - lk)).real();
    total += std::abs(s);
    if (s < 0.0) clipped -= s;
    out.points.push_back({w, std::max(s, 0.0)});
  }
  if (total > 0.0 && clipped > 1e-6 * total)
    warn("emission spectrum: clipped negative density " + std::to_string(clipped / total));
  double area = 0.0;
  for (std::size_t i = 1; i < out.points.size(); ++i)
    area += 0.5 * (out.points[i].density + out.points[i - 1].density) *
            (out.points[i].omega - out.points[i - 1].omega);
  require(area > 0.0, ErrorCode::UndefinedCorrelation, "spectrum has no inelastic weight on grid");
  for (auto& p : out.points) p.density /= area;
  return out;
}

}  // namespace mollow
