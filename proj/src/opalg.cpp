#include "mollow/opalg.hpp"

#include <algorithm>
#include <set>

namespace mollow {

namespace {

void check_layouts(const Operator& a, const Operator& b, const char* what) {
  if (a.layout_ptr() != b.layout_ptr() && !(a.layout() == b.layout()))
    fail(ErrorCode::LayoutMismatch, std::string(what) + ": operands live on different layouts");
}

}  // namespace

SpaceLayout::SpaceLayout(std::initializer_list<Subsystem> subsystems)
    : SpaceLayout(std::vector<Subsystem>(subsystems)) {}

SpaceLayout::SpaceLayout(std::vector<Subsystem> subsystems) : subsystems_(std::move(subsystems)) {
  require(!subsystems_.empty(), ErrorCode::InvalidDimension, "layout needs at least one subsystem");
  std::set<std::string> seen;
  for (const auto& s : subsystems_) {
    require(s.dim >= 2, ErrorCode::InvalidDimension,
            "subsystem '" + s.label + "' needs dimension >= 2");
    require(!s.label.empty(), ErrorCode::InvalidArgument, "empty subsystem label");
    require(seen.insert(s.label).second, ErrorCode::InvalidArgument,
            "duplicate subsystem label '" + s.label + "'");
  }
  strides_.assign(subsystems_.size(), 1);
  for (std::size_t k = subsystems_.size(); k-- > 0;) {
    strides_[k] = total_;
    total_ *= subsystems_[k].dim;
  }
}

bool SpaceLayout::contains(const std::string& label) const noexcept {
  return std::any_of(subsystems_.begin(), subsystems_.end(),
                     [&](const Subsystem& s) { return s.label == label; });
}

std::size_t SpaceLayout::slot(const std::string& label) const {
  for (std::size_t k = 0; k < subsystems_.size(); ++k)
    if (subsystems_[k].label == label) return k;
  fail(ErrorCode::UnknownLabel, "unknown subsystem label '" + label + "'");
}

SpaceLayout SpaceLayout::restricted(const std::vector<std::string>& labels) const {
  std::vector<bool> keep(subsystems_.size(), false);
  for (const auto& l : labels) keep[slot(l)] = true;
  std::vector<Subsystem> out;
  for (std::size_t k = 0; k < subsystems_.size(); ++k)
    if (keep[k]) out.push_back(subsystems_[k]);
  return SpaceLayout(std::move(out));
}

LayoutPtr make_layout(std::vector<Subsystem> subsystems) {
  return std::make_shared<const SpaceLayout>(std::move(subsystems));
}

Operator::Operator(LayoutPtr layout, Matrix matrix)
    : layout_(std::move(layout)), matrix_(std::move(matrix)) {
  require(layout_ != nullptr, ErrorCode::InvalidArgument, "operator without layout");
  require(matrix_.rows() == layout_->dim() && matrix_.cols() == layout_->dim(),
          ErrorCode::DimensionMismatch, "operator matrix does not match layout dimension");
}

Operator Operator::zero(LayoutPtr layout) {
  const Index d = layout->dim();
  return {std::move(layout), Matrix::Zero(d, d)};
}

Operator Operator::identity(LayoutPtr layout) {
  const Index d = layout->dim();
  return {std::move(layout), Matrix::Identity(d, d)};
}

Operator& Operator::operator+=(const Operator& rhs) {
  check_layouts(*this, rhs, "operator+");
  matrix_ += rhs.matrix_;
  return *this;
}

Operator& Operator::operator-=(const Operator& rhs) {
  check_layouts(*this, rhs, "operator-");
  matrix_ -= rhs.matrix_;
  return *this;
}

Operator operator+(Operator lhs, const Operator& rhs) { return lhs += rhs; }
Operator operator-(Operator lhs, const Operator& rhs) { return lhs -= rhs; }

Operator operator*(const Operator& lhs, const Operator& rhs) {
  check_layouts(lhs, rhs, "operator*");
  return {lhs.layout_ptr(), lhs.matrix() * rhs.matrix()};
}

Operator operator*(Complex s, Operator op) { return op *= s; }

Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

bool same_layout(const SpaceLayout& a, const SpaceLayout& b) { return a == b; }

DensityMatrix::DensityMatrix(Operator op) : op_(std::move(op)) {
  const Matrix& m = op_.matrix();
  require(is_hermitian(m, kAlgebraTol), ErrorCode::NonHermitian, "density matrix is not Hermitian");
  require(std::abs(m.trace() - Complex(1.0)) <= kAlgebraTol, ErrorCode::InvalidArgument,
          "density matrix trace differs from one");
  require(hermitian_eigenvalues(m)(0) >= -kPositivityTol, ErrorCode::InvalidArgument,
          "density matrix has a negative eigenvalue");
}

DensityMatrix DensityMatrix::from_approximate(const Operator& op) {
  Matrix h = hermitian_part(op.matrix());
  const double tr = h.trace().real();
  require(tr > 0.0, ErrorCode::VanishingNorm, "operator has non-positive trace");
  return DensityMatrix(op.layout_ptr(), h / tr);
}

double DensityMatrix::purity() const {
  return (matrix() * matrix()).trace().real();
}

double DensityMatrix::min_eigenvalue() const { return hermitian_eigenvalues(matrix())(0); }

StateVector::StateVector(LayoutPtr layout, Vector amplitudes)
    : layout_(std::move(layout)), amps_(std::move(amplitudes)) {
  require(layout_ != nullptr, ErrorCode::InvalidArgument, "state without layout");
  require(amps_.size() == layout_->dim(), ErrorCode::DimensionMismatch,
          "state vector does not match layout dimension");
}

StateVector StateVector::basis(LayoutPtr layout, const std::vector<Index>& digits) {
  require(digits.size() == layout->size(), ErrorCode::DimensionMismatch,
          "basis state needs one index per subsystem");
  Index flat = 0;
  for (std::size_t k = 0; k < digits.size(); ++k) {
    require(digits[k] >= 0 && digits[k] < (*layout)[k].dim, ErrorCode::InvalidArgument,
            "basis index out of range for '" + (*layout)[k].label + "'");
    flat += digits[k] * layout->stride(k);
  }
  Vector v = Vector::Zero(layout->dim());
  v(flat) = 1.0;
  return {std::move(layout), std::move(v)};
}

StateVector StateVector::normalized() const {
  const double n = norm();
  require(n > 0.0, ErrorCode::VanishingNorm, "cannot normalize a zero vector");
  return {layout_, amps_ / n};
}

DensityMatrix StateVector::projector() const {
  const StateVector u = normalized();
  return DensityMatrix::from_approximate(
      Operator(layout_, u.amps_ * u.amps_.adjoint()));
}

Matrix annihilation(Index dim) {
  require(dim >= 2, ErrorCode::InvalidDimension, "annihilation operator needs dimension >= 2");
  Matrix a = Matrix::Zero(dim, dim);
  for (Index k = 1; k < dim; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

Operator embed(const Matrix& local, const LayoutPtr& layout, const std::string& slot) {
  const std::size_t s = layout->slot(slot);
  require(local.rows() == (*layout)[s].dim && local.cols() == (*layout)[s].dim,
          ErrorCode::DimensionMismatch, "local operator does not match '" + slot + "'");
  const Index left = layout->dim() / (layout->stride(s) * (*layout)[s].dim);
  const Index right = layout->stride(s);
  Matrix m = kron(Matrix::Identity(left, left), kron(local, Matrix::Identity(right, right)));
  return {layout, std::move(m)};
}

Operator number(const LayoutPtr& layout, const std::string& slot) {
  const Matrix a = annihilation(layout->dim_of(slot));
  return embed(a.adjoint() * a, layout, slot);
}

Operator lowering(const LayoutPtr& layout, const std::string& slot) {
  return embed(annihilation(layout->dim_of(slot)), layout, slot);
}

namespace {

// Flat index of every full basis state inside `reduced`, and a key for the
// complementary (non-kept) digits.
struct Split {
  std::vector<Index> red, env;
};

Split split_indices(const SpaceLayout& full, const SpaceLayout& reduced) {
  const std::size_t n = full.size();
  std::vector<bool> kept(n, false);
  for (const auto& s : reduced.subsystems()) kept[full.slot(s.label)] = true;
  for (std::size_t k = 0, rk = 0; k < n; ++k)
    if (kept[k] && !(reduced[rk++] == full[k]))
      fail(ErrorCode::LayoutMismatch, "sub-layout differs from the joint layout");
  const Index d = full.dim();
  Split out{std::vector<Index>(d), std::vector<Index>(d)};
  for (Index i = 0; i < d; ++i) {
    Index r = 0, e = 0;
    std::size_t rk = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const Index dig = full.digit(i, k);
      if (kept[k])
        r += dig * reduced.stride(rk++);
      else
        e = e * full[k].dim + dig;
    }
    out.red[i] = r;
    out.env[i] = e;
  }
  return out;
}

}  // namespace

Operator partial_trace(const Operator& op, const std::vector<std::string>& keep) {
  require(!keep.empty(), ErrorCode::InvalidArgument, "partial trace must keep a subsystem");
  const SpaceLayout& full = op.layout();
  auto reduced = std::make_shared<const SpaceLayout>(full.restricted(keep));
  if (*reduced == full) return op;
  const Split sp = split_indices(full, *reduced);
  Matrix out = Matrix::Zero(reduced->dim(), reduced->dim());
  const Matrix& m = op.matrix();
  const Index d = full.dim();
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < d; ++i)
      if (sp.env[i] == sp.env[j]) out(sp.red[i], sp.red[j]) += m(i, j);
  return {reduced, std::move(out)};
}

Operator lift(const Operator& op, const LayoutPtr& joint) {
  if (op.layout() == *joint) return {joint, op.matrix()};
  const Split sp = split_indices(*joint, op.layout());
  const Index d = joint->dim();
  Matrix out = Matrix::Zero(d, d);
  const Matrix& m = op.matrix();
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < d; ++i)
      if (sp.env[i] == sp.env[j]) out(i, j) = m(sp.red[i], sp.red[j]);
  return {joint, std::move(out)};
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::string>& keep) {
  return DensityMatrix::from_approximate(partial_trace(rho.op(), keep));
}

Complex expectation(const DensityMatrix& rho, const Operator& op) {
  check_layouts(rho.op(), op, "expectation");
  return (rho.matrix() * op.matrix()).trace();
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  check_layouts(a.op(), b.op(), "trace_distance");
  const RealVector ev = hermitian_eigenvalues(a.matrix() - b.matrix());
  return 0.5 * ev.cwiseAbs().sum();
}

DensityMatrix tensor_product(const LayoutPtr& layout, const std::vector<Matrix>& factors) {
  require(factors.size() == layout->size(), ErrorCode::DimensionMismatch,
          "tensor product needs one factor per subsystem");
  Matrix m = Matrix::Ones(1, 1);
  for (std::size_t k = 0; k < factors.size(); ++k) {
    require(factors[k].rows() == (*layout)[k].dim && factors[k].cols() == (*layout)[k].dim,
            ErrorCode::DimensionMismatch, "factor does not match '" + (*layout)[k].label + "'");
    m = kron(m, factors[k]);
  }
  return DensityMatrix(layout, std::move(m));
}

}  // namespace mollow
