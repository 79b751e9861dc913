#include <random>

#include "doctest.h"
#include "mollow/correlator.hpp"
#include "mollow/liouville.hpp"
#include "oracles.hpp"

using namespace mollow;

namespace {

LindbladModel random_model(std::mt19937_64& rng, const LayoutPtr& l, int nchan) {
  std::uniform_real_distribution<double> u(0.1, 2.0);
  const Index d = l->dim();
  std::vector<Channel> ch;
  for (int k = 0; k < nchan; ++k)
    ch.push_back({u(rng), Operator(l, oracle::random_matrix(d, rng)), "c" + std::to_string(k)});
  return LindbladModel(Operator(l, oracle::random_hermitian(d, rng)), std::move(ch));
}

Vector vec_identity(Index d) { return vec(Matrix(Matrix::Identity(d, d))); }

}  // namespace

TEST_CASE("empty model gives the zero superoperator") {
  auto l = make_layout({{"q", 3}});
  const LindbladModel m(Operator::zero(l), {});
  CHECK(liouvillian_matrix(m).sparse().nonZeros() == 0);
}

TEST_CASE("superoperator matches direct right-hand side") {
  std::mt19937_64 rng(8);
  auto l = make_layout({{"s", 2}, {"a", 3}});
  const LindbladModel m = random_model(rng, l, 3);
  const Superoperator L = liouvillian_matrix(m);
  const Matrix dense = oracle::superop_from_map([&](const Matrix& r) { return lindblad_rhs(m, r); },
                                                l->dim());
  CHECK(max_abs(L.dense() - dense) < 1e-12);
  for (int k = 0; k < 100; ++k) {
    const Matrix r = oracle::random_density(6, rng);
    CHECK(max_abs(unvec(L.apply(vec(r)), 6) - lindblad_rhs(m, r)) < 1e-12);
  }
}

TEST_CASE("trace preservation, Hermiticity closure and stability") {
  std::mt19937_64 rng(9);
  auto l = make_layout({{"s", 2}, {"a", 2}});
  for (int k = 0; k < 5; ++k) {
    const LindbladModel m = random_model(rng, l, 2);
    const Superoperator L = liouvillian_matrix(m);
    const Matrix dense = L.dense();
    CHECK(max_abs(Matrix(vec_identity(4).adjoint() * dense)) < 1e-12);
    const Matrix h = oracle::random_hermitian(4, rng);
    CHECK(hermiticity_defect(unvec(L.apply(vec(h)), 4)) < 1e-12);
    Eigen::ComplexEigenSolver<Matrix> es(dense, false);
    CHECK(es.eigenvalues().real().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("undriven two-level spectrum of the generator") {
  const Superoperator L = liouvillian_matrix(build_driven_2ls(0.0, 0.0, 1.0));
  Eigen::ComplexEigenSolver<Matrix> es(L.dense(), false);
  std::vector<double> re;
  for (Index k = 0; k < 4; ++k) {
    CHECK(std::abs(es.eigenvalues()(k).imag()) < 1e-12);
    re.push_back(es.eigenvalues()(k).real());
  }
  std::sort(re.begin(), re.end());
  CHECK(re[0] == doctest::Approx(-1.0));
  CHECK(re[1] == doctest::Approx(-0.5));
  CHECK(re[2] == doctest::Approx(-0.5));
  CHECK(std::abs(re[3]) < 1e-12);
}

TEST_CASE("steady state") {
  const DensityMatrix g = steady_state(build_driven_2ls(0.0, 0.0, 1.0));
  CHECK(std::abs(g.matrix()(0, 0) - 1.0) < 1e-12);
  const DensityMatrix r = steady_state(build_driven_2ls(0.0, 0.5, 1.0));
  CHECK(std::abs(r.matrix()(1, 1).real() - 1.0 / 3.0) < 1e-12);

  SUBCASE("idempotent under evolution") {
    const LindbladModel m = build_driven_2ls(1.3, 0.8, 1.0);
    const DensityMatrix ss = steady_state(m);
    for (double t : {0.5, 3.0, 20.0}) CHECK(trace_distance(evolve(m, ss, t), ss) < 1e-9);
  }
  SUBCASE("degenerate kernel is reported") {
    auto l = make_layout({{"q", 2}});
    const LindbladModel m(Operator::zero(l), {});
    try {
      steady_state(m);
      FAIL("expected degenerate-steady-state");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DegenerateSteadyState);
    }
  }
}

TEST_CASE("transition energies") {
  auto has = [](const std::vector<double>& v, double x, double tol) {
    for (double y : v)
      if (std::abs(y - x) <= tol) return true;
    return false;
  };
  const auto e0 = transition_energies(liouvillian_matrix(build_driven_2ls(5.0, 0.0, 1.0)));
  CHECK(has(e0, 5.0, 1e-9));
  CHECK(has(e0, -5.0, 1e-9));
  CHECK(has(e0, 0.0, 1e-9));
  CHECK(std::is_sorted(e0.begin(), e0.end()));

  const auto e1 = transition_energies(liouvillian_matrix(build_driven_2ls(12.5, 4.0, 1.0)));
  const double w = std::sqrt(4.0 * 16.0 + 12.5 * 12.5);
  CHECK(has(e1, w, 0.02 * w));
  CHECK(has(e1, -w, 0.02 * w));

  // Resonant splitting 2 Omega shrinks to zero with the drive.
  double prev = 1e9;
  for (double om : {2.0, 1.0, 0.5}) {
    const auto e = transition_energies(liouvillian_matrix(build_driven_2ls(0.0, om, 1.0)));
    const double split = e.back();
    CHECK(split < prev);
    prev = split;
  }
  CHECK(prev < 1.0);
}

TEST_CASE("emission spectrum") {
  auto grid = linspace(-20.0, 20.0, 4001);
  auto local_maxima = [](const SpectrumTable& s) {
    std::vector<double> out;
    for (std::size_t i = 1; i + 1 < s.points.size(); ++i)
      if (s.points[i].density > s.points[i - 1].density &&
          s.points[i].density >= s.points[i + 1].density)
        out.push_back(s.points[i].omega);
    return out;
  };
  auto density_at = [](const SpectrumTable& s, double w) {
    double best = 1e9, v = 0.0;
    for (const auto& p : s.points)
      if (std::abs(p.omega - w) < best) {
        best = std::abs(p.omega - w);
        v = p.density;
      }
    return v;
  };

  SUBCASE("resonant triplet") {
    const LindbladModel m = build_driven_2ls(0.0, 4.0, 1.0);
    const SpectrumTable s = emission_spectrum(m, lowering(m.layout_ptr(), "s"), grid);
    const auto peaks = local_maxima(s);
    REQUIRE(peaks.size() == 3);
    CHECK(std::abs(peaks[0] + 8.0) < 0.2);
    CHECK(std::abs(peaks[1]) < 0.02);
    CHECK(std::abs(peaks[2] - 8.0) < 0.2);
    double area = 0.0;
    for (std::size_t i = 1; i < s.points.size(); ++i)
      area += 0.5 * (s.points[i].density + s.points[i - 1].density) * 0.01;
    CHECK(area == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("detuned drive favours the sidebands") {
    const LindbladModel m = build_driven_2ls(12.5, 4.0, 1.0);
    const SpectrumTable s = emission_spectrum(m, lowering(m.layout_ptr(), "s"), grid);
    const double w = std::sqrt(64.0 + 156.25);
    const double side = std::max(density_at(s, w), density_at(s, -w));
    CHECK(side > 3.0 * density_at(s, 0.0));
  }
  SUBCASE("shape matches time-domain quadrature") {
    const LindbladModel m = build_driven_2ls(1.0, 1.5, 1.0);
    const std::vector<double> ws{-3.0, -1.0, 0.0, 0.5, 2.0, 4.0};
    const SpectrumTable s = emission_spectrum(m, lowering(m.layout_ptr(), "s"), ws);
    const auto ref = oracle::bloch_incoherent_spectrum(1.0, 1.5, 1.0, ws);
    const double k = s.points[2].density / ref[2];
    for (std::size_t i = 0; i < ws.size(); ++i)
      CHECK(s.points[i].density == doctest::Approx(k * ref[i]).epsilon(1e-4));
  }
  SUBCASE("weak drive") {
    const LindbladModel m = build_driven_2ls(0.0, 0.01, 1.0);
    const auto fine = linspace(-3.0, 3.0, 60001);
    const SpectrumTable s = emission_spectrum(m, lowering(m.layout_ptr(), "s"), fine);
    CHECK(s.coherent_fraction > 0.999);
    double peak = 0.0;
    for (const auto& p : s.points) peak = std::max(peak, p.density);
    double lo = 0.0, hi = 0.0;
    for (const auto& p : s.points)
      if (p.density >= 0.5 * peak) {
        lo = std::min(lo, p.omega);
        hi = std::max(hi, p.omega);
      }
    // The inelastic part is a squared Lorentzian at weak drive.
    const double hwhm = 0.5 * std::sqrt(std::sqrt(2.0) - 1.0);
    CHECK(std::abs(0.5 * (hi - lo) - hwhm) < 5e-4);  // O(drive^2) correction
    CHECK(std::abs(0.5 * (hi + lo)) < 1e-4);
  }
  SUBCASE("coherent fraction under strong resonant drive") {
    const LindbladModel m = build_driven_2ls(0.0, 1.0, 1.0);
    const SpectrumTable s = emission_spectrum(m, lowering(m.layout_ptr(), "s"), grid);
    // Bloch steady state: |<s>|^2 / <s^dag s> = (D^2 + 1/4) / (D^2 + 1/4 + 2 W^2).
    CHECK(s.coherent_fraction == doctest::Approx(1.0 / 9.0).epsilon(1e-10));
  }
}
