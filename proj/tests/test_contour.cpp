#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "powertail/contour.hpp"
#include "powertail/errors.hpp"
#include "powertail/model.hpp"
#include "support.hpp"

using namespace powertail;
using testsupport::make_model;
using testsupport::Rng;

namespace {

struct GappedProblem {
  Eigen::MatrixXcd h, p, q;  // q: eigenvectors (columns), column 0 spans P
  Eigen::VectorXd lam;
};

// Random Hermitian 8x8 with one eigenvalue near 0 and the rest in [1, 3].
GappedProblem random_gapped(Rng& rng, Eigen::Index d = 8) {
  GappedProblem g;
  const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(testsupport::random_matrix(rng, d));
  g.q = qr.householderQ() * Eigen::MatrixXcd::Identity(d, d);
  g.lam.resize(d);
  g.lam[0] = rng.uniform(-0.1, 0.1);
  g.lam[1] = 1.0;
  for (Eigen::Index i = 2; i < d; ++i) g.lam[i] = rng.uniform(1.0, 3.0);
  g.h = g.q * g.lam.cast<cplx>().asDiagonal() * g.q.adjoint();
  g.h = 0.5 * (g.h + g.h.adjoint());
  g.p = g.q.col(0) * g.q.col(0).adjoint();
  return g;
}

// Eigenbasis rule written out independently of the library.
Eigen::MatrixXcd rule_oracle(const GappedProblem& g, const Eigen::MatrixXcd& x) {
  const Eigen::Index d = g.h.rows();
  Eigen::MatrixXcd xe = g.q.adjoint() * x * g.q;
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) {
      const bool ia = a == 0, ib = b == 0;
      if (ia == ib) xe(a, b) = 0.0;
      else xe(a, b) /= ia ? g.lam[b] - g.lam[a] : g.lam[a] - g.lam[b];
    }
  return g.q * xe * g.q.adjoint();
}

}  // namespace

TEST_CASE("tilde: 2x2 example") {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2, 2), p = h, x(2, 2);
  h(1, 1) = 1.0;
  p(0, 0) = 1.0;
  x << 0.0, 1.0, 1.0, 0.0;
  const ContourSpec c{0.0, 0.5, 64};
  CHECK((tilde(h, p, x, c) - x).norm() <= 1e-12);
  Eigen::MatrixXcd blk(2, 2);
  blk << 2.0, 0.0, 0.0, -5.0;
  CHECK(tilde(h, p, blk, c).norm() <= 1e-12);
}

TEST_CASE("tilde: eigenbasis rule and structural properties on random gapped 8x8") {
  Rng rng(2024);
  const ContourSpec c{0.0, 0.5, 64};
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = random_gapped(rng);
    const Eigen::MatrixXcd x = testsupport::random_matrix(rng, 8);
    const Eigen::MatrixXcd xt = tilde(g.h, g.p, x, c);
    const double scale = x.norm();
    CHECK((xt - rule_oracle(g, x)).norm() <= 1e-10 * scale);
    CHECK((tilde_eigenbasis(g.h, g.p, x, c) - rule_oracle(g, x)).norm() <= 1e-12 * scale);

    const Eigen::MatrixXcd q = Eigen::MatrixXcd::Identity(8, 8) - g.p;
    CHECK((g.p * xt * g.p).norm() + (q * xt * q).norm() <= 1e-10 * scale);

    const Eigen::MatrixXcd xh = 0.5 * (x + x.adjoint());
    const Eigen::MatrixXcd th = tilde(g.h, g.p, xh, c);
    CHECK((th - th.adjoint()).norm() <= 1e-12 * scale);

    // Block-diagonal input vanishes.
    const Eigen::MatrixXcd bd = g.p * x * g.p + q * x * q;
    CHECK(tilde(g.h, g.p, bd, c).norm() <= 1e-12 * scale);

    const Eigen::MatrixXcd y = testsupport::random_matrix(rng, 8);
    const cplx a(0.3, -1.2), b(-2.0, 0.5);
    const Eigen::MatrixXcd lin = tilde(g.h, g.p, a * x + b * y, c) - (a * xt + b * tilde(g.h, g.p, y, c));
    CHECK(lin.norm() <= 1e-12 * (scale + y.norm()));

    // [H, X~] = Q X P - P X Q
    const Eigen::MatrixXcd comm = g.h * xt - xt * g.h;
    CHECK((comm - (q * x * g.p - g.p * x * q)).norm() <= 1e-10 * scale);
  }
}

TEST_CASE("tilde: trapezoid convergence under n_points doubling") {
  Rng rng(7);
  const auto g = random_gapped(rng);
  const Eigen::MatrixXcd x = testsupport::random_matrix(rng, 8);
  const Eigen::MatrixXcd want = rule_oracle(g, x);
  std::vector<double> res;
  for (int n : {16, 32, 64}) res.push_back((tilde(g.h, g.p, x, ContourSpec{0.0, 0.5, n}) - want).norm() / x.norm());
  MESSAGE("residuals " << res[0] << " " << res[1] << " " << res[2]);
  CHECK(res[0] > 1e-8);
  CHECK(res[1] <= std::max(10.0 * res[0] * res[0], 1e-13));
  CHECK(res[2] <= std::max(10.0 * res[1] * res[1], 1e-13));
}

TEST_CASE("tilde: separation errors") {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2, 2), p = h, x = Eigen::MatrixXcd::Ones(2, 2);
  h(1, 1) = 0.55;
  p(0, 0) = 1.0;
  CHECK_THROWS_AS(tilde(h, p, x, ContourSpec{0.0, 0.5, 64}), SpectralSeparationError);
  h(1, 1) = 0.1;
  CHECK_THROWS_AS(tilde(h, p, x, ContourSpec{0.0, 0.5, 64}), SpectralSeparationError);
  h(1, 1) = 2.0;
  CHECK_THROWS_AS(tilde(h, p, x, ContourSpec{0.0, 0.5, 8}), ConfigError);
  const auto gapless = make_model(1.5, 0.0, 1.0, 3, 3, 0.1);
  CHECK_THROWS_AS(default_contour(gapless), SpectralSeparationError);
  const auto gapped = make_model(1.5, 2.0, 1.0, 3, 3, 0.1);
  CHECK(default_contour(gapped).radius == 1.0);
}

namespace {

// Matrix-valued Gauss integral over [0, s] with 8 panels of the boost 100-point rule.
template <class F>
Eigen::MatrixXcd gauss_matrix(F&& f, double s) {
  using rule = boost::math::quadrature::gauss<double, 100>;
  const auto& xs = rule::abscissa();
  const auto& ws = rule::weights();
  Eigen::MatrixXcd sum;
  const int panels = 8;
  for (int p = 0; p < panels; ++p) {
    const double a = s * p / panels, half = 0.5 * s / panels, mid = a + half;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (int sg : {1, -1}) {
        if (xs[i] == 0.0 && sg < 0) continue;
        const Eigen::MatrixXcd v = f(mid + sg * half * xs[i]);
        if (sum.size() == 0) sum = Eigen::MatrixXcd::Zero(v.rows(), v.cols());
        sum += (half * ws[i]) * v;
      }
    }
  }
  return sum;
}

}  // namespace

TEST_CASE("integration-by-parts sign fixed by the 2x2 oracle") {
  Eigen::VectorXd k(1), c(1);
  k << 1.0;
  c << 1.0;
  const auto m = FriedrichsModel::from_modes(k, c, build_switching(std::numbers::pi / 4), 1.0);
  const double tau = 20.0, s = 1.0, gap = m.continuum_energies()[0];
  const cplx i(0.0, 1.0);
  auto u = [&](double t) {
    Eigen::Matrix2cd ph = Eigen::Matrix2cd::Zero();
    ph(0, 0) = 1.0;
    ph(1, 1) = std::polar(1.0, -tau * t * gap);
    return Eigen::MatrixXcd(testsupport::rotation_expm(m, m.switching().g(t)) * ph);
  };
  Eigen::Matrix2cd sx, sy, sz;
  sx << 0, 1, 1, 0;
  sy << 0, -i, i, 0;
  sz << 1, 0, 0, -1;
  auto xf = [&](double t) { return Eigen::MatrixXcd((1.0 + t) * sx + t * t * sy + 0.5 * sz); };
  auto yf = [&](double t) { return Eigen::MatrixXcd(Eigen::Matrix2cd::Identity() + t * sz + t * t * sx); };
  auto ydf = [&](double t) { return Eigen::MatrixXcd(sz + 2.0 * t * sx); };
  auto xt = [&](double t) {
    const Eigen::MatrixXcd v = testsupport::rotation_expm(m, m.switching().g(t));
    const Eigen::VectorXcd win = v.col(0), wout = v.col(1);
    const Eigen::MatrixXcd pin = win * win.adjoint(), pout = wout * wout.adjoint();
    return Eigen::MatrixXcd((pin * xf(t) * pout + pout * xf(t) * pin) / gap);
  };
  auto xtd = [&](double t) { return Eigen::MatrixXcd((xt(t + 1e-5) - xt(t - 1e-5)) / 2e-5); };
  Eigen::Matrix2cd p0 = Eigen::Matrix2cd::Zero();
  p0(0, 0) = 1.0;
  const Eigen::Matrix2cd q0 = Eigen::Matrix2cd::Identity() - p0;

  const Eigen::MatrixXcd lhs = q0 * gauss_matrix([&](double t) { return Eigen::MatrixXcd(u(t).adjoint() * xf(t) * u(t) * p0 * yf(t)); }, s);
  const Eigen::MatrixXcd boundary = u(s).adjoint() * xt(s) * u(s) * p0 * yf(s) - u(0).adjoint() * xt(0) * u(0) * p0 * yf(0);
  const Eigen::MatrixXcd ints = gauss_matrix([&](double t) {
    return Eigen::MatrixXcd(u(t).adjoint() * xtd(t) * u(t) * p0 * yf(t) + u(t).adjoint() * xt(t) * u(t) * p0 * ydf(t));
  }, s);
  const Eigen::MatrixXcd rhs = (i / tau) * q0 * (boundary - ints);
  const double plus = (lhs - rhs).norm(), minus = (lhs + rhs).norm();
  MESSAGE("2x2 oracle: |lhs| " << lhs.norm() << " residual(+) " << plus << " residual(-) " << minus);
  CHECK(minus <= 1e-8);
  CHECK(plus >= 0.1 * lhs.norm());

  MatrixProfile xp{xf, [&](double t) { return Eigen::MatrixXcd(sx + 2.0 * t * sy); }};
  MatrixProfile yp{yf, ydf};
  const auto lib = verify_ibp(m, tau, xp, yp, s, 64);
  CHECK(lib.sign == -1);
  CHECK(lib.residual <= 1e-8);
  CHECK(std::abs(lib.lhs_norm - [&] {
          Eigen::JacobiSVD<Eigen::MatrixXcd> svd(lhs);
          return svd.singularValues()[0];
        }()) <= 1e-8);
}

TEST_CASE("integration-by-parts identity on a gapped model") {
  const auto m = make_model(1.5, 1.0, std::numbers::pi / 4, 4, 8, 0.01);
  REQUIRE(m.n_nodes() == 32);
  const double tau = 50.0;
  const auto suite = ibp_suite(m, tau, 1.0, 64, {11, 23, 37});
  REQUIRE(suite.cases.size() == 4);
  for (const auto& r : suite.cases) {
    MESSAGE("seed " << r.seed << " lhs " << r.lhs_norm << " residual " << r.residual);
    CHECK(r.residual <= 1e-6);
    CHECK(r.lhs_norm > 0.0);
  }
  CHECK(suite.cases[1].seed == 11);

  const auto ref = ibp_refinement(m, tau, kato_commutator_profile(m), random_polynomial_profile(m.dimension(), 2, 5), 1.0,
                                  {16, 32, 64, 128});
  for (std::size_t k = 0; k < ref.residuals.size(); ++k) MESSAGE("q=" << ref.quad_orders[k] << " residual " << ref.residuals[k]);
  for (std::size_t k = 1; k < ref.residuals.size(); ++k) {
    const bool floor = ref.residuals[k] <= 1e-11;
    CHECK((floor || ref.residuals[k] <= 0.25 * ref.residuals[k - 1]));
  }

  MatrixProfile zero{[&](double) { return Eigen::MatrixXcd(Eigen::MatrixXcd::Zero(m.dimension(), m.dimension())); },
                     [&](double) { return Eigen::MatrixXcd(Eigen::MatrixXcd::Zero(m.dimension(), m.dimension())); }};
  const auto z = verify_ibp(m, tau, kato_commutator_profile(m), zero, 1.0, 32);
  CHECK(z.lhs_norm <= 1e-14);
  CHECK(z.rhs_norm <= 1e-14);

  const auto gapless = make_model(1.5, 0.0, 1.0, 3, 3, 0.1);
  CHECK_THROWS_AS(verify_ibp(gapless, tau, kato_commutator_profile(gapless), zero, 1.0, 8), ConfigError);
}

TEST_CASE("random_polynomial_profile derivative and determinism") {
  const auto a = random_polynomial_profile(5, 3, 42);
  const auto b = random_polynomial_profile(5, 3, 42);
  CHECK(a.value(0.37) == b.value(0.37));
  const double h = 1e-6;
  CHECK((a.derivative(0.4) - (a.value(0.4 + h) - a.value(0.4 - h)) / (2 * h)).norm() <= 1e-7);
  CHECK(unit_uniform(0) == 0.0);
  CHECK(unit_uniform(~0ULL) < 1.0);
}

TEST_CASE("slaved tail probe on a gapped model") {
  const auto m = make_model(1.5, 1.0, std::numbers::pi / 4, 14, 16, 1e-4);
  std::vector<double> taus;
  for (int i = 0; i <= 4; ++i) taus.push_back(std::pow(10.0, 2.0 + 0.25 * i));
  const auto leaks = slaved_tail_probe(m, taus, 1.5);
  const double slope = testsupport::log_slope(taus, leaks);
  MESSAGE("gapped slope " << slope);
  CHECK(slope <= -2.5);
  double prev = 0.0;
  for (std::size_t i = 1; i < taus.size(); ++i) {
    const double local = std::log(leaks[i] / leaks[i - 1]) / std::log(taus[i] / taus[i - 1]);
    if (i > 1) CHECK(local < prev);
    prev = local;
  }
  CHECK_THROWS_AS(slaved_tail_probe(m, {10.0, 100.0}, 1.5), ConfigError);
  CHECK_THROWS_AS(slaved_tail_probe(m, taus, 1.0), ConfigError);
  const auto gapless = make_model(1.5, 0.0, 1.0, 3, 3, 0.1);
  CHECK_THROWS_AS(slaved_tail_probe(gapless, taus, 1.5), ConfigError);
}
