#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "ergokit/ctmc.hpp"
#include "ergokit/errors.hpp"
#include "ergokit/random_instances.hpp"
#include "oracles.hpp"

using namespace ergokit;
using namespace ergokit::ctmc;

namespace {

RateMatrix two_state() { return RateMatrix::from_rows({{-1.0, 1.0}, {2.0, -2.0}}); }

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("rate matrix validation") {
  CHECK_THROWS_AS(RateMatrix::from_rows({{-1.0, 1.0}, {-2.0, 2.0}}), InvalidArgument);
  CHECK_THROWS_AS(RateMatrix::from_rows({{-1.0, 0.5}, {2.0, -2.0}}), InvalidArgument);
  CHECK_THROWS_AS(RateMatrix::from_rows({{-1.0, 1.0}}), InvalidArgument);
  CHECK(two_state().irreducible());
  CHECK_FALSE(RateMatrix::from_rows({{-1.0, 1.0, 0.0}, {1.0, -1.0, 0.0}, {0.0, 0.0, 0.0}}).irreducible());
}

TEST_CASE("two-state semigroup closed form") {
  const auto q = two_state();
  CHECK(max_abs(transition_semigroup(q, 0.0).matrix() - Matrix::Identity(2, 2)) == 0.0);
  Matrix pi(2, 2);
  pi << 2.0 / 3, 1.0 / 3, 2.0 / 3, 1.0 / 3;
  for (double t : {0.1, 0.5, 1.0, 3.0}) {
    const Matrix expected = pi + std::exp(-3.0 * t) * (Matrix::Identity(2, 2) - pi);
    CHECK(max_abs(transition_semigroup(q, t).matrix() - expected) < 1e-12);
  }
  CHECK_THROWS_AS(transition_semigroup(q, -1.0), InvalidArgument);
}

TEST_CASE("semigroup matches a Taylor oracle and Chapman-Kolmogorov") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> time(0.0, 3.0);
  for (int trial = 0; trial < 30; ++trial) {
    const auto q = random_rate_matrix(2 + trial % 7, rng);
    const double s = time(rng), t = time(rng);
    const Matrix ps = transition_semigroup(q, s).matrix();
    const Matrix pt = transition_semigroup(q, t).matrix();
    CHECK(max_abs(ps - oracle::expm_taylor(s * q.matrix())) < 1e-10);
    CHECK(max_abs(transition_semigroup(q, s + t).matrix() - ps * pt) < 1e-10);
  }
}

TEST_CASE("stationary distribution") {
  const auto q = two_state();
  const auto pi = stationary_distribution(q);
  CHECK(pi[0] == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(pi[1] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(pi_f(q, WeightTable({1.0, 4.0})) == doctest::Approx(2.0));
  CHECK(pi_f(q, WeightTable::ones(2)) == doctest::Approx(1.0));

  // Equal symmetric rates give the uniform law.
  Matrix sym = Matrix::Constant(4, 4, 0.7);
  sym.diagonal().setConstant(-2.1);
  for (double p : stationary_distribution(RateMatrix(sym))) CHECK(p == doctest::Approx(0.25));

  // Birth-death chain: pi(k+1)/pi(k) = lambda_k / mu_{k+1}.
  const std::vector<double> lambda{1.0, 2.0, 0.5, 3.0};
  const std::vector<double> mu{0.0, 1.5, 1.0, 2.0, 4.0};
  Matrix bd = Matrix::Zero(5, 5);
  for (int k = 0; k < 4; ++k) {
    bd(k, k + 1) = lambda[k];
    bd(k + 1, k) = mu[k + 1];
  }
  for (int k = 0; k < 5; ++k) bd(k, k) = -bd.row(k).sum();
  std::vector<double> product(5, 1.0);
  for (int k = 1; k < 5; ++k) product[k] = product[k - 1] * lambda[k - 1] / mu[k];
  const double z = std::accumulate(product.begin(), product.end(), 0.0);
  const auto got = stationary_distribution(RateMatrix(bd));
  for (int k = 0; k < 5; ++k) CHECK(got[k] == doctest::Approx(product[k] / z).epsilon(1e-12));

  CHECK_THROWS_AS(
      stationary_distribution(RateMatrix::from_rows({{-1, 1, 0}, {1, -1, 0}, {0, 0, 0}})),
      InvalidArgument);
}

TEST_CASE("spectral gap of the two-state chain") {
  CHECK(spectral_gap(two_state()) == doctest::Approx(3.0));
}

TEST_CASE("unit resolvent") {
  const auto q = two_state();
  Matrix expected(2, 2);
  expected << 0.75, 0.25, 0.5, 0.5;
  CHECK(max_abs(resolvent(q, 1.0) - expected) < 1e-12);
  CHECK_THROWS_AS(resolvent(q, 0.0), InvalidArgument);
}

TEST_CASE("resolvent row sums and time-domain oracle") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const auto q = random_rate_matrix(3 + trial % 4, rng);
    const double alpha = 0.5 + trial * 0.3;
    const Matrix r = resolvent(q, alpha);
    CHECK((r.rowwise().sum().array() - 1.0 / alpha).abs().maxCoeff() < 1e-12);
    const Matrix quad = oracle::simpson_matrix(
        [&](double t) -> Matrix { return std::exp(-alpha * t) * oracle::expm_taylor(t * q.matrix()); },
        0.0, 40.0 / alpha, 4000);
    CHECK(max_abs(r - quad) < 1e-6);
  }
}

TEST_CASE("generalized resolvent") {
  const auto q = two_state();
  const std::vector<double> h{1.0, 0.0};
  Matrix expected(2, 2);
  expected << 1.0, 0.5, 1.0, 1.0;
  CHECK(max_abs(generalized_resolvent(q, h) - expected) < 1e-12);
  const std::vector<double> constant{2.5, 2.5};
  CHECK(max_abs(generalized_resolvent(q, constant) - resolvent(q, 2.5)) < 1e-12);
  const std::vector<double> zero{0.0, 0.0};
  CHECK_THROWS_AS(generalized_resolvent(q, zero), NumericalError);

  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto q6 = random_rate_matrix(6, rng);
    std::vector<double> k(6);
    for (auto& v : k) v = u(rng);
    k[trial % 6] = 0.0;
    const Matrix r = generalized_resolvent(q6, k);
    CHECK(r.minCoeff() >= 0.0);
    if (trial < 5) {
      // int_0^T exp(t (Q - diag(h))) dt with T large enough for the decay.
      Matrix killed = q6.matrix();
      for (int i = 0; i < 6; ++i) killed(i, i) -= k[i];
      const Matrix quad = oracle::simpson_matrix(
          [&](double t) -> Matrix { return oracle::expm_taylor(t * killed); }, 0.0, 200.0, 20000);
      CHECK(max_abs(r - quad) < 1e-5 * (1.0 + max_abs(r)));
    }
  }
}

TEST_CASE("resolvent equation") {
  const auto q = two_state();
  const std::vector<double> g{2.0, 2.0}, h{1.0, 1.0};
  CHECK(verify_resolvent_equation(q, g, h) <= 1e-10);
  CHECK(verify_resolvent_equation(q, h, h) == doctest::Approx(0.0));
  CHECK_THROWS_AS(verify_resolvent_equation(q, h, g), InvalidArgument);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto q5 = random_rate_matrix(5, rng);
    std::vector<double> gg(5), hh(5);
    for (int i = 0; i < 5; ++i) {
      hh[i] = u(rng);
      gg[i] = hh[i] + u(rng);
    }
    CHECK(verify_resolvent_equation(q5, gg, hh) <= 1e-10);
  }
}

TEST_CASE("generator of the resolvent") {
  const auto q = two_state();
  const std::vector<double> zero{0.0, 0.0}, one{1.0, 1.0};
  CHECK(generator_of_resolvent_check(q, zero) == 0.0);
  CHECK(generator_of_resolvent_check(q, one) <= 1e-14);
}

TEST_CASE("hitting functional") {
  const auto q = two_state();
  const auto f = WeightTable::ones(2);
  const FiniteSet b(2, {1});
  const auto g0 = hitting_functional(q, f, b, 0.0);
  CHECK(g0[0] == doctest::Approx(1.0));
  CHECK(g0[1] == 0.0);
  // G(x; r) = r + P^r(x, 0) G(0; 0) for f = 1, B = {1}.
  for (double r : {0.3, 1.0, 2.5}) {
    const auto gr = hitting_functional(q, f, b, r);
    const Matrix p = transition_semigroup(q, r).matrix();
    for (std::size_t x = 0; x < 2; ++x) {
      CHECK(gr[x] == doctest::Approx(r + p(x, 0) * 1.0).epsilon(1e-12));
      CHECK(gr[x] >= r);
    }
  }
  const auto reducible = RateMatrix::from_rows({{-1.0, 1.0}, {0.0, 0.0}});
  CHECK_THROWS_AS(hitting_functional(reducible, f, FiniteSet(2, {0}), 0.0), NumericalError);
  CHECK_THROWS_AS(hitting_functional(q, f, FiniteSet(2, {}), 0.0), InvalidArgument);
}

TEST_CASE("hitting functional integral term matches Simpson") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const auto q = random_rate_matrix(4, rng);
    const auto f = random_weight(4, rng);
    const auto b = random_subset(4, rng);
    const double r = 1.7;
    const auto g0 = hitting_functional(q, f, b, 0.0);
    const auto gr = hitting_functional(q, f, b, r);
    const Eigen::Map<const Vector> fv(f.values().data(), 4);
    const Eigen::Map<const Vector> g0v(g0.data(), 4);
    for (int x = 0; x < 4; ++x) {
      const double integral = oracle::simpson(
          [&](double s) { return (oracle::expm_taylor(s * q.matrix()) * fv)(x); }, 0.0, r, 400);
      const double tail = (oracle::expm_taylor(r * q.matrix()) * g0v)(x);
      CHECK(gr[x] == doctest::Approx(integral + tail).epsilon(1e-9));
    }
  }
}

TEST_CASE("converse Lyapunov function on the two-state chain") {
  const auto q = two_state();
  const auto cert = lyapunov_from_resolvent(q, WeightTable::ones(2), FiniteSet(2, {0}));
  CHECK(cert.V()[0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(cert.V()[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(cert.b() == doctest::Approx(1.5));
  // QV = (0.5, -1) = -f + 1_C V.
  const Vector qv = q.matrix() * Eigen::Map<const Vector>(cert.V().data(), 2);
  CHECK(qv(0) == doctest::Approx(0.5));
  CHECK(qv(1) == doctest::Approx(-1.0));
  CHECK(drift_identity_residual(q, cert.f(), cert.C(), cert.V()) <= 1e-12);
  CHECK(validate_certificate(q, cert).valid);

  // C = whole space reduces to the unit resolvent.
  const WeightTable f({1.0, 3.0});
  const auto all = lyapunov_from_resolvent(q, f, FiniteSet::all(2));
  const Vector expected = resolvent(q, 1.0) * Eigen::Map<const Vector>(f.values().data(), 2);
  for (int x = 0; x < 2; ++x) CHECK(all.V()[x] == doctest::Approx(expected(x)));
}

TEST_CASE("certificate validation") {
  const auto q = two_state();
  const DriftCertificate flat({1.0, 1.0}, WeightTable::ones(2), FiniteSet(2, {0}), 0.0);
  const auto m = validate_certificate(q, flat);
  CHECK_FALSE(m.valid);
  CHECK(*m.margin[1] == doctest::Approx(1.0));

  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const auto qr = random_rate_matrix(5, rng);
    const auto f = random_weight(5, rng);
    const auto c = random_subset(5, rng);
    const auto cert = lyapunov_from_resolvent(qr, f, c);
    const auto margins = validate_certificate(qr, cert);
    CHECK(margins.max_margin <= 1e-10);
    CHECK(validate_certificate(qr, cert.scaled(2.0)).valid == margins.valid);
  }

  // An infinite V is allowed only where no finite-V state can jump in.
  const DriftCertificate bad({1.0, INFINITY}, WeightTable::ones(2), FiniteSet(2, {0}), 5.0);
  CHECK_THROWS_AS(validate_certificate(q, bad), InvalidArgument);
  const auto one_way = RateMatrix::from_rows({{0.0, 0.0}, {1.0, -1.0}});
  const DriftCertificate partial({1.0, INFINITY}, WeightTable::ones(2), FiniteSet(2, {0}), 1.0);
  const auto pm = validate_certificate(one_way, partial);
  CHECK_FALSE(pm.margin[1].has_value());
  CHECK(pm.valid);
}

TEST_CASE("permuting states permutes every functional") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5;
    const auto q = random_rate_matrix(n, rng);
    const auto f = random_weight(n, rng);
    const auto c = random_subset(n, rng);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto qp = q.permuted(perm);
    std::vector<double> fp(n);
    std::vector<std::size_t> cp;
    for (std::size_t i = 0; i < n; ++i) fp[perm[i]] = f[i];
    for (std::size_t i : c.members()) cp.push_back(perm[i]);
    const auto v = lyapunov_from_resolvent(q, f, c).V();
    const auto vp = lyapunov_from_resolvent(qp, WeightTable(fp), FiniteSet(n, cp)).V();
    const auto pi = stationary_distribution(q);
    const auto pip = stationary_distribution(qp);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(vp[perm[i]] == doctest::Approx(v[i]).epsilon(1e-10));
      CHECK(pip[perm[i]] == doctest::Approx(pi[i]).epsilon(1e-10));
    }
  }
}
