#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "setn/ed.hpp"
#include "setn/errors.hpp"
#include "test_support.hpp"

using namespace setn;
using namespace setn::testing;

namespace {

ModelParams chain(int L, double J, double b, double alpha) {
  ModelParams p;
  p.L = L;
  p.J = J;
  p.b = b;
  p.spec = {DisorderKind::Uniform, alpha};
  return p;
}

Eigen::MatrixXcd pauli_hamiltonian(const ModelParams& p, std::span<const double> h) {
  const auto d = Eigen::Index{1} << p.L;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 0; i < p.L; ++i) {
    out += p.b * on_site(pauli_x(), i, p.L) + h[static_cast<std::size_t>(i)] * on_site(pauli_z(), i, p.L);
    if (i + 1 < p.L) out += p.J * on_site(pauli_z(), i, p.L) * on_site(pauli_z(), i + 1, p.L);
  }
  return out;
}

}  // namespace

TEST_CASE("single site spectrum") {
  const std::vector<double> h{0.7};
  const Eigen::VectorXd e = spectrum(build_hamiltonian(chain(1, 1.0, 1.3, 1.0), h));
  const double r = std::hypot(1.3, 0.7);
  CHECK(e(0) == doctest::Approx(-r));
  CHECK(e(1) == doctest::Approx(r));
}

TEST_CASE("no coupling and no transverse field is diagonal") {
  const std::vector<double> h{0.3, -0.2, 0.5};
  const DenseHamiltonian H = build_hamiltonian(chain(3, 0.0, 0.0, 1.0), h);
  CHECK((H.matrix - Eigen::MatrixXd(H.matrix.diagonal().asDiagonal())).norm() == 0.0);
  CHECK(H.matrix(0, 0) == doctest::Approx(0.6));
}

TEST_CASE("Hamiltonian matches Pauli construction") {
  RandomStream rng(71, 0);
  for (int L = 1; L <= 5; ++L) {
    const ModelParams p = chain(L, rng.uniform(-2, 2), rng.uniform(-2, 2), 1.0);
    std::vector<double> h(static_cast<std::size_t>(L));
    for (auto& x : h) x = rng.uniform(-1, 1);
    const DenseHamiltonian H = build_hamiltonian(p, h);
    CHECK((H.matrix.cast<cplx>() - pauli_hamiltonian(p, h)).norm() < 1e-12);
    CHECK((H.matrix - H.matrix.transpose()).norm() == 0.0);
  }
  CHECK_THROWS(build_hamiltonian(chain(3, 1, 1, 1), std::vector<double>{0.1}));
  CHECK_THROWS_AS(build_hamiltonian(chain(kMaxEdSites + 1, 1, 1, 1), std::vector<double>(kMaxEdSites + 1)),
                  ResourceError);
}

TEST_CASE("single realization SFF") {
  const std::vector<double> times{0.0, 0.4, 1.1, 2.5, 7.0};
  const auto k = sff_single(build_hamiltonian(chain(1, 1.0, 1.0, 1.0), std::vector<double>{0.0}), times);
  for (std::size_t i = 0; i < times.size(); ++i) CHECK(k[i] == doctest::Approx(4.0 * std::pow(std::cos(times[i]), 2)));

  RandomStream rng(72, 0);
  const ModelParams p = chain(4, 1.0, 1.0, 1.0);
  std::vector<double> h(4);
  for (auto& x : h) x = rng.uniform(-1, 1);
  const DenseHamiltonian H = build_hamiltonian(p, h);
  std::vector<double> ts{0.0};
  for (int i = 0; i < 5; ++i) ts.push_back(10.0 * rng.uniform01());
  const auto ks = sff_single(H, ts);
  CHECK(ks[0] == doctest::Approx(256.0));
  for (std::size_t i = 1; i < ts.size(); ++i) {
    const cplx tr = expm(cplx(0, -ts[i]) * H.matrix.cast<cplx>()).trace();
    CHECK(ks[i] == doctest::Approx(std::norm(tr)).epsilon(1e-9));
  }
}

TEST_CASE("one diagonalization serves every time") {
  std::vector<double> times(1000);
  for (std::size_t i = 0; i < times.size(); ++i) times[i] = 0.1 * static_cast<double>(i);
  const DenseHamiltonian H = build_hamiltonian(chain(5, 1, 1, 1), std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5});
  const auto before = diagonalization_count();
  const auto k = sff_single(H, times);
  CHECK(diagonalization_count() - before == 1);
  // Recurrence against direct phases at late times.
  const Eigen::VectorXd e = spectrum(H);
  for (std::size_t i : {std::size_t{63}, std::size_t{64}, std::size_t{999}}) {
    cplx s = 0.0;
    for (Eigen::Index j = 0; j < e.size(); ++j) s += std::exp(cplx(0, -e(j) * times[i]));
    CHECK(k[i] == doctest::Approx(std::norm(s)).epsilon(1e-9));
  }
}

TEST_CASE("disorder average") {
  const std::vector<double> times{0.0, 0.5, 1.0, 3.0};
  const ModelParams clean = chain(3, 1, 1, 0.0);
  const SffSeries c = sff_averaged(clean, times, 20, 5, {2, 0});
  const auto single = sff_single(build_hamiltonian(clean, std::vector<double>(3, 0.0)), times);
  for (std::size_t i = 0; i < times.size(); ++i) CHECK(c.values[i] == doctest::Approx(single[i]));
  CHECK(c.method == "ed");

  const ModelParams p = chain(4, 1, 1, 1.0);
  const SffSeries a = sff_averaged(p, times, 2000, 9, {2, 0});
  const SffSeries b = sff_averaged(p, times, 2000, 9, {2, 2000});
  CHECK(a.values[0] == doctest::Approx(256.0));
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double sigma = std::hypot(a.stderr_of_mean[i], b.stderr_of_mean[i]);
    CHECK(std::abs(a.values[i] - b.values[i]) <= 3.0 * sigma + 1e-12);
  }
  // Thread count does not change the result.
  const SffSeries one = sff_averaged(p, times, 50, 9, {1, 0});
  const SffSeries two = sff_averaged(p, times, 50, 9, {3, 0});
  CHECK(one.values == two.values);
}

TEST_CASE("four-site quadrature") {
  const std::vector<double> times{0.0, 0.7, 2.0, 5.0};
  const ModelParams clean = chain(4, 1, 1, 0.0);
  const SffSeries q0 = sff_quadrature_L4(clean, times, 16);
  const auto single = sff_single(build_hamiltonian(clean, std::vector<double>(4, 0.0)), times);
  for (std::size_t i = 0; i < times.size(); ++i) CHECK(q0.values[i] == doctest::Approx(single[i]).epsilon(1e-10));

  const ModelParams p = chain(4, 1, 1, 1.0);
  const SffSeries q = sff_quadrature_L4(p, times, 16);
  CHECK(q.values[0] == doctest::Approx(256.0).epsilon(1e-12));
  const SffSeries mc = sff_averaged(p, times, 100000, 3, {0, 0});
  for (std::size_t i = 1; i < times.size(); ++i)
    CHECK(std::abs(q.values[i] - mc.values[i]) <= 3.0 * mc.stderr_of_mean[i]);
  CHECK_THROWS_AS(sff_quadrature_L4(p, times, 8), ConfigError);
  CHECK_THROWS_AS(sff_quadrature_L4(chain(3, 1, 1, 1), times, 16), ConfigError);
}

TEST_CASE("four-site quadrature node doubling") {
  std::vector<double> times;
  for (int t = 0; t <= 100; ++t) times.push_back(t);
  const ModelParams p = chain(4, 1, 1, 0.5);
  const SffSeries coarse = sff_quadrature_L4(p, times, 16);
  const SffSeries fine = sff_quadrature_L4(p, times, 32);
  double worst = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) worst = std::max(worst, std::abs(coarse.values[i] - fine.values[i]));
  INFO("max |dK| = " << worst);
  CHECK(worst < 1e-3);
}

TEST_CASE("Trotter SFF") {
  const ModelParams p = chain(3, 0.8, 1.1, 1.0);
  const std::vector<double> h{0.2, -0.4, 0.7};
  const std::vector<int> zero{0};
  CHECK(sff_trotter(p, h, zero)[0] == doctest::Approx(64.0));

  // First-order splitting converges to the continuous-time value at fixed t.
  const double t = 1.3;
  const double exact = sff_single(build_hamiltonian(p, h), std::vector<double>{t})[0];
  double prev = 0.0;
  for (int n : {50, 100, 200, 400}) {
    ModelParams q = p;
    q.tau = t / n;
    const double err = std::abs(sff_trotter(q, h, std::vector<int>{n})[0] - exact);
    if (n > 50) CHECK(err < 0.6 * prev);
    prev = err;
  }
  CHECK(prev < 0.05);
}

TEST_CASE("batch Trotter average equals the literal tuple average") {
  ModelParams p = chain(2, 0.9, 1.2, 1.0);
  p.tau = 0.3;
  const RealizationBatch batch = sample(p.spec, 5, 17);
  const std::vector<int> steps{0, 1, 2, 3, 5};
  const SffSeries fast = sff_trotter_batch(p, batch, steps);
  std::vector<double> literal(steps.size(), 0.0);
  for (double h1 : batch.values)
    for (double h2 : batch.values) {
      const auto k = sff_trotter(p, std::vector<double>{h1, h2}, steps);
      for (std::size_t i = 0; i < steps.size(); ++i) literal[i] += k[i] / 25.0;
    }
  for (std::size_t i = 0; i < steps.size(); ++i) CHECK(fast.values[i] == doctest::Approx(literal[i]).epsilon(1e-10));
  CHECK(fast.method == "trotter-batch");
}

TEST_CASE("spacing ratio") {
  const std::vector<double> even{1, 2, 3, 4};
  CHECK(level_spacing_ratio(even).mean == doctest::Approx(1.0));
  CHECK(level_spacing_ratio(even).used == 2);

  RandomStream rng(73, 0);
  std::vector<double> poisson(100001);
  double x = 0.0;
  for (auto& e : poisson) e = x += -std::log(1.0 - rng.uniform01());
  CHECK(std::abs(level_spacing_ratio(poisson).mean - (2.0 * std::numbers::ln2 - 1.0)) < 0.005);

  double goe = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd a(1000, 1000);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = rng.normal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a + a.transpose(), Eigen::EigenvaluesOnly);
    const Eigen::VectorXd ev = es.eigenvalues();
    goe += level_spacing_ratio(std::span<const double>(ev.data(), static_cast<std::size_t>(ev.size()))).mean / 50.0;
  }
  CHECK(std::abs(goe - 0.5307) < 0.005);

  std::vector<double> shuffled{0.3, 2.0, -1.0, 0.9, 5.5, 1.7};
  std::vector<double> affine;
  for (double e : shuffled) affine.push_back(-3.0 * e + 11.0);
  CHECK(level_spacing_ratio(affine).mean == doctest::Approx(level_spacing_ratio(shuffled).mean));
  const std::vector<double> degenerate{1.0, 1.0, 2.0, 3.0};
  CHECK(level_spacing_ratio(degenerate).skipped == 1);
}

TEST_CASE("GOE reference curve") {
  const double d = 64.0;
  const double at_d = d * (2.0 - std::log(3.0));
  CHECK(goe_sff_reference(d, d) == doctest::Approx(at_d));
  CHECK(goe_sff_reference(d * (1 - 1e-9), d) == doctest::Approx(at_d).epsilon(1e-6));
  CHECK(goe_sff_reference(d * (1 + 1e-9), d) == doctest::Approx(at_d).epsilon(1e-6));
  CHECK(goe_sff_reference(0.5 * d, d) == doctest::Approx(d * (1.0 - 0.5 * std::log(2.0))));
  const double eps = 1e-4 * d;
  CHECK(goe_sff_reference(eps, d) / eps == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(std::abs(goe_sff_reference(100 * d, d) - d) < 0.01 * d);
}
