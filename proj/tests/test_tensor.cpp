#include <cmath>

#include "doctest.h"
#include "setn/errors.hpp"
#include "setn/tensor.hpp"
#include "test_support.hpp"

using namespace setn;
using setn::testing::random_matrix;
using setn::testing::random_tensor;

TEST_CASE("reshape and permute") {
  RandomStream rng(11, 0);
  const ComplexTensor t = random_tensor(rng, {2, 3, 4});
  CHECK(t.reshape({6, 4}).values() == t.values());
  CHECK_THROWS_AS(t.reshape({5, 5}), DimensionError);
  const ComplexTensor p = t.permute({2, 0, 1});
  CHECK(p.shape() == Shape{4, 2, 3});
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t c = 0; c < 4; ++c) CHECK(p({c, a, b}) == t({a, b, c}));
  CHECK(p.permute({1, 2, 0}).values() == t.values());
  CHECK_THROWS_AS(t.permute({0, 0, 1}), DimensionError);
}

TEST_CASE("contract matches an explicit loop") {
  RandomStream rng(12, 0);
  const ComplexTensor a = random_tensor(rng, {3, 4, 5});
  const ComplexTensor b = random_tensor(rng, {5, 2, 3});
  const ComplexTensor c = contract(a, b, {{2, 0}, {0, 2}});  // (4, 2)
  REQUIRE(c.shape() == Shape{4, 2});
  for (std::size_t j = 0; j < 4; ++j)
    for (std::size_t q = 0; q < 2; ++q) {
      cplx acc = 0.0;
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t k = 0; k < 5; ++k) acc += a({i, j, k}) * b({k, q, i});
      CHECK(std::abs(c({j, q}) - acc) < 1e-12);
    }
  CHECK_THROWS_AS(contract(a, b, {{1, 0}}), DimensionError);
}

TEST_CASE("matrix product as a contraction") {
  RandomStream rng(13, 0);
  const Eigen::MatrixXcd a = random_matrix(rng, 3, 4), b = random_matrix(rng, 4, 2);
  const ComplexTensor c = contract(ComplexTensor::from_matrix(a), ComplexTensor::from_matrix(b), {{1, 0}});
  CHECK((c.as_matrix(1) - a * b).norm() < 1e-12);
}

TEST_CASE("kept_rank rules") {
  const std::vector<double> s{1.0, 0.5, 1e-3, 1e-12};
  CHECK(kept_rank(s, {0.0, std::nullopt}) == 4);
  CHECK(kept_rank(s, {1e-2, std::nullopt}) == 2);
  CHECK(kept_rank(s, {1e-10, 2}) == 2);
  const std::vector<double> tiny{1.0, 1e-17};
  CHECK(kept_rank(tiny, {0.0, std::nullopt}) == 1);
  CHECK_THROWS_AS((TruncationPolicy{-0.1, std::nullopt}.validate()), ConfigError);
  CHECK_THROWS_AS((TruncationPolicy{0.1, std::size_t{0}}.validate()), ConfigError);
}

TEST_CASE("property: SVD reconstruction and discarded weight on random matrices") {
  RandomStream rng(14, 0);
  for (int trial = 0; trial < 120; ++trial) {
    const auto m = static_cast<Eigen::Index>(1 + rng.next_u64() % 9);
    const auto n = static_cast<Eigen::Index>(1 + rng.next_u64() % 9);
    const Eigen::MatrixXcd a = random_matrix(rng, m, n);
    const SvdResult full = svd_truncated(a, {0.0, std::nullopt});
    const Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(full.s.data(), static_cast<Eigen::Index>(full.s.size()));
    CHECK((full.u * s.asDiagonal() * full.vh - a).norm() <= 1e-12 * a.norm());
    CHECK((full.u.adjoint() * full.u - Eigen::MatrixXcd::Identity(full.u.cols(), full.u.cols())).norm() < 1e-12);
    CHECK((full.vh * full.vh.adjoint() - Eigen::MatrixXcd::Identity(full.vh.rows(), full.vh.rows())).norm() < 1e-12);
    for (std::size_t i = 1; i < full.s.size(); ++i) CHECK(full.s[i] <= full.s[i - 1]);

    const std::size_t cap = 1 + rng.next_u64() % std::min(m, n);
    const SvdResult cut = svd_truncated(a, {0.0, cap});
    const Eigen::VectorXd sc = Eigen::Map<const Eigen::VectorXd>(cut.s.data(), static_cast<Eigen::Index>(cut.s.size()));
    const double err2 = (cut.u * sc.asDiagonal() * cut.vh - a).squaredNorm() / a.squaredNorm();
    CHECK(std::abs(err2 - cut.discarded_weight) <= 1e-10);
  }
}

TEST_CASE("svd rejects non-finite input") {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(2, 2);
  a(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(svd_truncated(a, {}), NumericError);
}

TEST_CASE("property: QR factors on random matrices") {
  RandomStream rng(15, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = static_cast<Eigen::Index>(1 + rng.next_u64() % 8);
    const auto n = static_cast<Eigen::Index>(1 + rng.next_u64() % 8);
    const Eigen::MatrixXcd a = random_matrix(rng, m, n);
    const QrResult f = qr(a);
    CHECK((f.q * f.r - a).norm() < 1e-12 * (1.0 + a.norm()));
    CHECK((f.q.adjoint() * f.q - Eigen::MatrixXcd::Identity(f.q.cols(), f.q.cols())).norm() < 1e-12);
    for (Eigen::Index i = 0; i < f.r.rows(); ++i) {
      CHECK(std::abs(f.r(i, i).imag()) < 1e-14);
      CHECK(f.r(i, i).real() >= 0.0);
      for (Eigen::Index j = 0; j < i && j < f.r.cols(); ++j) CHECK(std::abs(f.r(i, j)) < 1e-14);
    }
  }
}
