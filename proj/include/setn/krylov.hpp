#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "setn/errors.hpp"

namespace setn {

struct KrylovOptions {
  int k = 1;               // wanted eigenvalues (largest magnitude)
  double tol = 1e-10;      // on ||A x - lambda x|| / ||x||
  int max_basis = 24;      // basis cap before a restart
  int max_restarts = 300;
};

template <class Vector>
struct KrylovOutcome {
  std::vector<std::complex<double>> eigenvalues;
  std::vector<double> residuals;  // re-verified with an explicit matvec
  std::vector<Vector> vectors;
  int restarts = 0;
  int matvecs = 0;
};

namespace detail {

inline std::vector<int> order_by_magnitude(const Eigen::VectorXcd& ev) {
  std::vector<int> idx(static_cast<std::size_t>(ev.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    const double ma = std::abs(ev(a)), mb = std::abs(ev(b));
    if (ma != mb) return ma > mb;
    return ev(a).real() > ev(b).real();
  });
  return idx;
}

}  // namespace detail

// Krylov-Schur iteration with thick restarts. `Space` supplies
//   Vector apply(const Vector&), cplx dot(const Vector&, const Vector&) (first argument conjugated),
//   double norm(const Vector&), Vector combine(coeffs, pointers), std::size_t dim().
// The restart keeps an orthonormal basis of the wanted Ritz vectors of the projected matrix,
// which spans an invariant subspace, so the Krylov-Schur relation is preserved.
template <class Space>
KrylovOutcome<typename Space::Vector> krylov_schur(Space& space, typename Space::Vector start,
                                                   const KrylovOptions& opt) {
  using Vector = typename Space::Vector;
  using cplx = std::complex<double>;
  const std::size_t dim = space.dim();
  if (opt.k < 1) throw ConfigError("krylov: k must be at least 1");
  if (static_cast<std::size_t>(opt.k) > dim) throw ConfigError("krylov: k exceeds the operator dimension");
  const int m = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(std::max(opt.max_basis, opt.k + 2)), dim));
  const int keep = std::max(opt.k, std::min(m - 1, opt.k + (m - opt.k) / 2));

  KrylovOutcome<Vector> out;
  std::vector<Vector> basis;
  const double n0 = space.norm(start);
  if (!(n0 > 0.0)) throw NumericError("krylov: zero start vector");
  basis.push_back(space.combine({cplx(1.0 / n0)}, {&start}));
  Eigen::MatrixXcd bmat(0, 0);
  Eigen::VectorXcd brow(0);
  double best = std::numeric_limits<double>::infinity();

  for (int restart = 0;; ++restart) {
    bool breakdown = false;
    int p = static_cast<int>(bmat.rows());
    while (p < m) {
      Vector w = space.apply(basis[static_cast<std::size_t>(p)]);
      ++out.matvecs;
      Eigen::VectorXcd h = Eigen::VectorXcd::Zero(p + 1);
      for (int pass = 0; pass < 2; ++pass) {
        std::vector<cplx> coeffs{cplx(1.0)};
        std::vector<const Vector*> ptrs{&w};
        Eigen::VectorXcd c(p + 1);
        for (int i = 0; i <= p; ++i) {
          c(i) = space.dot(basis[static_cast<std::size_t>(i)], w);
          coeffs.push_back(-c(i));
          ptrs.push_back(&basis[static_cast<std::size_t>(i)]);
        }
        h += c;
        w = space.combine(coeffs, ptrs);
      }
      const double beta = space.norm(w);
      Eigen::MatrixXcd grown = Eigen::MatrixXcd::Zero(p + 1, p + 1);
      grown.topLeftCorner(p, p) = bmat;
      grown.col(p) = h;
      if (p > 0) grown.row(p).head(p) = brow.transpose();
      bmat = std::move(grown);
      brow = Eigen::VectorXcd::Zero(p + 1);
      const double scale = std::max(1.0, bmat.cwiseAbs().maxCoeff());
      if (beta <= 1e-13 * scale) {
        breakdown = true;
        ++p;
        break;
      }
      brow(p) = beta;
      basis.push_back(space.combine({cplx(1.0 / beta)}, {&w}));
      ++p;
    }

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(bmat);
    const Eigen::VectorXcd& theta = es.eigenvalues();
    const auto order = detail::order_by_magnitude(theta);
    const int avail = std::min<int>(opt.k, static_cast<int>(theta.size()));
    double worst = 0.0;
    for (int i = 0; i < avail; ++i) {
      Eigen::VectorXcd y = es.eigenvectors().col(order[static_cast<std::size_t>(i)]);
      y.normalize();
      worst = std::max(worst, breakdown ? 0.0 : std::abs((brow.array() * y.array()).sum()));
    }
    best = std::min(best, worst);
    const bool converged = avail == opt.k && worst <= opt.tol;

    if (converged || (breakdown && avail == opt.k)) {
      for (int i = 0; i < opt.k; ++i) {
        Eigen::VectorXcd y = es.eigenvectors().col(order[static_cast<std::size_t>(i)]);
        y.normalize();
        std::vector<cplx> coeffs;
        std::vector<const Vector*> ptrs;
        for (int j = 0; j < y.size(); ++j) {
          coeffs.push_back(y(j));
          ptrs.push_back(&basis[static_cast<std::size_t>(j)]);
        }
        Vector x = space.combine(coeffs, ptrs);
        const double xn = space.norm(x);
        const cplx lam = theta(order[static_cast<std::size_t>(i)]);
        Vector ax = space.apply(x);
        ++out.matvecs;
        Vector r = space.combine({cplx(1.0), -lam}, {&ax, &x});
        out.eigenvalues.push_back(lam);
        out.residuals.push_back(space.norm(r) / xn);
        out.vectors.push_back(std::move(x));
      }
      out.restarts = restart;
      return out;
    }
    if (breakdown) throw ConvergenceError("krylov: invariant subspace smaller than k", best);
    if (restart >= opt.max_restarts)
      throw ConvergenceError("krylov: no convergence after " + std::to_string(restart) + " restarts", best);

    // Thick restart on the wanted Ritz subspace.
    Eigen::MatrixXcd y(m, keep);
    for (int i = 0; i < keep; ++i) y.col(i) = es.eigenvectors().col(order[static_cast<std::size_t>(i)]);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qrd(y);
    const Eigen::MatrixXcd q = qrd.householderQ() * Eigen::MatrixXcd::Identity(m, keep);
    std::vector<Vector> next;
    for (int i = 0; i < keep; ++i) {
      std::vector<cplx> coeffs;
      std::vector<const Vector*> ptrs;
      for (int j = 0; j < m; ++j) {
        coeffs.push_back(q(j, i));
        ptrs.push_back(&basis[static_cast<std::size_t>(j)]);
      }
      next.push_back(space.combine(coeffs, ptrs));
    }
    next.push_back(std::move(basis[static_cast<std::size_t>(m)]));
    basis = std::move(next);
    bmat = q.adjoint() * bmat * q;
    brow = (brow.transpose() * q).transpose();
  }
}

}  // namespace setn
