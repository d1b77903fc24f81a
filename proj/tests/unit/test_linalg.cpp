#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "oamp/error.hpp"
#include "oamp/linalg.hpp"

using namespace oamp;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Matrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = normal(rng);
  return m;
}

Matrix random_symmetric(Eigen::Index n, std::uint64_t seed) {
  const Matrix a = random_matrix(n, n, seed);
  return 0.5 * (a + a.transpose());
}

std::shared_ptr<const DenseSymmetricOperator> dense_op(const Matrix& m, double scale = 1.0) {
  return std::make_shared<const DenseSymmetricOperator>(std::make_shared<const Matrix>(m), scale);
}

double largest_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  return es.eigenvalues()(m.rows() - 1);
}

Vector largest_eigenvector(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  Vector v = es.eigenvectors().col(m.rows() - 1);
  fix_sign(v);
  return v;
}

}  // namespace

TEST_SUITE("linalg") {
  TEST_CASE("operators are linear and symmetric on random probes") {
    const Matrix m = random_symmetric(25, 1);
    const auto op = dense_op(m, 0.5);
    const Vector u = random_matrix(25, 1, 2), v = random_matrix(25, 1, 3);
    CHECK(((*op)(2.0 * u + v) - 2.0 * (*op)(u) - (*op)(v)).norm() < 1e-12);
    CHECK(std::abs(u.dot((*op)(v)) - v.dot((*op)(u))) < 1e-12);
    CHECK(((*op)(u) - 0.5 * m * u).norm() < 1e-13);

    const auto sum = std::make_shared<const WeightedSumOperator>(
        std::vector<SymmetricOperatorPtr>{op, dense_op(m)}, std::vector<double>{2.0, -1.0});
    CHECK((*sum)(u).norm() < 1e-12);
  }

  TEST_CASE("rectangular operator and its adjoint") {
    const Matrix b = random_matrix(9, 14, 4);
    RectOperator r(std::make_shared<const Matrix>(b));
    const Vector v = random_matrix(14, 1, 5), w = random_matrix(9, 1, 6);
    CHECK((r.apply(v) - b * v / 3.0).norm() < 1e-13);
    CHECK(std::abs(w.dot(r.apply(v)) - v.dot(r.apply_t(w))) < 1e-12);
  }

  TEST_CASE("spectral composition") {
    const Matrix t = random_symmetric(20, 7);
    const Matrix b = random_matrix(12, 20, 8);
    const auto g = dense_op(t);
    const auto cov = std::make_shared<const RectOperator>(std::make_shared<const Matrix>(b));
    const Vector v = random_matrix(20, 1, 9);

    CHECK(((*compose_spectral_operator(g, cov, 0.0))(v) - t * v).norm() == 0.0);
    const Matrix expect = t + 0.7 * b.transpose() * b / 12.0;
    CHECK(((*compose_spectral_operator(g, cov, 0.7))(v) - expect * v).norm() < 1e-12);
    const auto zero_b = std::make_shared<const RectOperator>(
        std::make_shared<const Matrix>(Matrix::Zero(12, 20)));
    CHECK(((*compose_spectral_operator(g, zero_b, 3.0))(v) - t * v).norm() < 1e-14);
    CHECK(((*compose_spectral_operator(nullptr, cov, 1.0))(v) - b.transpose() * b * v / 12.0).norm() < 1e-12);
  }

  TEST_CASE("power iteration on small cases") {
    Rng rng(1);
    SUBCASE("identity") {
      PowerIterationOptions o;
      o.shift = 0.0;
      const auto e = power_iteration(*dense_op(Matrix::Identity(5, 5)), o, rng);
      CHECK(e.eigenvalue == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("shifted diagonal") {
      PowerIterationOptions o;
      o.shift = 1.0;
      Matrix d = Matrix::Zero(3, 3);
      d.diagonal() << 3.0, 1.0, 0.0;
      const auto e = power_iteration(*dense_op(d), o, rng);
      CHECK(e.eigenvalue == doctest::Approx(3.0).epsilon(1e-9));
      CHECK(std::abs(std::abs(e.eigenvector[0]) - 1.0) < 1e-6);
      CHECK(e.shift == 1.0);
    }
    SUBCASE("dominant negative eigenvalue") {
      Matrix d = Matrix::Zero(3, 3);
      d.diagonal() << 1.0, 0.5, -5.0;
      const auto e = power_iteration(*dense_op(d), {}, rng);
      CHECK(e.eigenvalue == doctest::Approx(1.0).epsilon(1e-7));
    }
    SUBCASE("rank one plus noise against the dense solver") {
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Vector x = random_matrix(30, 1, 100 + seed).normalized();
        const Matrix m = 4.0 * x * x.transpose() + 0.3 * random_symmetric(30, 200 + seed);
        PowerIterationOptions o;
        o.tol = 1e-12;
        const auto e = power_iteration(*dense_op(m), o, rng);
        CHECK(e.eigenvalue == doctest::Approx(largest_eigenvalue(m)).epsilon(1e-10));
        CHECK((e.eigenvector - largest_eigenvector(m)).norm() < 1e-5);
        CHECK(((m * e.eigenvector) - e.eigenvalue * e.eigenvector).norm() == doctest::Approx(e.residual).epsilon(1e-6));
      }
    }
    SUBCASE("iteration cap and bad tolerance") {
      PowerIterationOptions o;
      o.max_iter = 2;
      o.tol = 1e-15;
      CHECK_THROWS_AS(power_iteration(*dense_op(random_symmetric(40, 3)), o, rng), ConvergenceError);
      o.tol = 0.0;
      CHECK_THROWS_AS(power_iteration(*dense_op(random_symmetric(4, 3)), o, rng), DomainError);
    }
  }

  TEST_CASE("lanczos against the dense solver") {
    Rng rng(2);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Eigen::Index n = 60 + 40 * static_cast<Eigen::Index>(seed);
      const Matrix m = random_symmetric(n, 300 + seed) / std::sqrt(static_cast<double>(n));
      LanczosOptions o;
      o.tol = 1e-10;
      o.max_basis = 40;
      const auto e = lanczos_largest(*dense_op(m), o, rng);
      CHECK(e.eigenvalue == doctest::Approx(largest_eigenvalue(m)).epsilon(1e-9));
      CHECK(std::abs(e.eigenvector.norm() - 1.0) < 1e-12);
      CHECK(e.residual <= 1e-10 * std::max(1.0, std::abs(e.eigenvalue)));
    }
    SUBCASE("algebraically largest, not largest in magnitude") {
      Matrix d = Matrix::Zero(4, 4);
      d.diagonal() << -10.0, 0.5, 2.0, 1.0;
      const auto e = lanczos_largest(*dense_op(d), {}, rng);
      CHECK(e.eigenvalue == doctest::Approx(2.0).epsilon(1e-10));
      CHECK(e.eigenvector[2] > 0.0);
    }
    SUBCASE("both solvers agree on a spiked matrix") {
      const Vector x = random_matrix(200, 1, 9).normalized();
      const Matrix m = 3.0 * x * x.transpose() + random_symmetric(200, 10) / std::sqrt(200.0);
      PowerIterationOptions po;
      po.tol = 1e-12;
      const auto a = power_iteration(*dense_op(m), po, rng);
      const auto b = lanczos_largest(*dense_op(m), {}, rng);
      CHECK(a.eigenvalue == doctest::Approx(b.eigenvalue).epsilon(1e-9));
      CHECK((a.eigenvector - b.eigenvector).norm() < 1e-4);
    }
  }

  TEST_CASE("fix_sign") {
    Vector v(3);
    v << 0.1, -0.9, 0.3;
    fix_sign(v);
    CHECK(v[1] == 0.9);
  }
}
