#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "dnsgd/linalg.hpp"

using dnsgd::Matrix;
using dnsgd::Vector;

namespace {

// ---- independent oracles -------------------------------------------------

// Residual computed with plain loops, no library routines.
double residual_inf_norm(const Matrix& a, const Vector& x, const Vector& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    worst = std::max(worst, std::abs(s - b[i]));
  }
  return worst;
}

// Number of eigenvalues of A below `shift`, read off the pivot signs of an
// elimination of (A - shift I). Sign of det(A - lambda I) over leading
// minors, i.e. Sylvester inertia.
int eigenvalues_below(Matrix a, double shift) {
  const std::size_t n = a.rows();
  for (std::size_t i = 0; i < n; ++i) a(i, i) -= shift;
  int neg = 0;
  for (std::size_t k = 0; k < n; ++k) {
    double piv = a(k, k);
    if (piv == 0.0) piv = 1e-300;
    if (piv < 0.0) ++neg;
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / piv;
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
    }
  }
  return neg;
}

// Bisection on det(A - lambda I) sign information for the smallest root of
// the characteristic polynomial.
double smallest_eigenvalue_bisect(const Matrix& a) {
  const std::size_t n = a.rows();
  double lo = a(0, 0), hi = a(0, 0);
  for (std::size_t i = 0; i < n; ++i) {
    double radius = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) radius += std::abs(a(i, j));
    lo = std::min(lo, a(i, i) - radius);
    hi = std::max(hi, a(i, i) + radius);
  }
  lo -= 1.0;
  hi += 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (eigenvalues_below(a, mid) >= 1)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

Matrix random_symmetric(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) a(i, j) = a(j, i) = u(rng);
  return a;
}

// M M^T, PSD by construction.
Matrix random_psd(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(n, n);
  for (auto& e : m.entries()) e = u(rng);
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += m(i, k) * m(j, k);
      a(i, j) = s;
    }
  return a;
}

Vector random_vector(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vector v(n);
  for (auto& e : v) e = u(rng);
  return v;
}

}  // namespace

TEST_CASE("cholesky_solve identity and diagonal cases") {
  Matrix i2 = Matrix::identity(2);
  Vector x = dnsgd::cholesky_solve(i2, {3.0, -1.0});
  CHECK(x[0] == 3.0);
  CHECK(x[1] == -1.0);

  Matrix d(2, 2);
  d(0, 0) = 4.0;
  d(1, 1) = 2.0;
  x = dnsgd::cholesky_solve(d, {4.0, 2.0});
  CHECK(x[0] == Catch::Approx(1.0).margin(1e-15));
  CHECK(x[1] == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("cholesky_solve random SPD satisfies the residual bound") {
  std::mt19937_64 rng(101);
  for (std::size_t n : {2u, 8u, 33u, 64u}) {
    Matrix a = random_psd(rng, n);
    for (std::size_t i = 0; i < n; ++i) a(i, i) += 1.0;
    Vector b = random_vector(rng, n, 2.0);
    Vector x = dnsgd::cholesky_solve(a, b);
    CHECK(residual_inf_norm(a, x, b) <= 1e-8 * (1.0 + dnsgd::inf_norm(b)));
  }
}

TEST_CASE("cholesky_solve leaves the input unmodified") {
  std::mt19937_64 rng(7);
  Matrix a = random_psd(rng, 5);
  for (std::size_t i = 0; i < 5; ++i) a(i, i) += 1.0;
  Matrix before = a;
  (void)dnsgd::cholesky_solve(a, random_vector(rng, 5));
  CHECK(a.entries() == before.entries());
}

TEST_CASE("cholesky_solve error paths") {
  Matrix rect(2, 3);
  CHECK_THROWS_AS(dnsgd::cholesky_solve(rect, {1.0, 2.0}), dnsgd::DimensionMismatch);

  Matrix i2 = Matrix::identity(2);
  CHECK_THROWS_AS(dnsgd::cholesky_solve(i2, {1.0, 2.0, 3.0}), dnsgd::DimensionMismatch);

  Matrix asym = Matrix::identity(2);
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(dnsgd::cholesky_solve(asym, {1.0, 2.0}), dnsgd::DimensionMismatch);

  // Null matrix: the undamped degenerate case must fail loudly.
  Matrix zero(3, 3);
  CHECK_THROWS_AS(dnsgd::cholesky_solve(zero, {1.0, 1.0, 1.0}), dnsgd::NotPositiveDefinite);

  // Indefinite matrix.
  Matrix ind = Matrix::identity(2);
  ind(1, 1) = -1.0;
  CHECK_THROWS_AS(dnsgd::cholesky_solve(ind, {1.0, 1.0}), dnsgd::NotPositiveDefinite);
}

TEST_CASE("min_eigenvalue identity and rank-one cases") {
  CHECK(dnsgd::min_eigenvalue(Matrix::identity(3)) == Catch::Approx(1.0).margin(1e-12));

  // 2 x x^T with x = (1, 0.5): eigenvalues {2.5, 0}.
  Matrix r1(2, 2);
  r1(0, 0) = 2.0;
  r1(0, 1) = r1(1, 0) = 1.0;
  r1(1, 1) = 0.5;
  CHECK(dnsgd::min_eigenvalue(r1) == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("min_eigenvalue matches the bisection oracle on random symmetric matrices") {
  std::mt19937_64 rng(202);
  for (int rep = 0; rep < 10; ++rep) {
    Matrix a = random_symmetric(rng, 6, 3.0);
    CHECK(dnsgd::min_eigenvalue(a) ==
          Catch::Approx(smallest_eigenvalue_bisect(a)).margin(1e-8));
  }
}

TEST_CASE("min_eigenvalue shift property") {
  std::mt19937_64 rng(303);
  for (double c : {0.5, 2.0}) {
    Matrix a = random_symmetric(rng, 6, 2.0);
    Matrix shifted = a;
    for (std::size_t i = 0; i < 6; ++i) shifted(i, i) += c;
    CHECK(dnsgd::min_eigenvalue(shifted) ==
          Catch::Approx(dnsgd::min_eigenvalue(a) + c).margin(1e-8));
  }
}

TEST_CASE("min_eigenvalue rejects non-square input") {
  Matrix rect(2, 3);
  CHECK_THROWS_AS(dnsgd::min_eigenvalue(rect), dnsgd::DimensionMismatch);
}

TEST_CASE("kron identity and scalar factors") {
  Matrix b(2, 2);
  b(0, 0) = 1.0;
  b(0, 1) = 2.0;
  b(1, 0) = 3.0;
  b(1, 1) = 4.0;

  Matrix k = dnsgd::kron(Matrix::identity(2), b);
  REQUIRE(k.rows() == 4);
  REQUIRE(k.cols() == 4);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(k(i, j) == b(i, j));
      CHECK(k(2 + i, 2 + j) == b(i, j));
      CHECK(k(i, 2 + j) == 0.0);
      CHECK(k(2 + i, j) == 0.0);
    }

  Matrix s(1, 1);
  s(0, 0) = 2.0;
  Matrix e(2, 2);
  e(0, 0) = 1.0;
  Matrix k2 = dnsgd::kron(s, e);
  CHECK(k2(0, 0) == 2.0);
  CHECK(k2(0, 1) == 0.0);
  CHECK(k2(1, 0) == 0.0);
  CHECK(k2(1, 1) == 0.0);
}

TEST_CASE("kron matches the definition entrywise") {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Matrix a(2, 2), b(2, 2);
  for (auto& e : a.entries()) e = u(rng);
  for (auto& e : b.entries()) e = u(rng);
  Matrix k = dnsgd::kron(a, b);
  REQUIRE(k.rows() == 4);
  for (std::size_t ia = 0; ia < 2; ++ia)
    for (std::size_t ja = 0; ja < 2; ++ja)
      for (std::size_t ib = 0; ib < 2; ++ib)
        for (std::size_t jb = 0; jb < 2; ++jb)
          CHECK(k(ia * 2 + ib, ja * 2 + jb) == a(ia, ja) * b(ib, jb));
}

TEST_CASE("kron of PSD factors is PSD") {
  std::mt19937_64 rng(505);
  for (int rep = 0; rep < 10; ++rep) {
    Matrix a = random_psd(rng, 3);
    Matrix b = random_psd(rng, 2);
    CHECK(dnsgd::min_eigenvalue(dnsgd::kron(a, b)) >= -1e-9);
  }
}

TEST_CASE("max_element is the signed maximum") {
  Matrix a(2, 2);
  a(0, 0) = 2.0;
  a(0, 1) = a(1, 0) = -5.0;
  a(1, 1) = 1.0;
  CHECK(dnsgd::max_element(a) == 2.0);

  Matrix zero(3, 3);
  CHECK(dnsgd::max_element(zero) == 0.0);

  Matrix r1(2, 2);
  r1(0, 0) = 2.0;
  r1(0, 1) = r1(1, 0) = 1.0;
  r1(1, 1) = 0.5;
  CHECK(dnsgd::max_element(r1) == 2.0);

  Matrix empty;
  CHECK_THROWS_AS(dnsgd::max_element(empty), dnsgd::EmptyMatrix);
}

TEST_CASE("max_element of a shifted PSD matrix adds the shift") {
  std::mt19937_64 rng(606);
  Matrix h = random_psd(rng, 5);
  const double s = 0.7;
  Matrix shifted = h;
  for (std::size_t i = 0; i < 5; ++i) shifted(i, i) += s;
  CHECK(dnsgd::max_element(shifted) ==
        Catch::Approx(dnsgd::max_element(h) + s).margin(1e-12));
}
