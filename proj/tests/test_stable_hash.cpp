#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "prox/stable_hash.hpp"

#include <cmath>
#include <functional>
#include <vector>

using namespace prox;

namespace {

// Independent numerical oracle for the collision probability: integrate
// (1/l) * f(t/l) * (1 - t/w) over [0, w] with adaptive Simpson, where f is
// the density of the absolute value of the stable distribution.
double abs_stable_density(double x, double s) {
  constexpr double pi = 3.14159265358979323846;
  if (s == 1.0) return 2.0 / (pi * (1.0 + x * x));
  return std::sqrt(2.0 / pi) * std::exp(-0.5 * x * x);
}

double simpson(const std::function<double(double)>& f, double a, double b,
               double fa, double fb, double fm, double whole, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  // force a few splits before trusting the error estimate: rational
  // integrands can make coarse and refined panels agree exactly
  if (depth <= 0 || (depth <= 34 && std::fabs(left + right - whole) < 1e-12))
    return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, fm, flm, left, depth - 1) +
         simpson(f, m, b, fm, fb, frm, right, depth - 1);
}

double phi_quadrature(double l, double s, double w) {
  auto g = [&](double t) {
    return (1.0 / l) * abs_stable_density(t / l, s) * (1.0 - t / w);
  };
  const double fa = g(0.0), fb = g(w), fm = g(0.5 * w);
  const double whole = w / 6.0 * (fa + 4.0 * fm + fb);
  return simpson(g, 0.0, w, fa, fb, fm, whole, 40);
}

} // namespace

TEST_CASE("phi matches frozen high-precision values") {
  CHECK(phi(1.0, 1.0, 1.0) == doctest::Approx(0.2793643998473484).epsilon(1e-13));
  CHECK(phi(2.0, 1.0, 1.0) == doctest::Approx(0.1531096384579206).epsilon(1e-13));
  CHECK(phi(1.0, 1.0, 4.0) == doctest::Approx(0.6185817849750286).epsilon(1e-13));
  CHECK(phi(0.5, 1.0, 1.0) == doctest::Approx(0.4486827653357454).epsilon(1e-13));
  CHECK(phi(1.0, 2.0, 1.0) == doctest::Approx(0.3687463803725072).epsilon(1e-13));
  CHECK(phi(2.0, 2.0, 1.0) == doctest::Approx(0.1954171079994934).epsilon(1e-13));
  CHECK(phi(1.0, 2.0, 4.0) == doctest::Approx(0.8005324324284999).epsilon(1e-13));
  CHECK(phi(0.5, 2.0, 1.0) == doctest::Approx(0.6095484222153970).epsilon(1e-13));
}

TEST_CASE("phi agrees with direct quadrature of the collision integral") {
  for (double s : {1.0, 2.0})
    for (double w : {1.0, 4.0})
      for (double l : {0.25, 0.5, 1.0, 1.5, 2.0, 5.0, 20.0}) {
        const double closed = phi(l, s, w);
        const double integral = phi_quadrature(l, s, w);
        CHECK(std::fabs(closed - integral) < 1e-8);
      }
}

TEST_CASE("phi limits and monotonicity") {
  for (double s : {1.0, 2.0}) {
    CHECK(phi(1e12, s, 1.0) < 1e-9); // far pairs almost never collide
    double prev = 1.0;
    for (double l : {0.1, 0.3, 1.0, 3.0, 10.0, 100.0}) {
      const double v = phi(l, s, 1.0);
      CHECK(v > 0.0);
      CHECK(v < 1.0);
      CHECK(v < prev); // strictly decreasing in distance
      prev = v;
    }
    prev = 0.0;
    for (double w : {0.5, 1.0, 2.0, 4.0, 16.0}) {
      const double v = phi(1.0, s, w);
      CHECK(v > prev); // strictly increasing in width
      prev = v;
    }
  }
}

TEST_CASE("phi rejects invalid input") {
  CHECK_THROWS_AS(phi(0.0, 2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(phi(-1.0, 2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(phi(1.0, 2.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(phi(1.0, 1.5, 1.0), std::invalid_argument);
}

TEST_CASE("normal_cdf endpoints") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(normal_cdf(-1.0) ==
        doctest::Approx(0.15865525393145705).epsilon(1e-13));
  CHECK(normal_cdf(8.0) > 1.0 - 1e-14);
}

TEST_CASE("lifting geometry frozen values") {
  // s = 1, eps = 1
  CHECK(lifted_eps(1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(lifted_radius_ratio(1.0, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(lift_coordinate_ratio(1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  // s = 2, eps = 1
  CHECK(lifted_eps(1.0, 2.0) ==
        doctest::Approx(0.8027756377319946).epsilon(1e-13));
  CHECK(lifted_radius_ratio(1.0, 2.0) ==
        doctest::Approx(1.1547005383792515).epsilon(1e-13));
  CHECK(lift_coordinate_ratio(1.0, 2.0) ==
        doctest::Approx(0.5773502691896258).epsilon(1e-13));
  // s = 1 closed form: eps' = eps^2 / (1 + eps)
  for (double eps : {0.25, 0.5, 2.0})
    CHECK(lifted_eps(eps, 1.0) ==
          doctest::Approx(eps * eps / (1.0 + eps)).epsilon(1e-12));
}

TEST_CASE("derive_params invariant chain") {
  for (double s : {1.0, 2.0})
    for (bool lifted : {false, true})
      for (std::size_t n : {2u, 100u, 10000u})
        for (double eps : {0.1, 0.5, 1.0, 5.0}) {
          HashSpec spec{s, std::nullopt, 42};
          const auto pr = derive_params(n, eps, spec, lifted);
          CHECK(pr.p0 > 0.0);
          CHECK(pr.p2 < 1.0);
          CHECK(pr.p0 >= pr.p1);
          CHECK(pr.p1 > pr.p2);
          CHECK(pr.rho > 0.0);
          CHECK(pr.rho < 1.0);
          CHECK(pr.alpha >= 0.0);
          CHECK(pr.alpha <= pr.rho * (1.0 + 1e-12));
          CHECK(pr.k >= 1);
          CHECK(pr.L >= 1);
          const double w = spec.effective_w(eps);
          CHECK(pr.p1 == phi(1.0, s, w));
          CHECK(pr.k == static_cast<std::size_t>(std::ceil(
                            std::log(double(n)) / std::log(1.0 / pr.p2))));
          CHECK(pr.L == static_cast<std::size_t>(std::ceil(
                            std::pow(double(n), pr.rho) / pr.p1)));
          if (lifted) {
            CHECK(pr.eps_prime < eps);
            CHECK(pr.r_prime_over_r > 1.0);
            CHECK(pr.lift_coord_over_r > 0.0);
          } else {
            CHECK(pr.eps_prime == eps);
            CHECK(pr.r_prime_over_r == 1.0);
            CHECK(pr.lift_coord_over_r == 0.0);
          }
        }
}

TEST_CASE("derive_params frozen exponent") {
  HashSpec spec{2.0, std::nullopt, 1};
  const auto pr = derive_params(1000, 1.0, spec, true);
  CHECK(pr.rho == doctest::Approx(0.6505876894).epsilon(1e-9));
  CHECK(pr.rho <= 1.0 / 1.5); // lifted exponent cap at eps = 1, s = 2
}

TEST_CASE("derive_params default width switches at eps = 1") {
  HashSpec spec;
  CHECK(spec.effective_w(0.5) == 1.0);
  CHECK(spec.effective_w(3.0) == 3.0);
  spec.w = 2.5;
  CHECK(spec.effective_w(0.5) == 2.5);
}

TEST_CASE("sample_hash_vector reproducibility and independence") {
  const auto v1 = sample_hash_vector(2.0, 1.0, 4, 8, 99, 2, 3);
  const auto v2 = sample_hash_vector(2.0, 1.0, 4, 8, 99, 2, 3);
  CHECK(v1.a == v2.a);
  CHECK(v1.b == v2.b);
  const auto v3 = sample_hash_vector(2.0, 1.0, 4, 8, 99, 2, 4);
  CHECK(v1.a != v3.a);
  const auto v4 = sample_hash_vector(2.0, 1.0, 4, 8, 99, 3, 3);
  CHECK(v1.a != v4.a);
  for (double b : v1.b) {
    CHECK(b >= 0.0);
    CHECK(b < 1.0);
  }
  REQUIRE(v1.a.size() == 32);
  REQUIRE(v1.b.size() == 4);
}

TEST_CASE("hash_point key arithmetic") {
  HashVector vec;
  vec.k = 1;
  vec.dim = 1;
  vec.w = 1.0;
  vec.a = {2.0};
  vec.b = {0.25};
  const auto key1 = hash_point(vec, std::vector<double>{0.1}, 1.0);
  REQUIRE(key1.size() == 1);
  CHECK(key1[0] == 0);
  // moving by w / a_0 advances the key by exactly one bucket
  const auto key2 = hash_point(vec, std::vector<double>{0.1 + 0.5}, 1.0);
  CHECK(key2[0] == key1[0] + 1);
  // doubling the scale halves the step needed
  const auto key3 = hash_point(vec, std::vector<double>{0.1 + 0.25}, 2.0);
  CHECK(key3[0] == 1); // floor(2*0.35*2 + 0.25) with w = 1
}

TEST_CASE("fingerprints agree with full keys") {
  const auto vec = sample_hash_vector(2.0, 1.0, 5, 7, 123, 0, 0);
  std::vector<double> p{0.1, -0.4, 2.0, 0.0, 1.3, -2.2, 0.7};
  const auto key = hash_point(vec, p, 0.8);
  CHECK(hash_fingerprint(vec, p, 0.8) == fold_key(key));
  // lifted form: base coordinates plus an appended one
  std::vector<double> base(p.begin(), p.end() - 1);
  CHECK(hash_fingerprint_lifted(vec, base, p.back(), 0.8) == fold_key(key));
}

TEST_CASE("identical points always share a key") {
  const auto vec = sample_hash_vector(1.0, 1.0, 6, 5, 7, 1, 2);
  std::vector<double> p{0.5, -1.0, 3.0, 0.25, -0.75};
  CHECK(hash_point(vec, p, 1.0) == hash_point(vec, p, 1.0));
}

TEST_CASE("empirical collision rate tracks phi") {
  // smoke-scale check; the acceptance suite runs the full-depth version
  const int trials = 20000;
  for (double s : {1.0, 2.0})
    for (double l : {1.0, 2.0}) {
      const double w = 1.0;
      int collisions = 0;
      for (int t = 0; t < trials; ++t) {
        const auto vec = sample_hash_vector(s, w, 1, 4, 1234, 0, t);
        std::vector<double> p{0.3, 0.3, 0.3, 0.3};
        std::vector<double> q{0.3 + l, 0.3, 0.3, 0.3};
        if (hash_point(vec, p, 1.0) == hash_point(vec, q, 1.0)) ++collisions;
      }
      const double expect = phi(l, s, w);
      const double se = std::sqrt(expect * (1.0 - expect) / trials);
      CHECK(std::fabs(double(collisions) / trials - expect) < 4.0 * se);
    }
}
