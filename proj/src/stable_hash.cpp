#include "prox/stable_hash.hpp"

#include <cmath>
#include <stdexcept>

namespace prox {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kSqrt2Pi = 2.50662827463100050242;

void check_family_s(double s) {
  if (s != 1.0 && s != 2.0)
    throw std::invalid_argument("hash family supports s = 1 or s = 2 only");
}

/// floor() with the result clamped into i64 range; projections of extreme
/// Cauchy draws can leave the representable window and only need to stay
/// deterministic, not exact.
std::int64_t floor_to_i64(double x) {
  constexpr double kLim = 4.0e18;
  if (x > kLim) return static_cast<std::int64_t>(kLim);
  if (x < -kLim) return -static_cast<std::int64_t>(kLim);
  return static_cast<std::int64_t>(std::floor(x));
}

} // namespace

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t combine_seed(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix64::next_unit() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double SplitMix64::next_open() {
  return (static_cast<double>(next() >> 12) + 0.5) * 0x1.0p-52;
}

double SplitMix64::next_normal() {
  // Box-Muller; u1 in (0, 1] keeps the log finite
  const double u1 = 1.0 - next_unit();
  const double u2 = next_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

double SplitMix64::next_cauchy() { return std::tan(kPi * (next_open() - 0.5)); }

SplitMix64 stream_for(std::uint64_t seed, std::uint64_t purpose,
                      std::uint64_t group, std::uint64_t table) {
  std::uint64_t h = combine_seed(seed, purpose);
  h = combine_seed(h, group);
  h = combine_seed(h, table);
  return SplitMix64(h);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double phi(double l, double s, double w) {
  check_family_s(s);
  if (!(l > 0.0)) throw std::invalid_argument("phi: l must be > 0");
  if (!(w > 0.0)) throw std::invalid_argument("phi: w must be > 0");
  const double u = w / l;
  if (s == 1.0)
    return 2.0 * std::atan(u) / kPi - std::log1p(u * u) / (kPi * u);
  // erf form avoids cancellation for small u; expm1 keeps the tail exact
  return std::erf(u / kSqrt2) -
         (2.0 / (kSqrt2Pi * u)) * (-std::expm1(-0.5 * u * u));
}

double lifted_eps(double eps, double s) {
  const double t = std::pow(1.0 + eps, s);
  return std::pow(t + 1.0 / t - 1.0, 1.0 / s) - 1.0;
}

double lifted_radius_ratio(double eps, double s) {
  const double t = std::pow(1.0 + eps, s);
  return std::pow(1.0 + 1.0 / (t - 1.0), 1.0 / s);
}

double lift_coordinate_ratio(double eps, double s) {
  const double t = std::pow(1.0 + eps, s);
  return std::pow(t - 1.0, -1.0 / s);
}

LshParams derive_params(std::size_t n, double eps, const HashSpec& spec,
                        bool lifted) {
  check_family_s(spec.s);
  if (n < 1) throw std::invalid_argument("derive_params: n must be >= 1");
  if (!(eps > 0.0)) throw std::invalid_argument("derive_params: eps must be > 0");
  const double w = spec.effective_w(eps);
  if (!(w > 0.0)) throw std::invalid_argument("derive_params: w must be > 0");

  LshParams pr{};
  pr.eps = eps;
  if (lifted) {
    pr.eps_prime = lifted_eps(eps, spec.s);
    pr.r_prime_over_r = lifted_radius_ratio(eps, spec.s);
    pr.lift_coord_over_r = lift_coordinate_ratio(eps, spec.s);
  } else {
    pr.eps_prime = eps;
    pr.r_prime_over_r = 1.0;
    pr.lift_coord_over_r = 0.0;
  }
  pr.p0 = phi(1.0 / (1.0 + eps), spec.s, w);
  pr.p1 = phi(1.0, spec.s, w);
  pr.p2 = phi(1.0 + pr.eps_prime, spec.s, w);
  pr.rho = std::log(pr.p1) / std::log(pr.p2);
  pr.alpha = pr.rho * (1.0 - std::log(pr.p0) / std::log(pr.p1));

  const double ln_n = std::log(static_cast<double>(n));
  const double k_real = ln_n / std::log(1.0 / pr.p2);
  pr.k = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(k_real)));
  const double l_real = std::ceil(std::pow(static_cast<double>(n), pr.rho) / pr.p1);
  if (l_real > 1.0e9)
    throw std::invalid_argument("derive_params: table count blows past 1e9");
  pr.L = std::max<std::size_t>(1, static_cast<std::size_t>(l_real));
  return pr;
}

HashVector sample_hash_vector(double s, double w, std::size_t k,
                              std::size_t dim, std::uint64_t seed,
                              std::uint64_t group, std::uint64_t table) {
  check_family_s(s);
  if (!(w > 0.0)) throw std::invalid_argument("sample_hash_vector: w <= 0");
  if (k == 0 || dim == 0)
    throw std::invalid_argument("sample_hash_vector: k and dim must be > 0");
  SplitMix64 rng = stream_for(seed, /*purpose=*/0x68617368ULL, group, table);
  HashVector vec;
  vec.k = k;
  vec.dim = dim;
  vec.w = w;
  vec.a.resize(k * dim);
  vec.b.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    double* row = vec.a.data() + i * dim;
    if (s == 1.0)
      for (std::size_t j = 0; j < dim; ++j) row[j] = rng.next_cauchy();
    else
      for (std::size_t j = 0; j < dim; ++j) row[j] = rng.next_normal();
    vec.b[i] = rng.next_unit() * w;
  }
  return vec;
}

std::vector<std::int64_t> hash_point(const HashVector& vec,
                                     std::span<const double> p, double scale) {
  if (p.size() != vec.dim)
    throw std::invalid_argument("hash_point: dimension mismatch");
  std::vector<std::int64_t> key(vec.k);
  for (std::size_t i = 0; i < vec.k; ++i) {
    const double* row = vec.a.data() + i * vec.dim;
    double dot = 0.0;
    for (std::size_t j = 0; j < vec.dim; ++j) dot += row[j] * p[j];
    key[i] = floor_to_i64((scale * dot + vec.b[i]) / vec.w);
  }
  return key;
}

std::uint32_t fold_key(std::span<const std::int64_t> key) {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (const std::int64_t v : key)
    h = combine_seed(h, static_cast<std::uint64_t>(v));
  return static_cast<std::uint32_t>(h >> 32) ^ static_cast<std::uint32_t>(h);
}

namespace {

std::uint32_t fingerprint_impl(const HashVector& vec, std::span<const double> p,
                               const double* extra, double scale) {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  const std::size_t base = p.size();
  for (std::size_t i = 0; i < vec.k; ++i) {
    const double* row = vec.a.data() + i * vec.dim;
    double dot = 0.0;
    for (std::size_t j = 0; j < base; ++j) dot += row[j] * p[j];
    if (extra) dot += row[base] * *extra;
    const std::int64_t key = floor_to_i64((scale * dot + vec.b[i]) / vec.w);
    h = combine_seed(h, static_cast<std::uint64_t>(key));
  }
  return static_cast<std::uint32_t>(h >> 32) ^ static_cast<std::uint32_t>(h);
}

} // namespace

std::uint32_t hash_fingerprint(const HashVector& vec, std::span<const double> p,
                               double scale) {
  if (p.size() != vec.dim)
    throw std::invalid_argument("hash_fingerprint: dimension mismatch");
  return fingerprint_impl(vec, p, nullptr, scale);
}

std::uint32_t hash_fingerprint_lifted(const HashVector& vec,
                                      std::span<const double> p, double extra,
                                      double scale) {
  if (p.size() + 1 != vec.dim)
    throw std::invalid_argument("hash_fingerprint_lifted: dimension mismatch");
  return fingerprint_impl(vec, p, &extra, scale);
}

} // namespace prox
