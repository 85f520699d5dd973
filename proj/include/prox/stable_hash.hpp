#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace prox {

// ---------------------------------------------------------------------------
// Deterministic stream RNG
// ---------------------------------------------------------------------------

/// 64-bit finalizer with full avalanche.
std::uint64_t mix64(std::uint64_t z);

/// Folds v into h; used to derive independent child seeds.
std::uint64_t combine_seed(std::uint64_t h, std::uint64_t v);

/// Counter-style generator: the (seed, purpose, group, table) tuple indexes
/// an independent stream, so rebuilding any substructure reproduces its
/// random choices exactly.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  std::uint64_t next();
  double next_unit();   // [0, 1)
  double next_open();   // (0, 1)
  double next_normal(); // standard normal via Box-Muller
  double next_cauchy(); // standard Cauchy via tan(pi * (u - 1/2))

private:
  std::uint64_t state_;
};

SplitMix64 stream_for(std::uint64_t seed, std::uint64_t purpose,
                      std::uint64_t group, std::uint64_t table);

// ---------------------------------------------------------------------------
// Hash family
// ---------------------------------------------------------------------------

/// Family configuration. s picks the stable distribution (1 = Cauchy,
/// 2 = normal). w is the bucket width; when unset it defaults to
/// max(1, eps) at parameter-derivation time. seed drives every random
/// choice made by structures built from this spec.
/// Default bucket width for the internal substructures of composite
/// indexes (radius ladders and everything built on them). Wider buckets
/// lower the table count per structure, which matters when dozens of
/// structures share memory; standalone indexes default to max(1, eps)
/// instead. Overridden by an explicit HashSpec::w either way.
inline constexpr double kCompositeBucketWidth = 4.0;

struct HashSpec {
  double s = 2.0;
  std::optional<double> w;
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;

  double effective_w(double eps) const {
    return w ? *w : (eps > 1.0 ? eps : 1.0);
  }
};

/// Standard normal CDF, accurate to well under 1e-12 absolute error.
double normal_cdf(double x);

/// Probability that one hash function sends two points at distance l into
/// the same bucket. Closed forms:
///   s = 1: 2*atan(w/l)/pi - ln(1 + (w/l)^2) / (pi * (w/l))
///   s = 2: erf(w/(l*sqrt(2))) - (2/(sqrt(2*pi)*(w/l))) * (1 - e^(-w^2/(2l^2)))
/// Strictly decreasing in l, strictly increasing in w, value in (0, 1).
/// Throws std::invalid_argument on l <= 0, w <= 0, or s not in {1, 2}.
double phi(double l, double s, double w);

// ---------------------------------------------------------------------------
// Lifting geometry
// ---------------------------------------------------------------------------
// Appending a zero coordinate to every data point and a fixed positive
// coordinate to the query gives every pair a positive floor distance while
// preserving distance order. With t = (1+eps)^s:
//   query coordinate   = r * (t - 1)^(-1/s)
//   effective radius   = r * (1 + 1/(t - 1))^(1/s)
//   effective epsilon  = (t + 1/t - 1)^(1/s) - 1

double lifted_eps(double eps, double s);
double lifted_radius_ratio(double eps, double s);
double lift_coordinate_ratio(double eps, double s);

// ---------------------------------------------------------------------------
// Derived parameters
// ---------------------------------------------------------------------------

struct LshParams {
  double p0;            // collision probability at the lifted floor distance
  double p1;            // collision probability at distance 1 (scaled radius)
  double p2;            // collision probability at distance 1 + eps_prime
  std::size_t k;        // concatenation length, ceil(ln n / ln(1/p2))
  std::size_t L;        // table count, ceil(n^rho / p1)
  double rho;           // ln(p1) / ln(p2)
  double alpha;         // rho * (1 - ln(p0)/ln(p1)), only meaningful lifted
  double eps;
  double eps_prime;     // equals eps when not lifted
  double r_prime_over_r;     // 1 when not lifted
  double lift_coord_over_r;  // 0 when not lifted
};

/// Computes the full parameter block for a structure over n points at
/// approximation factor eps. With lifted = true the p2 exponent gap comes
/// from the lifted effective epsilon; otherwise the plain 1 + eps is used.
LshParams derive_params(std::size_t n, double eps, const HashSpec& spec,
                        bool lifted);

// ---------------------------------------------------------------------------
// Hash vectors
// ---------------------------------------------------------------------------

/// One concatenated hash function g = (f_1, ..., f_k). Row i holds the
/// projection direction a_i (dim entries, iid s-stable) and offset
/// b_i uniform in [0, w).
struct HashVector {
  std::size_t k = 0;
  std::size_t dim = 0;
  double w = 1.0;
  std::vector<double> a; // k * dim, row-major
  std::vector<double> b; // k

  std::span<const double> row(std::size_t i) const {
    return {a.data() + i * dim, dim};
  }
};

/// Draws the hash vector for one (group, table) slot. Reproducible: equal
/// arguments give equal vectors, distinct slots give independent streams.
HashVector sample_hash_vector(double s, double w, std::size_t k,
                              std::size_t dim, std::uint64_t seed,
                              std::uint64_t group, std::uint64_t table);

/// Integer key of a point under g: key_i = floor((scale*p . a_i + b_i)/w).
/// p.size() must equal vec.dim.
std::vector<std::int64_t> hash_point(const HashVector& vec,
                                     std::span<const double> p, double scale);

/// 32-bit fingerprint of the full integer key. Two points share a bucket
/// iff their keys agree; the fingerprint folds the key for compact tables
/// and collides with probability ~2^-32, which the distance filters absorb.
std::uint32_t hash_fingerprint(const HashVector& vec, std::span<const double> p,
                               double scale);

/// Same, with one extra coordinate appended to p (the lifted query
/// coordinate, in pre-scale units). p.size() + 1 must equal vec.dim.
std::uint32_t hash_fingerprint_lifted(const HashVector& vec,
                                      std::span<const double> p, double extra,
                                      double scale);

std::uint32_t fold_key(std::span<const std::int64_t> key);

} // namespace prox
