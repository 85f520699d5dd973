#include "prox/ann_ladder.hpp"

#include "prox/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace prox {

namespace {
constexpr std::uint64_t kLadderTag = 0x6c616464ULL; // rung seed namespace
} // namespace

AnnLadder::AnnLadder(std::shared_ptr<const PointSet> points, double eps)
    : AnnLadder(std::move(points), eps, Config()) {}

AnnLadder::AnnLadder(std::shared_ptr<const PointSet> points, double eps,
                     Config cfg)
    : points_(std::move(points)), eps_(eps), cfg_(cfg) {
  if (!points_ || points_->size() < 2)
    throw std::invalid_argument("AnnLadder needs at least two points");
  if (!(eps_ > 0.0)) throw std::invalid_argument("eps must be positive");
  if (cfg_.hash.s != points_->s())
    throw std::invalid_argument("hash family does not match the point metric");
  if (cfg_.rung_cache == 0) cfg_.rung_cache = 1;

  const auto nn = all_nn_distances(*points_);
  double min_nonzero = 0.0;
  for (double d : nn)
    if (d > 0.0 && (min_nonzero == 0.0 || d < min_nonzero)) min_nonzero = d;
  if (min_nonzero == 0.0)
    throw DegenerateLadder(
        "every point has a zero-distance duplicate; no radius ladder exists");
  const double r_min = 0.5 * min_nonzero; // guard against exact-hit queries

  double far = 0.0;
  for (PointId i = 1; i < points_->size(); ++i)
    far = std::max(far, points_->distance(0, i));
  const double r_max = 2.0 * far; // exceeds the diameter by the triangle
                                  // inequality

  const double steps =
      std::ceil(std::log(r_max / r_min) / std::log1p(eps_));
  const std::size_t J = steps < 1.0 ? 1 : std::size_t(steps);
  radii_.resize(J + 1);
  radii_[0] = r_min;
  for (std::size_t j = 1; j <= J; ++j) radii_[j] = radii_[j - 1] * (1.0 + eps_);

  omega_ = 1.0 + std::log(double(J)) / std::log(double(points_->size()));
  rung_width_ = cfg_.hash.w ? *cfg_.hash.w : kCompositeBucketWidth;
  cache_.set_capacity(cfg_.rung_cache);
}

std::shared_ptr<const PlebIndex> AnnLadder::rung_index(std::size_t j) const {
  if (j >= radii_.size()) throw std::out_of_range("no such ladder rung");
  return cache_.get(j, [&] {
    HashSpec rung_spec = cfg_.hash;
    rung_spec.w = rung_width_;
    rung_spec.seed = combine_seed(combine_seed(cfg_.hash.seed, kLadderTag), j);
    return std::make_shared<const PlebIndex>(points_, radii_[j], eps_,
                                             rung_spec, omega_);
  });
}

AnnLadder::Result AnnLadder::query(std::span<const double> q,
                                   std::optional<PointId> exclude) const {
  if (q.size() != points_->dim())
    throw std::invalid_argument("query dimension mismatch");

  const std::size_t top = radii_.size() - 1;
  std::size_t lo = 0, hi = top, probes = 0;
  bool found = false;
  PlebIndex::Answer best;
  std::size_t best_rung = 0;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    const auto ans = rung_index(mid)->query(q, exclude);
    ++probes;
    if (ans.yes) {
      hi = mid;
      best = ans;
      best_rung = mid;
      found = true;
    } else {
      lo = mid + 1;
    }
  }
  if (!found) { // every probed rung said NO, so lo climbed to the top
    const auto ans = rung_index(lo)->query(q, exclude);
    ++probes;
    if (ans.yes) {
      best = ans;
      best_rung = lo;
      found = true;
    }
  }
  if (!found)
    throw NoNeighborInRange("no point within the top ladder radius");

  Result res;
  res.witness = best.witness;
  res.dist = best.dist;
  res.rung = best_rung < top ? best_rung + 1 : top;
  res.r_hat = radii_[res.rung];
  res.probes = probes;
  return res;
}

PointId AnnLadder::point_query(std::span<const double> q,
                               std::optional<PointId> exclude) const {
  return query(q, exclude).witness;
}

} // namespace prox
