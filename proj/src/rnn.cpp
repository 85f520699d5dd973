#include "prox/rnn.hpp"

#include "prox/exact_nn.hpp"
#include "prox/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace prox {

namespace {

constexpr std::uint64_t kBucketTag = 0x62636b74ULL; // bucket reporter seeds

bool coords_equal(std::span<const double> a, std::span<const double> b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

/// Geometric bucket of a positive value: the unique i with
/// (1+eps)^(i-1) <= d < (1+eps)^i, rounding fixed up by direct comparison.
std::int64_t bucket_of(double d, double eps) {
  const double x = std::log(d) / std::log1p(eps);
  auto i = std::int64_t(std::floor(x)) + 1;
  while (std::pow(1.0 + eps, double(i - 1)) > d) --i;
  while (std::pow(1.0 + eps, double(i)) <= d) ++i;
  return i;
}

/// nn_dist through the indexed nearest-neighbor path. Falls back to the
/// scan per point when the index cannot be built (too few or fully
/// duplicated sites) or declined to answer.
std::vector<double> indexed_nn(const std::shared_ptr<const PointSet>& cand,
                               const std::shared_ptr<const PointSet>& sites,
                               bool exclude_self, double eps,
                               const HashSpec& hash) {
  std::unique_ptr<ExactNnIndex> idx;
  try {
    ExactNnIndex::Config ec;
    ec.hash = hash;
    idx = std::make_unique<ExactNnIndex>(sites, eps, ec);
  } catch (const std::exception&) {
    idx = nullptr;
  }
  std::vector<double> out(cand->size());
  for (PointId p = 0; p < cand->size(); ++p) {
    const auto row = (*cand)[p];
    const auto excl =
        exclude_self ? std::optional<PointId>(p) : std::nullopt;
    if (idx) {
      const auto res = idx->query(row, excl);
      if (!res.fallback) {
        out[p] = res.dist;
        continue;
      }
    }
    double best = std::numeric_limits<double>::infinity();
    for (PointId y = 0; y < sites->size(); ++y) {
      if (exclude_self && y == p) continue;
      best = std::min(best, sites->distance_to(y, row));
    }
    out[p] = best;
  }
  return out;
}

} // namespace

RnnIndex::RnnIndex(std::shared_ptr<const PointSet> points, double eps)
    : RnnIndex(std::move(points), eps, Config()) {}

RnnIndex::RnnIndex(std::shared_ptr<const PointSet> points, double eps,
                   Config cfg)
    : points_(std::move(points)), sites_(points_), bichromatic_(false),
      eps_(eps) {
  if (!points_ || points_->size() < 2)
    throw std::invalid_argument("RnnIndex needs at least two points");
  build(std::move(cfg));
}

RnnIndex::RnnIndex(std::shared_ptr<const PointSet> blue,
                   std::shared_ptr<const PointSet> yellow, double eps)
    : RnnIndex(std::move(blue), std::move(yellow), eps, Config()) {}

RnnIndex::RnnIndex(std::shared_ptr<const PointSet> blue,
                   std::shared_ptr<const PointSet> yellow, double eps,
                   Config cfg)
    : points_(std::move(blue)), sites_(std::move(yellow)),
      bichromatic_(true), eps_(eps) {
  if (!points_ || !sites_ || sites_->empty())
    throw std::invalid_argument("RnnIndex needs at least one site");
  if (points_->dim() != sites_->dim() || points_->s() != sites_->s())
    throw std::invalid_argument("blue and yellow sets do not match");
  build(std::move(cfg));
}

RnnIndex::RnnIndex(RestoreTag, std::shared_ptr<const PointSet> points,
                   std::shared_ptr<const PointSet> sites, bool bichromatic,
                   double eps, Config cfg, Restored data)
    : points_(std::move(points)), sites_(std::move(sites)),
      bichromatic_(bichromatic), eps_(eps), cfg_(std::move(cfg)) {
  validate_config();
  if (data.nn_dists.size() != points_->size() ||
      data.reverse.size() != sites_->size())
    throw std::invalid_argument("snapshot does not match the point sets");
  const auto id_ok = [&](PointId p) { return p < points_->size(); };
  for (const PointId p : data.zero_bucket)
    if (!id_ok(p)) throw std::invalid_argument("snapshot id out of range");
  for (const auto& [index, members] : data.buckets) {
    if (members.empty())
      throw std::invalid_argument("snapshot holds an empty bucket");
    for (const PointId p : members)
      if (!id_ok(p)) throw std::invalid_argument("snapshot id out of range");
  }
  for (const auto& arr : data.reverse)
    for (const auto& [key, p] : arr)
      if (!id_ok(p)) throw std::invalid_argument("snapshot id out of range");
  nn_dist_ = std::move(data.nn_dists);
  zero_bucket_ = std::move(data.zero_bucket);
  buckets_ = std::move(data.buckets);
  reverse_ = std::move(data.reverse);
  finish();
}

std::shared_ptr<RnnIndex> RnnIndex::restore(
    std::shared_ptr<const PointSet> points, double eps, Config cfg,
    Restored data) {
  if (!points || points->size() < 2)
    throw std::invalid_argument("RnnIndex needs at least two points");
  auto sites = points;
  return std::shared_ptr<RnnIndex>(
      new RnnIndex(RestoreTag{}, std::move(points), std::move(sites), false,
                   eps, std::move(cfg), std::move(data)));
}

std::shared_ptr<RnnIndex> RnnIndex::restore(
    std::shared_ptr<const PointSet> blue,
    std::shared_ptr<const PointSet> yellow, double eps, Config cfg,
    Restored data) {
  if (!blue || !yellow || yellow->empty())
    throw std::invalid_argument("RnnIndex needs at least one site");
  if (blue->dim() != yellow->dim() || blue->s() != yellow->s())
    throw std::invalid_argument("blue and yellow sets do not match");
  return std::shared_ptr<RnnIndex>(
      new RnnIndex(RestoreTag{}, std::move(blue), std::move(yellow), true,
                   eps, std::move(cfg), std::move(data)));
}

void RnnIndex::validate_config() const {
  if (!(eps_ > 0.0)) throw std::invalid_argument("eps must be positive");
  if (cfg_.hash.s != sites_->s())
    throw std::invalid_argument("hash family does not match the point metric");
}

void RnnIndex::build(Config cfg) {
  cfg_ = std::move(cfg);
  validate_config();

  const std::size_t n = points_->size();

  // nn_dist per candidate
  if (n > 0) {
    if (cfg_.indexed_build)
      nn_dist_ = indexed_nn(points_, sites_, !bichromatic_, eps_, cfg_.hash);
    else
      nn_dist_ = bichromatic_ ? cross_nn_distances(*points_, *sites_)
                              : all_nn_distances(*points_);
  }

  // geometric buckets, plus the zero bucket for coordinate duplicates
  for (PointId p = 0; p < n; ++p) {
    if (nn_dist_[p] == 0.0)
      zero_bucket_.push_back(p);
    else
      buckets_[bucket_of(nn_dist_[p], eps_)].push_back(p);
  }

  // reverse array per site: candidates p with d(p, y) <= (1+eps) nn_dist(p)
  std::vector<double> site_self; // bichromatic twin key: d to other sites
  if (bichromatic_) {
    site_self.assign(sites_->size(),
                     std::numeric_limits<double>::infinity());
    for (PointId y = 0; y < sites_->size(); ++y)
      for (PointId y2 = 0; y2 < sites_->size(); ++y2)
        if (y2 != y)
          site_self[y] = std::min(site_self[y], sites_->distance(y, y2));
  }
  reverse_.resize(sites_->size());
  for (PointId y = 0; y < sites_->size(); ++y) {
    auto& arr = reverse_[y];
    const auto site = (*sites_)[y];
    for (PointId p = 0; p < n; ++p) {
      const double d = points_->distance_to(p, site);
      if (d <= (1.0 + eps_) * nn_dist_[p]) {
        const bool twin =
            bichromatic_ && d == 0.0 && coords_equal((*points_)[p], site);
        arr.emplace_back(twin ? site_self[y] : nn_dist_[p], p);
      }
    }
    std::sort(arr.begin(), arr.end());
  }

  finish();
}

void RnnIndex::finish() {
  for (const auto& [index, members] : buckets_) {
    const std::size_t pos = bucket_key_.size();
    bucket_pos_.emplace(index, pos);
    bucket_key_.push_back(index);
    bucket_radius_.push_back(std::pow(1.0 + eps_, double(index)));
    auto local = std::make_shared<PointSet>(points_->dim(), points_->s());
    for (const PointId p : members) local->add((*points_)[p]);
    bucket_points_.push_back(std::move(local));
    bucket_ids_.push_back(members);
  }

  // approximate-nearest-site ladder; a single site or a fully duplicated
  // site set falls back to the linear scan
  if (sites_->size() >= 2) {
    try {
      AnnLadder::Config lc;
      lc.hash = cfg_.hash;
      lc.rung_cache = cfg_.rung_cache;
      ladder_ = std::make_unique<AnnLadder>(sites_, eps_ / 3.0, lc);
    } catch (const DegenerateLadder&) {
      ladder_ = nullptr;
    }
  }

  bucket_cache_.set_capacity(cfg_.bucket_cache);
}

std::shared_ptr<const ExhaustiveIndex>
RnnIndex::bucket_index(std::size_t pos) const {
  if (pos >= bucket_key_.size()) throw std::out_of_range("no such bucket");
  return bucket_cache_.get(pos, [&] {
    ExhaustiveIndex::Config rc;
    rc.r = bucket_radius_[pos];
    rc.eps = eps_;
    rc.hash = cfg_.hash;
    rc.hash.w = cfg_.hash.w ? *cfg_.hash.w : kCompositeBucketWidth;
    rc.hash.seed =
        combine_seed(combine_seed(cfg_.hash.seed, kBucketTag), pos);
    rc.lifted = true;
    // repetitions follow the global candidate count, so a union bound over
    // every bucket a query probes still leaves the whole answer intact
    rc.m = points_->size();
    return std::make_shared<const ExhaustiveIndex>(bucket_points_[pos], rc);
  });
}

RnnIndex::Report RnnIndex::query(std::span<const double> q) const {
  if (q.size() != sites_->dim())
    throw std::invalid_argument("query dimension mismatch");

  Report rep;

  // approximate nearest site
  if (!ladder_) {
    rep.site_by_scan = true;
    rep.site_dist = std::numeric_limits<double>::infinity();
    for (PointId y = 0; y < sites_->size(); ++y) {
      const double d = sites_->distance_to(y, q);
      if (d < rep.site_dist) {
        rep.site = y;
        rep.site_dist = d;
      }
    }
  } else {
    try {
      const auto ann = ladder_->query(q);
      rep.site = ann.witness;
      rep.site_dist = ann.dist;
    } catch (const NoNeighborInRange&) {
      // no site anywhere near q: nothing can prefer q to its own
      // neighborhood, so the empty answer stands
      rep.in_range = false;
      return rep;
    }
  }

  std::vector<PointId> cand;

  // coordinate duplicates qualify only when q lands exactly on them
  for (const PointId p : zero_bucket_)
    if (coords_equal((*points_)[p], q)) cand.push_back(p);

  const auto& arr = reverse_[rep.site];
  const double d_qy = rep.site_dist;
  if (d_qy == 0.0) {
    // q coincides with the site: every answer satisfies
    // d(p, y) <= d(p, q) + 0 <= (1+eps) nn_dist(p), so the whole reverse
    // array covers it and no bucket needs probing
    rep.tail_size = arr.size();
    for (const auto& [key, p] : arr) cand.push_back(p);
  } else {
    // bucket window around d(q, y). The floor rests on nn_dist(p) >=
    // d(q,y) / (1+eps) for every answer p; bichromatic answers only
    // guarantee half that (d(q,Y) <= d(q,b) + d(b,Y) <= 2 nn_dist(b)), so
    // the floor drops by another factor of two there.
    const double lam = std::log1p(eps_);
    const double divisor =
        bichromatic_ ? 2.0 * (1.0 + eps_) : (1.0 + eps_);
    const auto lo = std::int64_t(std::floor(std::log(d_qy / divisor) / lam)) + 1;
    const auto hi = std::int64_t(std::ceil(std::log(d_qy / eps_) / lam));
    for (std::int64_t i = lo; i <= hi; ++i) {
      const auto it = bucket_pos_.find(i);
      if (it == bucket_pos_.end()) continue;
      ++rep.buckets_probed;
      const auto idx = bucket_index(it->second);
      const auto local = idx->query(q);
      for (const PointId lp : local.points)
        cand.push_back(bucket_ids_[it->second][lp]);
    }

    // answers above the window have nn_dist >= d(q,y)/eps and live in the
    // reverse array suffix
    const double cut = d_qy / eps_;
    auto it = std::lower_bound(
        arr.begin(), arr.end(), cut,
        [](const std::pair<double, PointId>& e, double v) {
          return e.first < v;
        });
    rep.tail_size = std::size_t(arr.end() - it);
    for (; it != arr.end(); ++it) cand.push_back(it->second);
  }

  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  rep.candidates = std::move(cand);

  for (const PointId p : rep.candidates)
    if (points_->distance_to(p, q) <= nn_dist_[p]) rep.result.push_back(p);
  return rep;
}

std::span<const std::pair<double, PointId>>
RnnIndex::reverse_array(PointId y) const {
  if (y >= reverse_.size()) throw std::out_of_range("no such site");
  return reverse_[y];
}

std::size_t RnnIndex::bucket_probe_bound() const {
  const double lam = std::log1p(eps_);
  std::size_t bound =
      std::size_t(std::ceil(std::log((1.0 + eps_) / eps_) / lam)) + 2;
  if (bichromatic_)
    bound += std::size_t(std::ceil(std::log(2.0) / lam));
  return bound;
}

} // namespace prox
