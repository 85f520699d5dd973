#include "prox/exact_nn.hpp"

#include <stdexcept>

namespace prox {

namespace {
constexpr std::uint64_t kRangeTag = 0x65786e6eULL; // range-reporter seeds

AnnLadder::Config ladder_config(const ExactNnIndex::Config& cfg) {
  AnnLadder::Config lc;
  lc.hash = cfg.hash;
  lc.rung_cache = cfg.rung_cache;
  return lc;
}
} // namespace

ExactNnIndex::ExactNnIndex(std::shared_ptr<const PointSet> points, double eps)
    : ExactNnIndex(std::move(points), eps, Config()) {}

ExactNnIndex::ExactNnIndex(std::shared_ptr<const PointSet> points, double eps,
                           Config cfg)
    : points_(std::move(points)), eps_(eps), cfg_(cfg),
      ladder_(points_, eps / 3.0, ladder_config(cfg)) {
  // ladder construction has already validated points_, eps and the family
  ranges_.set_capacity(cfg_.range_cache);
}

std::shared_ptr<const ExhaustiveIndex>
ExactNnIndex::range_index(std::size_t j) const {
  const auto& radii = ladder_.radii();
  if (j >= radii.size()) throw std::out_of_range("no such ladder rung");
  return ranges_.get(j, [&] {
    ExhaustiveIndex::Config rc;
    rc.r = radii[j];
    rc.eps = eps_;
    rc.hash = cfg_.hash;
    rc.hash.w = ladder_.rung_width(); // one width across the composite
    rc.hash.seed =
        combine_seed(combine_seed(cfg_.hash.seed, kRangeTag), j);
    rc.lifted = cfg_.lifted;
    return std::make_shared<const ExhaustiveIndex>(points_, rc);
  });
}

ExactNnIndex::Result ExactNnIndex::query(std::span<const double> q,
                                         std::optional<PointId> exclude) const {
  if (q.size() != points_->dim())
    throw std::invalid_argument("query dimension mismatch");

  Result res;
  bool have_witness = false;
  PointId witness = 0;
  double witness_dist = 0.0;
  try {
    const auto ann = ladder_.query(q, exclude);
    have_witness = true;
    witness = ann.witness;
    witness_dist = ann.dist;
    res.r_hat = ann.r_hat;
    res.rung = ann.rung;

    const auto rep = range_index(ann.rung)->query(q, exclude);
    res.candidates = rep.points.size();
    res.distance_evals = rep.distance_evals;
    bool first = true;
    for (const PointId id : rep.points) { // ascending ids: ties keep lowest
      const double d = points_->distance_to(id, q);
      if (first || d < res.dist) {
        res.nearest = id;
        res.dist = d;
        first = false;
      }
    }
    if (!first) {
      // count how many points sit within the squared-slack radius of the
      // reported distance
      const double within = (1.0 + eps_) * (1.0 + eps_) * res.dist;
      for (PointId i = 0; i < points_->size(); ++i) {
        if (exclude && i == *exclude) continue;
        if (points_->distance_to(i, q) <= within) ++res.condition;
      }
      return res;
    }
  } catch (const NoNeighborInRange&) {
    // fall through to the arbitrary-point answer
  }

  res.fallback = true;
  PointId any = 0;
  if (exclude && *exclude == 0 && points_->size() > 1) any = 1;
  res.nearest = have_witness ? witness : any;
  res.dist = have_witness ? witness_dist : points_->distance_to(any, q);
  const double within = (1.0 + eps_) * (1.0 + eps_) * res.dist;
  for (PointId i = 0; i < points_->size(); ++i) {
    if (exclude && i == *exclude) continue;
    if (points_->distance_to(i, q) <= within) ++res.condition;
  }
  return res;
}

PointId ExactNnIndex::point_query(std::span<const double> q,
                                  std::optional<PointId> exclude) const {
  return query(q, exclude).nearest;
}

} // namespace prox
