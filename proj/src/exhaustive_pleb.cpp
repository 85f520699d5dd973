#include "prox/exhaustive_pleb.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace prox {

void ExhaustiveIndex::validate_and_derive() {
  if (!points_ || points_->empty())
    throw std::invalid_argument("ExhaustiveIndex needs a nonempty point set");
  if (!(cfg_.r > 0.0)) throw std::invalid_argument("radius must be positive");
  if (!(cfg_.eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (!(cfg_.c * std::log(2.5) > 1.0))
    throw std::invalid_argument(
        "repetition rate too small for the per-query success bound");
  if (cfg_.hash.s != points_->s())
    throw std::invalid_argument("hash family does not match the point metric");

  const std::size_t n = points_->size();
  if (cfg_.m == 0) cfg_.m = n;
  if (cfg_.m < n)
    throw std::invalid_argument("m must be at least the point count");
  params_ = derive_params(n, cfg_.eps, cfg_.hash, cfg_.lifted);
  scale_ = 1.0 / (cfg_.r * params_.r_prime_over_r);
  lift_coord_ = cfg_.r * params_.lift_coord_over_r;
}

ExhaustiveIndex::ExhaustiveIndex(std::shared_ptr<const PointSet> points,
                                 const Config& cfg)
    : points_(std::move(points)), cfg_(cfg) {
  validate_and_derive();
  const double g = std::ceil(cfg_.c * std::log(double(cfg_.m)));
  const std::size_t groups = g < 1.0 ? 1 : std::size_t(g);
  const double w = cfg_.hash.effective_w(cfg_.eps);
  // data points carry an appended zero; the query carries the offset
  set_ = detail::build_table_set(
      *points_, cfg_.lifted ? std::optional<double>(0.0) : std::nullopt,
      scale_, cfg_.hash, w, params_.k, params_.L, groups);
}

ExhaustiveIndex::ExhaustiveIndex(RestoreTag,
                                 std::shared_ptr<const PointSet> points,
                                 const Config& cfg,
                                 std::vector<detail::FingerprintTable> tables)
    : points_(std::move(points)), cfg_(cfg) {
  validate_and_derive();
  const double g = std::ceil(cfg_.c * std::log(double(cfg_.m)));
  const std::size_t groups = g < 1.0 ? 1 : std::size_t(g);
  const double w = cfg_.hash.effective_w(cfg_.eps);
  set_ = detail::restore_table_set(points_->dim() + (cfg_.lifted ? 1 : 0),
                                   cfg_.hash, w, params_.k, params_.L, groups,
                                   std::move(tables));
}

std::shared_ptr<ExhaustiveIndex>
ExhaustiveIndex::restore(std::shared_ptr<const PointSet> points,
                         const Config& cfg,
                         std::vector<detail::FingerprintTable> tables) {
  return std::shared_ptr<ExhaustiveIndex>(
      new ExhaustiveIndex(RestoreTag{}, std::move(points), cfg,
                          std::move(tables)));
}

ExhaustiveIndex::Report ExhaustiveIndex::query(std::span<const double> q,
                                               std::optional<PointId> exclude) const {
  if (q.size() != points_->dim())
    throw std::invalid_argument("query dimension mismatch");

  Report rep;
  const double accept = cfg_.r * (1.0 + cfg_.eps);
  // distance cache: each candidate's exact distance is computed once per
  // query no matter how many tables it collides in
  std::vector<double> dist(points_->size(), -1.0);
  for (std::size_t g = 0; g < set_.groups; ++g)
    for (std::size_t t = 0; t < set_.per_group; ++t) {
      const auto& vec = set_.vec(g, t);
      const auto fp = cfg_.lifted
                          ? hash_fingerprint_lifted(vec, q, lift_coord_, scale_)
                          : hash_fingerprint(vec, q, scale_);
      ++rep.tables_probed;
      set_.table(g, t).for_each(fp, [&](PointId id) {
        if (exclude && id == *exclude) return;
        double d = dist[id];
        if (d < 0.0) {
          d = points_->distance_to(id, q);
          dist[id] = d;
          ++rep.distance_evals;
          if (d <= cfg_.r) rep.points.push_back(id);
        }
        // classify by the original distance; the lifted boundary at
        // r'(1+eps') maps to exactly r(1+eps) here
        if (d <= accept)
          ++rep.collisions_inside;
        else
          ++rep.collisions_outside;
      });
    }
  std::sort(rep.points.begin(), rep.points.end());
  return rep;
}

} // namespace prox
