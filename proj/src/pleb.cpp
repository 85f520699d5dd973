#include "prox/pleb.hpp"

#include <cmath>
#include <stdexcept>

namespace prox {

namespace {

std::size_t group_count(std::size_t n, double factor) {
  const double g = std::ceil(factor * std::log(double(n)));
  return g < 1.0 ? 1 : std::size_t(g);
}

} // namespace

PlebIndex::PlebIndex(std::shared_ptr<const PointSet> points, double r,
                     double eps, HashSpec spec, double omega)
    : points_(std::move(points)), r_(r), eps_(eps), omega_(omega),
      spec_(spec) {
  if (!points_ || points_->empty())
    throw std::invalid_argument("PlebIndex needs a nonempty point set");
  if (!(r > 0.0)) throw std::invalid_argument("radius must be positive");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (!(omega > 0.0)) throw std::invalid_argument("omega must be positive");
  if (spec_.s != points_->s())
    throw std::invalid_argument("hash family does not match the point metric");

  const std::size_t n = points_->size();
  params_ = derive_params(n, eps_, spec_, /*lifted=*/false);
  scale_ = 1.0 / r_;
  const double w = spec_.effective_w(eps_);
  set_ = detail::build_table_set(*points_, std::nullopt, scale_, spec_, w,
                                 params_.k, params_.L, group_count(n, omega_));
}

PlebIndex::PlebIndex(RestoreTag, std::shared_ptr<const PointSet> points,
                     double r, double eps, HashSpec spec, double omega,
                     std::vector<detail::FingerprintTable> tables)
    : points_(std::move(points)), r_(r), eps_(eps), omega_(omega),
      spec_(spec) {
  if (!points_ || points_->empty())
    throw std::invalid_argument("PlebIndex needs a nonempty point set");
  if (!(r > 0.0)) throw std::invalid_argument("radius must be positive");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (!(omega > 0.0)) throw std::invalid_argument("omega must be positive");
  if (spec_.s != points_->s())
    throw std::invalid_argument("hash family does not match the point metric");

  const std::size_t n = points_->size();
  params_ = derive_params(n, eps_, spec_, /*lifted=*/false);
  scale_ = 1.0 / r_;
  const double w = spec_.effective_w(eps_);
  set_ = detail::restore_table_set(points_->dim(), spec_, w, params_.k,
                                   params_.L, group_count(n, omega_),
                                   std::move(tables));
}

std::shared_ptr<PlebIndex>
PlebIndex::restore(std::shared_ptr<const PointSet> points, double r,
                   double eps, HashSpec spec, double omega,
                   std::vector<detail::FingerprintTable> tables) {
  return std::shared_ptr<PlebIndex>(new PlebIndex(
      RestoreTag{}, std::move(points), r, eps, spec, omega, std::move(tables)));
}

PlebIndex::Answer PlebIndex::query(std::span<const double> q,
                                   std::optional<PointId> exclude) const {
  if (q.size() != points_->dim())
    throw std::invalid_argument("query dimension mismatch");

  Answer ans;
  const double accept = r_ * (1.0 + eps_);
  const std::size_t budget = 3 * set_.per_group;
  for (std::size_t g = 0; g < set_.groups; ++g) {
    std::size_t seen = 0;
    for (std::size_t t = 0; t < set_.per_group && seen < budget; ++t) {
      const auto fp = hash_fingerprint(set_.vec(g, t), q, scale_);
      ++ans.tables_probed;
      bool hit = false;
      set_.table(g, t).for_each(fp, [&](PointId id) {
        if (hit || seen >= budget) return;
        if (exclude && id == *exclude) return;
        ++seen;
        ++ans.collisions;
        const double d = points_->distance_to(id, q);
        if (d <= accept) {
          ans.yes = true;
          ans.witness = id;
          ans.dist = d;
          hit = true;
        }
      });
      if (hit) return ans;
    }
  }
  return ans;
}

} // namespace prox
