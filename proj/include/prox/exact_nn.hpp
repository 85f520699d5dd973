#pragma once

#include "prox/ann_ladder.hpp"
#include "prox/exhaustive_pleb.hpp"
#include "prox/metric.hpp"
#include "prox/rung_cache.hpp"
#include "prox/stable_hash.hpp"

#include <memory>
#include <optional>
#include <span>

namespace prox {

/// Exact nearest-neighbor queries in three steps: an approximate search
/// over a radius ladder built with eps/3 brackets the neighbor distance by
/// r_hat, a range reporter collects S = every point within r_hat, and a
/// scan of S returns the closest. The ladder bracket puts the true nearest
/// neighbor inside S with high probability, so the scan answer is exact.
///
/// Each ladder radius has a matching range reporter (slack eps, m = n);
/// like ladder rungs they materialize on demand through a bounded cache.
class ExactNnIndex {
public:
  struct Config {
    HashSpec hash{};
    bool lifted = true;          ///< hash range reporters in lifted space
    std::size_t rung_cache = 8;  ///< ladder decision structures kept alive
    std::size_t range_cache = 16; ///< range reporters kept alive
  };

  ExactNnIndex(std::shared_ptr<const PointSet> points, double eps);
  ExactNnIndex(std::shared_ptr<const PointSet> points, double eps, Config cfg);

  struct Result {
    PointId nearest = 0;
    double dist = 0.0;  ///< exact distance from the query to nearest
    double r_hat = 0.0; ///< scan radius from the ladder (0 on far queries)
    std::size_t rung = 0;
    std::size_t candidates = 0; ///< |S|
    /// Size of the stable neighborhood {p : d(p,q) <= (1+eps)^2 * dist}:
    /// how many points compete for nearest within the slack.
    std::size_t condition = 0;
    std::size_t distance_evals = 0; ///< distinct candidates inspected
    bool fallback = false; ///< S was empty; nearest is an arbitrary point
  };

  /// exclude suppresses one point id throughout; querying at a member
  /// point with its own id excluded yields that point's nearest neighbor
  /// among the others.
  Result query(std::span<const double> q,
               std::optional<PointId> exclude = std::nullopt) const;

  /// Result::nearest alone.
  PointId point_query(std::span<const double> q,
                      std::optional<PointId> exclude = std::nullopt) const;

  double eps() const { return eps_; }
  const AnnLadder& ladder() const { return ladder_; }
  const Config& config() const { return cfg_; }
  const PointSet& points() const { return *points_; }
  std::shared_ptr<const PointSet> points_ptr() const { return points_; }

  /// Materializes (or retrieves) the range reporter for one ladder rung.
  std::shared_ptr<const ExhaustiveIndex> range_index(std::size_t j) const;

private:
  std::shared_ptr<const PointSet> points_;
  double eps_;
  Config cfg_;
  AnnLadder ladder_;
  detail::RungCache<ExhaustiveIndex> ranges_{1};
};

} // namespace prox
