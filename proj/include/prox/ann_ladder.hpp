#pragma once

#include "prox/metric.hpp"
#include "prox/pleb.hpp"
#include "prox/rung_cache.hpp"
#include "prox/stable_hash.hpp"

#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace prox {

/// Build rejected because every point has a zero-distance duplicate, so no
/// smallest nonzero neighbor distance exists to anchor the radius ladder.
struct DegenerateLadder : std::domain_error {
  using std::domain_error::domain_error;
};

/// Query farther from the data than the top ladder radius verifies.
struct NoNeighborInRange : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Approximate nearest-neighbor search over a geometric ladder of
/// fixed-radius decision structures. Rung j holds a PlebIndex at radius
/// r_min*(1+eps)^j; a query binary-searches for the smallest rung that
/// answers YES and returns that witness together with r_hat, the radius one
/// rung above it. The step up makes d(q,P) <= r_hat hold outright whenever
/// the probed answers are sound, while r_hat <= (1+eps)^2 * d(q,P) holds
/// with high probability; r_hat is always one of radii().
///
/// Rungs are materialized on demand and recycled through a small cache;
/// rebuilding a rung is deterministic in the seed, so eviction never
/// changes answers.
class AnnLadder {
public:
  struct Config {
    HashSpec hash{};
    std::size_t rung_cache = 8; ///< max PLEB structures kept materialized
  };

  AnnLadder(std::shared_ptr<const PointSet> points, double eps);
  AnnLadder(std::shared_ptr<const PointSet> points, double eps, Config cfg);

  struct Result {
    PointId witness = 0;
    double dist = 0.0;      ///< exact distance from the query to witness
    double r_hat = 0.0;     ///< ladder radius bracketing d(q,P) from above
    std::size_t rung = 0;   ///< index of r_hat in radii()
    std::size_t probes = 0; ///< decision structures consulted
  };

  /// Throws NoNeighborInRange when even the top rung answers NO.
  Result query(std::span<const double> q,
               std::optional<PointId> exclude = std::nullopt) const;

  /// Result::witness alone.
  PointId point_query(std::span<const double> q,
                      std::optional<PointId> exclude = std::nullopt) const;

  double eps() const { return eps_; }
  const std::vector<double>& radii() const { return radii_; }
  /// Per-rung group multiplier 1 + ln(J)/ln(n), sized so a union bound
  /// over the probed rungs keeps the whole query correct w.h.p.
  double omega() const { return omega_; }
  const Config& config() const { return cfg_; }
  const PointSet& points() const { return *points_; }
  std::shared_ptr<const PointSet> points_ptr() const { return points_; }
  /// Effective bucket width used by every rung.
  double rung_width() const { return rung_width_; }

  /// Materializes (or retrieves) the decision structure of one rung. The
  /// returned pointer stays valid regardless of later cache eviction.
  std::shared_ptr<const PlebIndex> rung_index(std::size_t j) const;

private:
  std::shared_ptr<const PointSet> points_;
  double eps_;
  Config cfg_;
  std::vector<double> radii_;
  double omega_ = 1.0;
  double rung_width_ = 1.0;
  detail::RungCache<PlebIndex> cache_{1};
};

} // namespace prox
