#pragma once

#include "prox/fingerprint_table.hpp"
#include "prox/metric.hpp"
#include "prox/stable_hash.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace prox {

/// Repetition rate giving each in-range point a miss probability of at most
/// m^-3: one group of tables misses it with probability below 2/5.
inline constexpr double kExhaustiveRepetitionRate = 3.2740700038118743;

/// Range reporter for one fixed radius. query(q) returns every point within
/// r of q (each found with high probability) by exhausting all hash
/// collisions in ceil(c ln m) independent groups of L tables and keeping
/// candidates whose exact distance is at most r.
///
/// By default the index hashes in a lifted space: data points carry one
/// appended zero coordinate and the query carries an offset coordinate of
/// r/((1+eps)^s - 1)^{1/s}, which bounds every lifted distance away from
/// zero and keeps the expected number of far collisions near L per group.
class ExhaustiveIndex {
public:
  struct Config {
    double r = 1.0;
    double eps = 0.5;
    HashSpec hash{};
    bool lifted = true;
    std::size_t m = 0; ///< output-size parameter; 0 means the point count
    double c = kExhaustiveRepetitionRate;
  };

  ExhaustiveIndex(std::shared_ptr<const PointSet> points, const Config& cfg);

  /// Reassembles an index from deserialized tables. The tables must have
  /// been produced by an index built with an identical configuration; key
  /// vectors are resampled from the seed and no rehash of the data happens.
  static std::shared_ptr<ExhaustiveIndex>
  restore(std::shared_ptr<const PointSet> points, const Config& cfg,
          std::vector<detail::FingerprintTable> tables);

  struct Report {
    std::vector<PointId> points; ///< ids with d(q, p) <= r, ascending
    std::size_t collisions_inside = 0;  ///< events with d <= r(1+eps)
    std::size_t collisions_outside = 0; ///< events with d > r(1+eps)
    std::size_t tables_probed = 0;
    std::size_t distance_evals = 0; ///< distinct candidates inspected
  };

  /// exclude suppresses one point id, for querying at a member point
  /// without seeing itself.
  Report query(std::span<const double> q,
               std::optional<PointId> exclude = std::nullopt) const;

  double r() const { return cfg_.r; }
  double eps() const { return cfg_.eps; }
  const Config& config() const { return cfg_; }
  const LshParams& params() const { return params_; }
  bool lifted() const { return cfg_.lifted; }
  /// Extra coordinate appended to queries before hashing (0 if unlifted).
  double lift_coordinate() const { return lift_coord_; }
  /// Multiplier applied to coordinates before bucketing, 1/r'.
  double hash_scale() const { return scale_; }
  std::size_t groups() const { return set_.groups; }
  std::size_t tables_per_group() const { return set_.per_group; }
  std::size_t memory_entries() const { return set_.entries(); }
  const PointSet& points() const { return *points_; }
  const detail::TableSet& table_set() const { return set_; }

private:
  struct RestoreTag {};
  ExhaustiveIndex(RestoreTag, std::shared_ptr<const PointSet> points,
                  const Config& cfg,
                  std::vector<detail::FingerprintTable> tables);
  void validate_and_derive();

  std::shared_ptr<const PointSet> points_;
  Config cfg_;
  LshParams params_;
  double scale_;      // 1/r', where r' is the hashing radius after lifting
  double lift_coord_; // appended coordinate for data points (0 if unlifted)
  detail::TableSet set_;
};

} // namespace prox
