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

/// Randomized decision structure for one fixed radius. query(q) answers YES
/// with a verified witness within r(1+eps) of q, or NO. Whenever some point
/// lies within r of q, the answer is YES with high probability; a NO is
/// never wrong about the ball of radius r(1+eps) having a witness when YES
/// would have been returned, and YES is never reported without a witness.
///
/// The structure keeps ceil(omega * ln n) independent groups of L tables
/// each. A query inspects collisions group by group and gives up on a group
/// after 3L of them, so total work per query stays near n^rho.
class PlebIndex {
public:
  PlebIndex(std::shared_ptr<const PointSet> points, double r, double eps,
            HashSpec spec = {}, double omega = 1.0);

  /// Reassembles an index from deserialized tables. The tables must have
  /// been produced by an index built with identical arguments; key vectors
  /// are resampled from the seed. No rehash of the data happens, so the
  /// result answers queries exactly as the saved index did.
  static std::shared_ptr<PlebIndex>
  restore(std::shared_ptr<const PointSet> points, double r, double eps,
          HashSpec spec, double omega,
          std::vector<detail::FingerprintTable> tables);

  struct Answer {
    bool yes = false;
    PointId witness = 0; ///< meaningful only when yes
    double dist = 0.0;   ///< distance from the query to the witness
    std::size_t collisions = 0;
    std::size_t tables_probed = 0;
  };

  /// exclude suppresses one point id, for querying at a member point
  /// without seeing itself.
  Answer query(std::span<const double> q,
               std::optional<PointId> exclude = std::nullopt) const;

  double r() const { return r_; }
  double eps() const { return eps_; }
  double omega() const { return omega_; }
  const HashSpec& spec() const { return spec_; }
  const LshParams& params() const { return params_; }
  std::size_t groups() const { return set_.groups; }
  std::size_t tables_per_group() const { return set_.per_group; }
  /// Total bucketed entries, i.e. n times the number of tables.
  std::size_t memory_entries() const { return set_.entries(); }
  const PointSet& points() const { return *points_; }
  const detail::TableSet& table_set() const { return set_; }

private:
  struct RestoreTag {};
  PlebIndex(RestoreTag, std::shared_ptr<const PointSet> points, double r,
            double eps, HashSpec spec, double omega,
            std::vector<detail::FingerprintTable> tables);

  std::shared_ptr<const PointSet> points_;
  double r_;
  double eps_;
  double omega_;
  HashSpec spec_;
  LshParams params_;
  double scale_; // 1/r, applied before bucketing
  detail::TableSet set_;
};

} // namespace prox
