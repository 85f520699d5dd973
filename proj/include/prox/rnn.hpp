#pragma once

#include "prox/ann_ladder.hpp"
#include "prox/exhaustive_pleb.hpp"
#include "prox/metric.hpp"
#include "prox/rung_cache.hpp"
#include "prox/stable_hash.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace prox {

/// Reverse-nearest-neighbor reporter. Answers RNN(q) = every data point
/// whose nearest-neighbor distance is at least its distance to q.
///
/// Monochromatic form: one set P, nn_dist(p) = d(p, P \ {p}). The query
/// point is never a member, so no id of q exists to exclude; a data point
/// coinciding with q in coordinates is still reported when it qualifies.
///
/// Bichromatic form: candidates B (blue), sites Y (yellow),
/// nn_dist(b) = d(b, Y) with no exclusion across the two sets. Returned
/// ids index into B.
///
/// Internals: points are partitioned into geometric buckets by nn_dist
/// ((1+eps)^(i-1) <= nn_dist < (1+eps)^i); each bucket carries a lazily
/// built range reporter at radius (1+eps)^i whose repetition count is set
/// by the global point count, so a union bound over every bucket probed by
/// a query still succeeds with high probability. Points with nn_dist = 0
/// (coordinate duplicates) live in a dedicated zero bucket answered by
/// exact coordinate match. A radius ladder built with slack eps/3 supplies
/// an approximate nearest site y for each query; buckets falling in a
/// window around d(q, y) are probed, and a per-site reverse array sorted
/// by nn_dist covers every answer whose bucket lies above the window.
class RnnIndex {
public:
  struct Config {
    HashSpec hash{};
    /// Ladder rungs kept alive at once.
    std::size_t rung_cache = 8;
    /// Bucket range reporters kept alive at once.
    std::size_t bucket_cache = 32;
    /// Compute nn_dist through the indexed nearest-neighbor path instead
    /// of the quadratic scan. Exact for each point with high probability
    /// rather than deterministically.
    bool indexed_build = false;
  };

  /// Monochromatic. Requires at least two points.
  RnnIndex(std::shared_ptr<const PointSet> points, double eps);
  RnnIndex(std::shared_ptr<const PointSet> points, double eps, Config cfg);

  /// Bichromatic. Requires at least one yellow point; blue may be empty.
  RnnIndex(std::shared_ptr<const PointSet> blue,
           std::shared_ptr<const PointSet> yellow, double eps);
  RnnIndex(std::shared_ptr<const PointSet> blue,
           std::shared_ptr<const PointSet> yellow, double eps, Config cfg);

  /// Precomputed build products, for reassembly from a snapshot.
  struct Restored {
    std::vector<double> nn_dists;
    std::vector<PointId> zero_bucket;
    std::map<std::int64_t, std::vector<PointId>> buckets;
    std::vector<std::vector<std::pair<double, PointId>>> reverse;
  };

  /// Reassembles a monochromatic index from deserialized build products;
  /// they must come from an index built with identical arguments. The
  /// ladder and the bucket reporters regrow from the seed on demand, so
  /// the result answers queries exactly as the saved index did.
  static std::shared_ptr<RnnIndex> restore(
      std::shared_ptr<const PointSet> points, double eps, Config cfg,
      Restored data);
  /// Bichromatic counterpart.
  static std::shared_ptr<RnnIndex> restore(
      std::shared_ptr<const PointSet> blue,
      std::shared_ptr<const PointSet> yellow, double eps, Config cfg,
      Restored data);

  struct Report {
    std::vector<PointId> result;     // final answer, ascending ids
    std::vector<PointId> candidates; // pre-filter union, ascending ids
    PointId site = 0;                // approximate nearest site y
    double site_dist = 0.0;          // d(q, y)
    std::size_t buckets_probed = 0;  // hashed bucket probes (zero bucket
                                     // and whole-array shortcuts excluded)
    std::size_t tail_size = 0;       // candidates taken from the reverse
                                     // array suffix
    bool site_by_scan = false;       // y found by linear scan fallback
    bool in_range = true;            // false when no site was within the
                                     // top ladder radius (result empty)
  };

  Report query(std::span<const double> q) const;

  bool bichromatic() const { return bichromatic_; }
  double eps() const { return eps_; }
  const Config& config() const { return cfg_; }

  /// Candidate set (P, or B in bichromatic mode).
  const PointSet& points() const { return *points_; }
  /// Site set (P again, or Y in bichromatic mode).
  const PointSet& sites() const { return *sites_; }

  /// nn_dist per candidate point.
  const std::vector<double>& nn_dists() const { return nn_dist_; }
  /// Geometric buckets: index i -> member ids, (1+eps)^(i-1) <= nn_dist
  /// < (1+eps)^i. Ids ascend within each bucket.
  const std::map<std::int64_t, std::vector<PointId>>& buckets() const {
    return buckets_;
  }
  /// Candidates with nn_dist = 0, ascending.
  const std::vector<PointId>& zero_bucket() const { return zero_bucket_; }

  /// Reverse array of site y: candidates p with d(p, y) <= (1+eps) *
  /// nn_dist(p), as (sort key, id) pairs ascending by key. The key is
  /// nn_dist(p), except for a bichromatic candidate coinciding with y
  /// itself, which stores the distance from y to the other sites
  /// (infinity when y is the only site).
  std::span<const std::pair<double, PointId>> reverse_array(PointId y) const;

  /// True when query sites come from a linear scan rather than the ladder
  /// (single site, or every site duplicated).
  bool scan_sites() const { return !ladder_; }

  /// Buckets any query can probe: the window span plus rounding slack,
  /// plus the bichromatic widening when it applies.
  std::size_t bucket_probe_bound() const;

  /// Number of nonzero buckets; positions follow buckets() iteration order.
  std::size_t bucket_count() const { return bucket_key_.size(); }
  /// Range reporter of the bucket at the given position (lazily built).
  std::shared_ptr<const ExhaustiveIndex> bucket_index(std::size_t pos) const;

private:
  struct RestoreTag {};
  RnnIndex(RestoreTag, std::shared_ptr<const PointSet> points,
           std::shared_ptr<const PointSet> sites, bool bichromatic,
           double eps, Config cfg, Restored data);

  void build(Config cfg);
  void validate_config() const;
  void finish(); // bucket position arrays, ladder, cache capacity

  std::shared_ptr<const PointSet> points_; // candidates (P or B)
  std::shared_ptr<const PointSet> sites_;  // sites (P or Y)
  bool bichromatic_ = false;
  double eps_ = 0.0;
  Config cfg_{};

  std::vector<double> nn_dist_;
  std::map<std::int64_t, std::vector<PointId>> buckets_;
  std::vector<PointId> zero_bucket_;

  // bucket position (iteration order of buckets_) -> index, radius, local
  // point set and local-to-global id map, for the lazy range reporters
  std::vector<std::int64_t> bucket_key_;
  std::vector<double> bucket_radius_;
  std::vector<std::shared_ptr<const PointSet>> bucket_points_;
  std::vector<std::vector<PointId>> bucket_ids_;
  std::map<std::int64_t, std::size_t> bucket_pos_;

  std::vector<std::vector<std::pair<double, PointId>>> reverse_;
  std::unique_ptr<AnnLadder> ladder_; // null => scan fallback for sites
  mutable detail::RungCache<ExhaustiveIndex> bucket_cache_{1};
};

} // namespace prox
