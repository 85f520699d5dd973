#pragma once

#include "prox/metric.hpp"

#include <span>
#include <vector>

namespace prox {

// Brute-force reference answers for every query type served by the indexes.
// Everything here is a deterministic full scan: no randomness, no shared
// code with the hashed structures, so these functions can stand as ground
// truth in tests.

struct OracleNnResult {
  std::vector<PointId> argmins; // every exact minimizer, ascending id
  double dist;
};

/// Exact nearest neighbors of q. Ties are all included.
OracleNnResult oracle_nn(const PointSet& ps, std::span<const double> q);

/// All point ids within distance r of q (closed ball), ascending id.
std::vector<PointId> oracle_range(const PointSet& ps,
                                  std::span<const double> q, double r);

/// Nearest-neighbor distance of every point, d(p, P \ {p}).
/// Requires at least two points.
std::vector<double> all_nn_distances(const PointSet& ps);

/// Reverse nearest neighbors of q: every p with d(p, q) <= d(p, P \ {p}).
/// Adjoining q to p's competitor set leaves the comparison unchanged, so
/// this closed-form test matches the definition with q adjoined.
std::vector<PointId> oracle_rnn(const PointSet& ps, std::span<const double> q,
                                const std::vector<double>& nn_dists);
std::vector<PointId> oracle_rnn(const PointSet& ps, std::span<const double> q);

/// eps-relaxed reverse nearest neighbors: every p with
/// d(p, q) <= (1+eps) * d(p, (P u {q}) \ {p}). With eps = 0 this reduces
/// to oracle_rnn.
std::vector<PointId> oracle_eps_rnn(const PointSet& ps,
                                    std::span<const double> q, double eps,
                                    const std::vector<double>& nn_dists);
std::vector<PointId> oracle_eps_rnn(const PointSet& ps,
                                    std::span<const double> q, double eps);

/// Distance from each blue point to its nearest yellow point, d(Y, b).
/// No id-based exclusion applies across the two sets.
std::vector<double> cross_nn_distances(const PointSet& blue,
                                       const PointSet& yellow);

/// Bichromatic reverse nearest neighbors of q: every blue b with
/// d(b, q) <= d(Y, b).
std::vector<PointId> oracle_rnn_bichromatic(
    const PointSet& blue, const PointSet& yellow, std::span<const double> q,
    const std::vector<double>& yellow_dists);
std::vector<PointId> oracle_rnn_bichromatic(const PointSet& blue,
                                            const PointSet& yellow,
                                            std::span<const double> q);

} // namespace prox
