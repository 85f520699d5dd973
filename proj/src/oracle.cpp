#include "prox/oracle.hpp"

#include <limits>
#include <stdexcept>

namespace prox {

OracleNnResult oracle_nn(const PointSet& ps, std::span<const double> q) {
  if (ps.empty()) throw std::domain_error("oracle_nn: empty point set");
  double best = std::numeric_limits<double>::infinity();
  for (PointId i = 0; i < ps.size(); ++i) {
    const double d = ps.distance_to(i, q);
    if (d < best) best = d;
  }
  OracleNnResult res;
  res.dist = best;
  for (PointId i = 0; i < ps.size(); ++i)
    if (ps.distance_to(i, q) == best) res.argmins.push_back(i);
  return res;
}

std::vector<PointId> oracle_range(const PointSet& ps,
                                  std::span<const double> q, double r) {
  std::vector<PointId> out;
  for (PointId i = 0; i < ps.size(); ++i)
    if (ps.distance_to(i, q) <= r) out.push_back(i);
  return out;
}

std::vector<double> all_nn_distances(const PointSet& ps) {
  if (ps.size() < 2)
    throw std::domain_error("all_nn_distances: need at least two points");
  std::vector<double> out(ps.size(),
                          std::numeric_limits<double>::infinity());
  for (PointId i = 0; i < ps.size(); ++i)
    for (PointId j = i + 1; j < ps.size(); ++j) {
      const double d = ps.distance(i, j);
      if (d < out[i]) out[i] = d;
      if (d < out[j]) out[j] = d;
    }
  return out;
}

std::vector<PointId> oracle_rnn(const PointSet& ps, std::span<const double> q,
                                const std::vector<double>& nn_dists) {
  std::vector<PointId> out;
  for (PointId i = 0; i < ps.size(); ++i)
    if (ps.distance_to(i, q) <= nn_dists[i]) out.push_back(i);
  return out;
}

std::vector<PointId> oracle_rnn(const PointSet& ps,
                                std::span<const double> q) {
  return oracle_rnn(ps, q, all_nn_distances(ps));
}

std::vector<PointId> oracle_eps_rnn(const PointSet& ps,
                                    std::span<const double> q, double eps,
                                    const std::vector<double>& nn_dists) {
  if (eps < 0.0) throw std::invalid_argument("oracle_eps_rnn: eps < 0");
  std::vector<PointId> out;
  for (PointId i = 0; i < ps.size(); ++i) {
    const double dq = ps.distance_to(i, q);
    // competitor set is P u {q} minus the point itself
    const double competitor = std::min(nn_dists[i], dq);
    if (dq <= (1.0 + eps) * competitor) out.push_back(i);
  }
  return out;
}

std::vector<PointId> oracle_eps_rnn(const PointSet& ps,
                                    std::span<const double> q, double eps) {
  return oracle_eps_rnn(ps, q, eps, all_nn_distances(ps));
}

std::vector<double> cross_nn_distances(const PointSet& blue,
                                       const PointSet& yellow) {
  if (yellow.empty())
    throw std::domain_error("cross_nn_distances: empty yellow set");
  std::vector<double> out(blue.size(),
                          std::numeric_limits<double>::infinity());
  for (PointId b = 0; b < blue.size(); ++b)
    for (PointId y = 0; y < yellow.size(); ++y) {
      const double d = yellow.distance_to(y, blue[b]);
      if (d < out[b]) out[b] = d;
    }
  return out;
}

std::vector<PointId> oracle_rnn_bichromatic(
    const PointSet& blue, const PointSet& yellow, std::span<const double> q,
    const std::vector<double>& yellow_dists) {
  (void)yellow;
  std::vector<PointId> out;
  for (PointId b = 0; b < blue.size(); ++b)
    if (blue.distance_to(b, q) <= yellow_dists[b]) out.push_back(b);
  return out;
}

std::vector<PointId> oracle_rnn_bichromatic(const PointSet& blue,
                                            const PointSet& yellow,
                                            std::span<const double> q) {
  return oracle_rnn_bichromatic(blue, yellow, q,
                                cross_nn_distances(blue, yellow));
}

} // namespace prox
