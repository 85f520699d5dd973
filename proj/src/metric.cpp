#include "prox/metric.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace prox {

namespace {

void check_s(double s) {
  if (!(s > 0.0) || s > 2.0)
    throw std::invalid_argument("norm order s must lie in (0, 2]");
}

double accumulate_ls(const double* a, const double* b, std::size_t n,
                     double s) {
  if (s == 2.0) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = a[i] - b[i];
      acc += d * d;
    }
    return std::sqrt(acc);
  }
  if (s == 1.0) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i] - b[i]);
    return acc;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    acc += std::pow(std::fabs(a[i] - b[i]), s);
  return std::pow(acc, 1.0 / s);
}

} // namespace

double ls_distance(std::span<const double> a, std::span<const double> b,
                   double s) {
  check_s(s);
  if (a.size() != b.size())
    throw std::invalid_argument("ls_distance: dimension mismatch");
  return accumulate_ls(a.data(), b.data(), a.size(), s);
}

PointSet::PointSet(std::size_t dim, double s) : dim_(dim), s_(s) {
  if (dim == 0) throw std::invalid_argument("PointSet: dimension must be > 0");
  check_s(s);
}

PointSet PointSet::from_rows(std::size_t dim, double s,
                             const std::vector<double>& data) {
  PointSet ps(dim, s);
  if (data.size() % dim != 0)
    throw std::invalid_argument("PointSet: data size not a multiple of dim");
  ps.coords_ = data;
  ps.count_ = data.size() / dim;
  return ps;
}

void PointSet::add(std::span<const double> coords) {
  if (coords.size() != dim_)
    throw std::invalid_argument("PointSet::add: dimension mismatch");
  coords_.insert(coords_.end(), coords.begin(), coords.end());
  ++count_;
}

double PointSet::distance(PointId a, PointId b) const {
  return accumulate_ls(coords_.data() + std::size_t(a) * dim_,
                       coords_.data() + std::size_t(b) * dim_, dim_, s_);
}

double PointSet::distance_to(PointId a, std::span<const double> q) const {
  if (q.size() != dim_)
    throw std::invalid_argument("PointSet::distance_to: dimension mismatch");
  return accumulate_ls(coords_.data() + std::size_t(a) * dim_, q.data(), dim_,
                       s_);
}

NnInfo nn_distance(const PointSet& ps, PointId idx) {
  if (ps.size() < 2)
    throw std::domain_error("nn_distance: set has no neighbor for its point");
  double best = std::numeric_limits<double>::infinity();
  PointId best_id = 0;
  for (PointId j = 0; j < ps.size(); ++j) {
    if (j == idx) continue;
    const double d = ps.distance(idx, j);
    if (d < best) { // strict: ties keep the lowest id seen first
      best = d;
      best_id = j;
    }
  }
  return {best, best_id};
}

} // namespace prox
