#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace prox {

using PointId = std::uint32_t;

/// Distance between two coordinate vectors under the l_s norm,
/// (sum_i |a_i - b_i|^s)^(1/s). Valid for s in (0, 2]; for s < 1 this is
/// the standard quasi-metric used by the hash family.
/// Throws std::invalid_argument on dimension mismatch or s outside (0, 2].
double ls_distance(std::span<const double> a, std::span<const double> b,
                   double s);

/// Immutable set of points in R^d with a fixed norm order s.
/// Point ids are dense and stable: the i-th row added has id i.
class PointSet {
public:
  PointSet(std::size_t dim, double s);

  /// Builds from row-major coordinates; data.size() must be a multiple of dim.
  static PointSet from_rows(std::size_t dim, double s,
                            const std::vector<double>& data);

  void add(std::span<const double> coords);

  std::size_t size() const { return count_; }
  std::size_t dim() const { return dim_; }
  double s() const { return s_; }
  bool empty() const { return count_ == 0; }

  std::span<const double> operator[](PointId id) const {
    return {coords_.data() + static_cast<std::size_t>(id) * dim_, dim_};
  }

  double distance(PointId a, PointId b) const;
  double distance_to(PointId a, std::span<const double> q) const;

  const std::vector<double>& raw() const { return coords_; }

private:
  std::size_t dim_;
  double s_;
  std::size_t count_ = 0;
  std::vector<double> coords_;
};

struct NnInfo {
  double dist;
  PointId neighbor;
};

/// Nearest-neighbor distance of point idx within ps, excluding idx itself.
/// Ties are broken toward the lowest id. Throws std::domain_error when the
/// set has fewer than two points.
NnInfo nn_distance(const PointSet& ps, PointId idx);

} // namespace prox
