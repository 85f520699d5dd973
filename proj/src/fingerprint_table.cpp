#include "prox/fingerprint_table.hpp"

#include <stdexcept>

namespace prox::detail {

TableSet build_table_set(const PointSet& ps, std::optional<double> lift_coord,
                         double scale, const HashSpec& spec, double w,
                         std::size_t k, std::size_t per_group,
                         std::size_t groups) {
  if (groups == 0 || per_group == 0)
    throw std::invalid_argument("table set needs at least one table");
  const std::size_t n = ps.size();
  const std::size_t hash_dim = ps.dim() + (lift_coord ? 1 : 0);

  TableSet set;
  set.groups = groups;
  set.per_group = per_group;
  set.vecs.reserve(groups * per_group);
  set.tables.reserve(groups * per_group);

  std::vector<std::uint32_t> fps(n);
  std::vector<std::uint64_t> scratch;
  for (std::size_t g = 0; g < groups; ++g)
    for (std::size_t t = 0; t < per_group; ++t) {
      auto vec = sample_hash_vector(spec.s, w, k, hash_dim, spec.seed, g, t);
      for (std::size_t i = 0; i < n; ++i)
        fps[i] = lift_coord
                     ? hash_fingerprint_lifted(vec, ps[PointId(i)],
                                               *lift_coord, scale)
                     : hash_fingerprint(vec, ps[PointId(i)], scale);
      set.tables.push_back(FingerprintTable::build(fps, scratch));
      set.vecs.push_back(std::move(vec));
    }
  return set;
}

TableSet restore_table_set(std::size_t hash_dim, const HashSpec& spec,
                           double w, std::size_t k, std::size_t per_group,
                           std::size_t groups,
                           std::vector<FingerprintTable> tables) {
  if (groups == 0 || per_group == 0)
    throw std::invalid_argument("table set needs at least one table");
  if (tables.size() != groups * per_group)
    throw std::invalid_argument("table count does not match the parameters");

  TableSet set;
  set.groups = groups;
  set.per_group = per_group;
  set.tables = std::move(tables);
  set.vecs.reserve(groups * per_group);
  for (std::size_t g = 0; g < groups; ++g)
    for (std::size_t t = 0; t < per_group; ++t)
      set.vecs.push_back(
          sample_hash_vector(spec.s, w, k, hash_dim, spec.seed, g, t));
  return set;
}

} // namespace prox::detail
