#pragma once

#include "prox/metric.hpp"
#include "prox/stable_hash.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace prox::detail {

/// Point ids bucketed by 32-bit key fingerprint. Entries are stored sorted
/// by fingerprint; a 256-way top-byte directory narrows each lookup to one
/// segment, and a binary search finds the bucket inside it. Costs eight
/// bytes per indexed point.
class FingerprintTable {
public:
  FingerprintTable() = default;

  /// fps[i] is the fingerprint of point i; scratch is reusable across builds.
  static FingerprintTable build(std::span<const std::uint32_t> fps,
                                std::vector<std::uint64_t>& scratch) {
    FingerprintTable t;
    const std::size_t n = fps.size();
    scratch.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      scratch[i] = (std::uint64_t(fps[i]) << 32) | i;
    std::sort(scratch.begin(), scratch.end());
    t.fps_.resize(n);
    t.ids_.resize(n);
    std::array<std::uint32_t, 257> counts{};
    for (std::size_t j = 0; j < n; ++j) {
      t.fps_[j] = std::uint32_t(scratch[j] >> 32);
      t.ids_[j] = PointId(scratch[j] & 0xffffffffu);
      ++counts[(t.fps_[j] >> 24) + 1];
    }
    for (std::size_t b = 1; b <= 256; ++b) counts[b] += counts[b - 1];
    t.dir_ = counts;
    return t;
  }

  /// Rebuilds from serialized storage: parallel arrays sorted by
  /// (fingerprint, id), exactly as fingerprints()/ids() produce them.
  static FingerprintTable from_sorted(std::vector<std::uint32_t> fps,
                                      std::vector<PointId> ids) {
    if (fps.size() != ids.size())
      throw std::invalid_argument("fingerprint/id arrays differ in length");
    FingerprintTable t;
    std::array<std::uint32_t, 257> counts{};
    for (std::size_t j = 0; j < fps.size(); ++j) {
      if (j > 0 && (fps[j - 1] > fps[j] ||
                    (fps[j - 1] == fps[j] && ids[j - 1] > ids[j])))
        throw std::invalid_argument("table entries out of order");
      ++counts[(fps[j] >> 24) + 1];
    }
    for (std::size_t b = 1; b <= 256; ++b) counts[b] += counts[b - 1];
    t.dir_ = counts;
    t.fps_ = std::move(fps);
    t.ids_ = std::move(ids);
    return t;
  }

  /// Calls fn(PointId) for every point whose fingerprint equals fp.
  template <typename Fn> void for_each(std::uint32_t fp, Fn&& fn) const {
    const std::size_t lo = dir_[fp >> 24], hi = dir_[(fp >> 24) + 1];
    const auto seg = fps_.begin();
    auto it = std::lower_bound(seg + lo, seg + hi, fp);
    for (; it != seg + hi && *it == fp; ++it) fn(ids_[it - seg]);
  }

  std::size_t size() const { return fps_.size(); }

  /// Raw sorted storage, for serialization and equality checks.
  std::span<const std::uint32_t> fingerprints() const { return fps_; }
  std::span<const PointId> ids() const { return ids_; }

private:
  std::array<std::uint32_t, 257> dir_{};
  std::vector<std::uint32_t> fps_;
  std::vector<PointId> ids_;
};

/// The hash tables of one structure: groups * per_group tables, each with
/// its own key vector, over a common point set.
struct TableSet {
  std::vector<HashVector> vecs;
  std::vector<FingerprintTable> tables;
  std::size_t groups = 0;
  std::size_t per_group = 0;

  const HashVector& vec(std::size_t g, std::size_t t) const {
    return vecs[g * per_group + t];
  }
  const FingerprintTable& table(std::size_t g, std::size_t t) const {
    return tables[g * per_group + t];
  }
  std::size_t entries() const {
    std::size_t total = 0;
    for (const auto& t : tables) total += t.size();
    return total;
  }
};

/// Samples groups*per_group key vectors from spec's seed and buckets every
/// point of ps under each. When lift_coord is set, points are hashed with
/// that value appended as one extra coordinate and key vectors span dim+1
/// coordinates; scale multiplies coordinates before bucketing.
TableSet build_table_set(const PointSet& ps, std::optional<double> lift_coord,
                         double scale, const HashSpec& spec, double w,
                         std::size_t k, std::size_t per_group,
                         std::size_t groups);

/// Reassembles a table set from deserialized tables: key vectors are
/// resampled from the seed (they are a pure function of it), the tables
/// are installed as given. hash_dim must match the dimension the tables
/// were built with, including the lifting coordinate when one was used.
TableSet restore_table_set(std::size_t hash_dim, const HashSpec& spec,
                           double w, std::size_t k, std::size_t per_group,
                           std::size_t groups,
                           std::vector<FingerprintTable> tables);

} // namespace prox::detail
