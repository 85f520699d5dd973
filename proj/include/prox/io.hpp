#pragma once

#include "prox/exact_nn.hpp"
#include "prox/exhaustive_pleb.hpp"
#include "prox/metric.hpp"
#include "prox/pleb.hpp"
#include "prox/rnn.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace prox {

/// Point-cloud files. Both encodings carry a header with the count, the
/// dimension and the norm order; every coordinate must be finite.
///
/// Text: a header line "rpleb-points,1,<n>,<d>,<s>" followed by n lines of
/// d comma-separated decimal values. Binary: the magic "RPLEBPT\0", a
/// 32-bit version, n and d as 64-bit counts, s as a double, then n*d
/// little-endian doubles in row-major order.
enum class PointEncoding { text_csv, binary_f64 };

void save_points(const PointSet& ps, const std::string& path,
                 PointEncoding enc);

/// Loads either encoding, telling them apart by the leading magic.
/// Throws std::runtime_error naming the offending line on parse errors.
PointSet load_points(const std::string& path);

/// Index snapshots. One file holds everything a process needs to answer
/// queries exactly like the saving process: the hash specification with
/// its seed, the derived parameters, the point coordinates, and for the
/// table-backed kinds every hash table as sorted (fingerprint, id) pairs.
/// Structures that materialize lazily (ladder rungs, range reporters,
/// bucket reporters) are not stored: they regrow bit-identically from the
/// seed on demand.
enum class SnapshotKind : std::uint8_t {
  pleb = 0,
  expleb = 1,
  exactnn = 2,
  rnn = 3,
  rnn_bi = 4,
};

std::string_view snapshot_kind_name(SnapshotKind kind);
std::optional<SnapshotKind> snapshot_kind_from(std::string_view name);

/// A loaded snapshot: kind selects which pointer is set.
struct Snapshot {
  SnapshotKind kind;
  std::shared_ptr<PlebIndex> pleb;
  std::shared_ptr<ExhaustiveIndex> expleb;
  std::shared_ptr<ExactNnIndex> exactnn;
  std::shared_ptr<RnnIndex> rnn;
};

void save_index(const PlebIndex& idx, const std::string& path);
void save_index(const ExhaustiveIndex& idx, const std::string& path);
void save_index(const ExactNnIndex& idx, const std::string& path);
void save_index(const RnnIndex& idx, const std::string& path);

Snapshot load_index(const std::string& path);

} // namespace prox
