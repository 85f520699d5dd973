#include "prox/io.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian and so must the host be");

namespace prox {

namespace {

constexpr char kPointMagic[8] = {'R', 'P', 'L', 'E', 'B', 'P', 'T', '\0'};
constexpr char kIndexMagic[8] = {'R', 'P', 'L', 'E', 'B', 'I', 'X', '\0'};
constexpr std::uint32_t kPointVersion = 1;
constexpr std::uint8_t kIndexVersion = 1;
constexpr char kTextMagic[] = "rpleb-points";

[[noreturn]] void fail(const std::string& what) {
  throw std::runtime_error(what);
}

class Writer {
public:
  Writer(const std::string& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) fail("cannot open " + path + " for writing");
  }
  void raw(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), std::streamsize(n));
    if (!out_) fail("write error on " + path_);
  }
  void u8(std::uint8_t v) { raw(&v, 1); }
  void u32(std::uint32_t v) { raw(&v, 4); }
  void u64(std::uint64_t v) { raw(&v, 8); }
  void i64(std::int64_t v) { raw(&v, 8); }
  void f64(double v) { raw(&v, 8); }
  void close() {
    out_.close();
    if (!out_) fail("write error on " + path_);
  }

private:
  std::string path_;
  std::ofstream out_;
};

class Reader {
public:
  Reader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) fail("cannot open " + path);
  }
  void raw(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), std::streamsize(n));
    if (std::size_t(in_.gcount()) != n) fail(path_ + ": truncated file");
  }
  std::uint8_t u8() {
    std::uint8_t v;
    raw(&v, 1);
    return v;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    raw(&v, 4);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    raw(&v, 8);
    return v;
  }
  std::int64_t i64() {
    std::int64_t v;
    raw(&v, 8);
    return v;
  }
  double f64() {
    double v;
    raw(&v, 8);
    return v;
  }
  /// Bounded count: guards against nonsense sizes in corrupt files.
  std::size_t count(std::uint64_t cap) {
    const std::uint64_t v = u64();
    if (v > cap) fail(path_ + ": implausible count in file");
    return std::size_t(v);
  }
  const std::string& path() const { return path_; }

private:
  std::string path_;
  std::ifstream in_;
};

constexpr std::uint64_t kMaxCount = 1ull << 40; // sanity cap for any count

void write_points_binary(const PointSet& ps, Writer& w) {
  w.raw(kPointMagic, 8);
  w.u32(kPointVersion);
  w.u64(ps.size());
  w.u64(ps.dim());
  w.f64(ps.s());
  w.raw(ps.raw().data(), ps.raw().size() * sizeof(double));
}

void check_finite(const std::vector<double>& data, const std::string& path) {
  for (const double v : data)
    if (!std::isfinite(v)) fail(path + ": non-finite coordinate");
}

PointSet read_points_binary(Reader& r) {
  // magic already consumed by the caller
  const std::uint32_t version = r.u32();
  if (version != kPointVersion) fail(r.path() + ": unsupported version");
  const std::size_t n = r.count(kMaxCount);
  const std::size_t d = r.count(kMaxCount);
  const double s = r.f64();
  if (d == 0) fail(r.path() + ": zero dimension");
  std::vector<double> data(n * d);
  r.raw(data.data(), data.size() * sizeof(double));
  check_finite(data, r.path());
  return PointSet::from_rows(d, s, data);
}

void write_points_text(const PointSet& ps, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("cannot open " + path + " for writing");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", ps.s());
  out << kTextMagic << ",1," << ps.size() << ',' << ps.dim() << ',' << buf
      << '\n';
  for (PointId i = 0; i < ps.size(); ++i) {
    const auto row = ps[i];
    for (std::size_t j = 0; j < row.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", row[j]);
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
  out.close();
  if (!out) fail("write error on " + path);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_double(const std::string& field, const std::string& path,
                    std::size_t line_no) {
  const char* begin = field.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  while (end && *end && std::isspace(static_cast<unsigned char>(*end))) ++end;
  if (end == begin || (end && *end != '\0'))
    fail(path + " line " + std::to_string(line_no) + ": bad number '" +
         field + "'");
  return v;
}

PointSet read_points_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) fail(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);
  if (header.size() != 5 || header[0] != kTextMagic)
    fail(path + " line 1: expected header '" + kTextMagic + ",1,n,d,s'");
  if (header[1] != "1") fail(path + " line 1: unsupported version");
  const double n_val = parse_double(header[2], path, 1);
  const double d_val = parse_double(header[3], path, 1);
  const double s = parse_double(header[4], path, 1);
  if (!(n_val >= 0) || n_val != std::floor(n_val) || n_val > 1e12 ||
      !(d_val >= 1) || d_val != std::floor(d_val) || d_val > 1e6)
    fail(path + " line 1: bad point count or dimension");
  const auto n = std::size_t(n_val);
  const auto d = std::size_t(d_val);

  std::vector<double> data;
  data.reserve(n * d);
  for (std::size_t row = 0; row < n; ++row) {
    const std::size_t line_no = row + 2;
    if (!std::getline(in, line))
      fail(path + " line " + std::to_string(line_no) + ": missing row");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_csv(line);
    if (fields.size() != d)
      fail(path + " line " + std::to_string(line_no) + ": expected " +
           std::to_string(d) + " values, got " +
           std::to_string(fields.size()));
    for (const auto& f : fields) {
      const double v = parse_double(f, path, line_no);
      if (!std::isfinite(v))
        fail(path + " line " + std::to_string(line_no) +
             ": non-finite coordinate");
      data.push_back(v);
    }
  }
  return PointSet::from_rows(d, s, data);
}

void write_hash_spec(Writer& w, const HashSpec& spec) {
  w.f64(spec.s);
  w.u8(spec.w ? 1 : 0);
  w.f64(spec.w ? *spec.w : 0.0);
  w.u64(spec.seed);
}

HashSpec read_hash_spec(Reader& r) {
  HashSpec spec;
  spec.s = r.f64();
  const bool has_w = r.u8() != 0;
  const double w = r.f64();
  if (has_w) spec.w = w;
  spec.seed = r.u64();
  return spec;
}

void write_params(Writer& w, const LshParams& p) {
  w.f64(p.p0);
  w.f64(p.p1);
  w.f64(p.p2);
  w.u64(p.k);
  w.u64(p.L);
  w.f64(p.rho);
  w.f64(p.alpha);
  w.f64(p.eps_prime);
  w.f64(p.r_prime_over_r);
  w.f64(p.lift_coord_over_r);
}

bool near(double a, double b) {
  return std::fabs(a - b) <= 1e-12 * std::max({1.0, std::fabs(a),
                                               std::fabs(b)});
}

/// Reads a stored parameter block and checks it against the recomputed
/// one: integers must match exactly, reals to rounding noise.
void read_and_check_params(Reader& r, const LshParams& p) {
  const double p0 = r.f64(), p1 = r.f64(), p2 = r.f64();
  const std::uint64_t k = r.u64(), L = r.u64();
  const double rho = r.f64(), alpha = r.f64(), eps_prime = r.f64();
  const double rr = r.f64(), lc = r.f64();
  if (k != p.k || L != p.L || !near(p0, p.p0) || !near(p1, p.p1) ||
      !near(p2, p.p2) || !near(rho, p.rho) || !near(alpha, p.alpha) ||
      !near(eps_prime, p.eps_prime) || !near(rr, p.r_prime_over_r) ||
      !near(lc, p.lift_coord_over_r))
    fail(r.path() + ": stored parameters disagree with the recomputation");
}

void write_tables(Writer& w, const detail::TableSet& set) {
  w.u64(set.groups);
  w.u64(set.per_group);
  for (const auto& t : set.tables) {
    w.u64(t.size());
    w.raw(t.fingerprints().data(), t.size() * sizeof(std::uint32_t));
    w.raw(t.ids().data(), t.size() * sizeof(PointId));
  }
}

std::vector<detail::FingerprintTable>
read_tables(Reader& r, std::size_t& groups, std::size_t& per_group,
            std::size_t n) {
  groups = r.count(kMaxCount);
  per_group = r.count(kMaxCount);
  if (groups == 0 || per_group == 0 || groups * per_group > kMaxCount)
    fail(r.path() + ": implausible table layout");
  std::vector<detail::FingerprintTable> tables;
  tables.reserve(groups * per_group);
  for (std::size_t i = 0; i < groups * per_group; ++i) {
    const std::size_t count = r.count(kMaxCount);
    std::vector<std::uint32_t> fps(count);
    std::vector<PointId> ids(count);
    r.raw(fps.data(), count * sizeof(std::uint32_t));
    r.raw(ids.data(), count * sizeof(PointId));
    for (const PointId id : ids)
      if (id >= n) fail(r.path() + ": table id out of range");
    tables.push_back(
        detail::FingerprintTable::from_sorted(std::move(fps), std::move(ids)));
  }
  return tables;
}

std::shared_ptr<const PointSet> read_points_section(Reader& r) {
  const std::size_t n = r.count(kMaxCount);
  const std::size_t d = r.count(kMaxCount);
  const double s = r.f64();
  if (d == 0) fail(r.path() + ": zero dimension");
  std::vector<double> data(n * d);
  r.raw(data.data(), data.size() * sizeof(double));
  check_finite(data, r.path());
  return std::make_shared<const PointSet>(PointSet::from_rows(d, s, data));
}

void write_points_section(Writer& w, const PointSet& ps) {
  w.u64(ps.size());
  w.u64(ps.dim());
  w.f64(ps.s());
  w.raw(ps.raw().data(), ps.raw().size() * sizeof(double));
}

void write_preamble(Writer& w, SnapshotKind kind, const HashSpec& spec,
                    double eps) {
  w.raw(kIndexMagic, 8);
  w.u8(kIndexVersion);
  w.u8(std::uint8_t(kind));
  write_hash_spec(w, spec);
  w.f64(eps);
}

} // namespace

void save_points(const PointSet& ps, const std::string& path,
                 PointEncoding enc) {
  check_finite(ps.raw(), path);
  if (enc == PointEncoding::text_csv) {
    write_points_text(ps, path);
  } else {
    Writer w(path);
    write_points_binary(ps, w);
    w.close();
  }
}

PointSet load_points(const std::string& path) {
  {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) fail("cannot open " + path);
    char magic[8] = {};
    probe.read(magic, 8);
    if (probe.gcount() == 8 && std::memcmp(magic, kPointMagic, 8) == 0) {
      Reader r(path);
      char skip[8];
      r.raw(skip, 8);
      return read_points_binary(r);
    }
  }
  return read_points_text(path);
}

std::string_view snapshot_kind_name(SnapshotKind kind) {
  switch (kind) {
  case SnapshotKind::pleb: return "pleb";
  case SnapshotKind::expleb: return "expleb";
  case SnapshotKind::exactnn: return "exactnn";
  case SnapshotKind::rnn: return "rnn";
  case SnapshotKind::rnn_bi: return "rnn-bi";
  }
  return "unknown";
}

std::optional<SnapshotKind> snapshot_kind_from(std::string_view name) {
  for (const auto kind :
       {SnapshotKind::pleb, SnapshotKind::expleb, SnapshotKind::exactnn,
        SnapshotKind::rnn, SnapshotKind::rnn_bi})
    if (name == snapshot_kind_name(kind)) return kind;
  return std::nullopt;
}

void save_index(const PlebIndex& idx, const std::string& path) {
  Writer w(path);
  write_preamble(w, SnapshotKind::pleb, idx.spec(), idx.eps());
  w.f64(idx.r());
  w.f64(idx.omega());
  write_points_section(w, idx.points());
  write_params(w, idx.params());
  write_tables(w, idx.table_set());
  w.close();
}

void save_index(const ExhaustiveIndex& idx, const std::string& path) {
  Writer w(path);
  const auto& cfg = idx.config();
  write_preamble(w, SnapshotKind::expleb, cfg.hash, cfg.eps);
  w.f64(cfg.r);
  w.u8(cfg.lifted ? 1 : 0);
  w.u64(cfg.m);
  w.f64(cfg.c);
  write_points_section(w, idx.points());
  write_params(w, idx.params());
  write_tables(w, idx.table_set());
  w.close();
}

void save_index(const ExactNnIndex& idx, const std::string& path) {
  Writer w(path);
  const auto& cfg = idx.config();
  write_preamble(w, SnapshotKind::exactnn, cfg.hash, idx.eps());
  w.u8(cfg.lifted ? 1 : 0);
  w.u64(cfg.rung_cache);
  w.u64(cfg.range_cache);
  write_points_section(w, idx.points());
  w.close();
}

void save_index(const RnnIndex& idx, const std::string& path) {
  Writer w(path);
  const auto& cfg = idx.config();
  const auto kind =
      idx.bichromatic() ? SnapshotKind::rnn_bi : SnapshotKind::rnn;
  write_preamble(w, kind, cfg.hash, idx.eps());
  w.u64(cfg.rung_cache);
  w.u64(cfg.bucket_cache);
  w.u8(cfg.indexed_build ? 1 : 0);
  write_points_section(w, idx.points());
  if (idx.bichromatic()) write_points_section(w, idx.sites());

  const auto& nn = idx.nn_dists();
  w.u64(nn.size());
  w.raw(nn.data(), nn.size() * sizeof(double));

  const auto& zero = idx.zero_bucket();
  w.u64(zero.size());
  w.raw(zero.data(), zero.size() * sizeof(PointId));

  const auto& buckets = idx.buckets();
  w.u64(buckets.size());
  for (const auto& [index, members] : buckets) {
    w.i64(index);
    w.u64(members.size());
    w.raw(members.data(), members.size() * sizeof(PointId));
  }

  w.u64(idx.sites().size());
  for (PointId y = 0; y < idx.sites().size(); ++y) {
    const auto arr = idx.reverse_array(y);
    w.u64(arr.size());
    for (const auto& [key, p] : arr) {
      w.f64(key);
      w.u32(p);
    }
  }
  w.close();
}

Snapshot load_index(const std::string& path) {
  Reader r(path);
  char magic[8];
  r.raw(magic, 8);
  if (std::memcmp(magic, kIndexMagic, 8) != 0)
    fail(path + ": not an index snapshot");
  if (r.u8() != kIndexVersion) fail(path + ": unsupported version");
  const std::uint8_t kind_byte = r.u8();
  if (kind_byte > std::uint8_t(SnapshotKind::rnn_bi))
    fail(path + ": unknown index kind");
  const auto kind = SnapshotKind(kind_byte);
  const HashSpec spec = read_hash_spec(r);
  const double eps = r.f64();

  Snapshot snap;
  snap.kind = kind;
  switch (kind) {
  case SnapshotKind::pleb: {
    const double radius = r.f64();
    const double omega = r.f64();
    auto points = read_points_section(r);
    // params are a pure function of (n, eps, spec); recompute and compare
    read_and_check_params(
        r, derive_params(points->size(), eps, spec, /*lifted=*/false));
    std::size_t groups = 0, per_group = 0;
    auto tables = read_tables(r, groups, per_group, points->size());
    snap.pleb = PlebIndex::restore(std::move(points), radius, eps, spec,
                                   omega, std::move(tables));
    if (snap.pleb->groups() != groups ||
        snap.pleb->tables_per_group() != per_group)
      fail(path + ": stored table layout disagrees with the parameters");
    break;
  }
  case SnapshotKind::expleb: {
    ExhaustiveIndex::Config cfg;
    cfg.hash = spec;
    cfg.eps = eps;
    cfg.r = r.f64();
    cfg.lifted = r.u8() != 0;
    cfg.m = r.count(kMaxCount);
    cfg.c = r.f64();
    auto points = read_points_section(r);
    read_and_check_params(
        r, derive_params(points->size(), eps, spec, cfg.lifted));
    std::size_t groups = 0, per_group = 0;
    auto tables = read_tables(r, groups, per_group, points->size());
    snap.expleb =
        ExhaustiveIndex::restore(std::move(points), cfg, std::move(tables));
    if (snap.expleb->groups() != groups ||
        snap.expleb->tables_per_group() != per_group)
      fail(path + ": stored table layout disagrees with the parameters");
    break;
  }
  case SnapshotKind::exactnn: {
    ExactNnIndex::Config cfg;
    cfg.hash = spec;
    cfg.lifted = r.u8() != 0;
    cfg.rung_cache = r.count(kMaxCount);
    cfg.range_cache = r.count(kMaxCount);
    auto points = read_points_section(r);
    snap.exactnn = std::make_shared<ExactNnIndex>(std::move(points), eps, cfg);
    break;
  }
  case SnapshotKind::rnn:
  case SnapshotKind::rnn_bi: {
    RnnIndex::Config cfg;
    cfg.hash = spec;
    cfg.rung_cache = r.count(kMaxCount);
    cfg.bucket_cache = r.count(kMaxCount);
    cfg.indexed_build = r.u8() != 0;
    auto points = read_points_section(r);
    std::shared_ptr<const PointSet> sites;
    if (kind == SnapshotKind::rnn_bi) sites = read_points_section(r);

    RnnIndex::Restored data;
    const std::size_t n = r.count(kMaxCount);
    data.nn_dists.resize(n);
    r.raw(data.nn_dists.data(), n * sizeof(double));

    const std::size_t zn = r.count(kMaxCount);
    data.zero_bucket.resize(zn);
    r.raw(data.zero_bucket.data(), zn * sizeof(PointId));

    const std::size_t bn = r.count(kMaxCount);
    for (std::size_t b = 0; b < bn; ++b) {
      const std::int64_t index = r.i64();
      const std::size_t sz = r.count(kMaxCount);
      std::vector<PointId> members(sz);
      r.raw(members.data(), sz * sizeof(PointId));
      if (!data.buckets.emplace(index, std::move(members)).second)
        fail(path + ": duplicate bucket in file");
    }

    const std::size_t sn = r.count(kMaxCount);
    data.reverse.resize(sn);
    for (std::size_t y = 0; y < sn; ++y) {
      const std::size_t sz = r.count(kMaxCount);
      data.reverse[y].reserve(sz);
      for (std::size_t i = 0; i < sz; ++i) {
        const double key = r.f64();
        const PointId p = r.u32();
        data.reverse[y].emplace_back(key, p);
      }
    }

    snap.rnn = kind == SnapshotKind::rnn_bi
                   ? RnnIndex::restore(std::move(points), std::move(sites),
                                       eps, cfg, std::move(data))
                   : RnnIndex::restore(std::move(points), eps, cfg,
                                       std::move(data));
    break;
  }
  }
  return snap;
}

} // namespace prox
