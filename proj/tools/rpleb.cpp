// rpleb: build, query, explore, and bench for the proximity index stack.
//
// Exit codes: 0 success, 1 invariant or acceptance failure (an oracle
// match rate under the threshold, a parameter bound violation), 2 usage
// or IO error. The environment variable RPLEB_SEED overrides --seed.

#include "CLI11.hpp"

#include "prox/io.hpp"
#include "prox/oracle.hpp"
#include "prox/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace prox;

namespace {

/// Problems with the invocation or the input files; mapped to exit 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& cli_seed) {
  if (const char* env = std::getenv("RPLEB_SEED")) {
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(env, &end, 0);
    if (end == env || *end != '\0' || errno != 0)
      throw UsageError("RPLEB_SEED is not an unsigned integer");
    return v;
  }
  if (cli_seed) return *cli_seed;
  return HashSpec{}.seed;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_ids(const std::vector<PointId>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(ids[i]);
  }
  return out;
}

/// Runs fn(i) for i in [0, n) on `threads` workers; any exception is
/// rethrown on the calling thread after everyone joined.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        failed.store(true);
        break;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

unsigned default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : std::min(hw, 8u);
}

// ---------------------------------------------------------------- build

struct BuildArgs {
  std::string input, out, kind_name, yellow;
  double eps = 0.0;
  double s = 2.0;
  std::optional<double> w;
  std::optional<std::uint64_t> seed;
  std::optional<double> r;
  bool no_lift = false;
};

int run_build(const BuildArgs& a) {
  const auto kind = snapshot_kind_from(a.kind_name);
  if (!kind)
    throw UsageError("unknown kind '" + a.kind_name +
                     "' (pleb, expleb, exactnn, rnn, rnn-bi)");
  HashSpec spec;
  spec.s = a.s;
  spec.w = a.w;
  spec.seed = resolve_seed(a.seed);

  auto points = std::make_shared<const PointSet>(load_points(a.input));
  const auto need_r = [&]() -> double {
    if (!a.r || !(*a.r > 0.0))
      throw UsageError("--r with a positive radius is required for kind " +
                       a.kind_name);
    return *a.r;
  };

  std::size_t n = points->size();
  switch (*kind) {
  case SnapshotKind::pleb: {
    if (a.no_lift)
      std::cerr << "note: --no-lift has no effect on kind pleb\n";
    PlebIndex idx(points, need_r(), a.eps, spec);
    save_index(idx, a.out);
    break;
  }
  case SnapshotKind::expleb: {
    ExhaustiveIndex::Config cfg;
    cfg.r = need_r();
    cfg.eps = a.eps;
    cfg.hash = spec;
    cfg.lifted = !a.no_lift;
    ExhaustiveIndex idx(points, cfg);
    save_index(idx, a.out);
    break;
  }
  case SnapshotKind::exactnn: {
    ExactNnIndex::Config cfg;
    cfg.hash = spec;
    cfg.lifted = !a.no_lift;
    ExactNnIndex idx(points, a.eps, cfg);
    save_index(idx, a.out);
    break;
  }
  case SnapshotKind::rnn: {
    if (a.no_lift)
      std::cerr << "note: --no-lift has no effect on kind rnn\n";
    RnnIndex::Config cfg;
    cfg.hash = spec;
    RnnIndex idx(points, a.eps, cfg);
    save_index(idx, a.out);
    break;
  }
  case SnapshotKind::rnn_bi: {
    if (a.yellow.empty())
      throw UsageError("--yellow <file> is required for kind rnn-bi");
    if (a.no_lift)
      std::cerr << "note: --no-lift has no effect on kind rnn-bi\n";
    auto yellow = std::make_shared<const PointSet>(load_points(a.yellow));
    RnnIndex::Config cfg;
    cfg.hash = spec;
    RnnIndex idx(points, yellow, a.eps, cfg);
    save_index(idx, a.out);
    break;
  }
  }
  std::cout << "wrote " << a.out << " kind=" << snapshot_kind_name(*kind)
            << " n=" << n << " seed=" << spec.seed << "\n";
  return 0;
}

// ---------------------------------------------------------------- query

struct QueryArgs {
  std::string index, queries, report;
  bool oracle_check = false;
  double min_match = 0.99;
  unsigned threads = 0; // 0: pick a default
};

const PointSet& reference_points(const Snapshot& snap) {
  switch (snap.kind) {
  case SnapshotKind::pleb: return snap.pleb->points();
  case SnapshotKind::expleb: return snap.expleb->points();
  case SnapshotKind::exactnn: return snap.exactnn->points();
  case SnapshotKind::rnn: return snap.rnn->points();
  case SnapshotKind::rnn_bi: return snap.rnn->sites();
  }
  throw UsageError("corrupt snapshot kind");
}

int run_query(const QueryArgs& a) {
  const Snapshot snap = load_index(a.index);
  const PointSet queries = load_points(a.queries);
  const PointSet& ref = reference_points(snap);
  if (queries.dim() != ref.dim())
    throw UsageError("query dimension " + std::to_string(queries.dim()) +
                     " does not match index dimension " +
                     std::to_string(ref.dim()));
  if (queries.s() != ref.s())
    throw UsageError("query norm order " + fmt(queries.s()) +
                     " does not match index norm order " + fmt(ref.s()));

  // Oracle inputs shared by every query.
  std::vector<double> rnn_nn;
  if (a.oracle_check && snap.kind == SnapshotKind::rnn)
    rnn_nn = all_nn_distances(snap.rnn->points());
  if (a.oracle_check && snap.kind == SnapshotKind::rnn_bi)
    rnn_nn = cross_nn_distances(snap.rnn->points(), snap.rnn->sites());

  std::string header;
  switch (snap.kind) {
  case SnapshotKind::pleb:
    header = "query,found,witness,dist,collisions,tables_probed";
    break;
  case SnapshotKind::expleb:
    header = "query,ids,collisions_in,collisions_out,distance_evals";
    break;
  case SnapshotKind::exactnn:
    header = "query,nearest,dist,candidates,condition,distance_evals,fallback";
    break;
  case SnapshotKind::rnn:
  case SnapshotKind::rnn_bi:
    header = "query,ids,site,site_dist,buckets_probed,tail_size,in_range";
    break;
  }
  if (a.oracle_check) header += ",oracle_match";

  const std::size_t n = queries.size();
  std::vector<std::string> rows(n);
  std::vector<char> matched(n, 1);

  auto run_one = [&](std::size_t i) {
    const auto q = queries[i];
    std::string row = std::to_string(i) + ",";
    bool ok = true;
    switch (snap.kind) {
    case SnapshotKind::pleb: {
      const auto res = snap.pleb->query(q);
      row += std::string(res.yes ? "1" : "0") + ",";
      row += res.yes ? std::to_string(res.witness) : std::string();
      row += ",";
      row += res.yes ? fmt(res.dist) : std::string();
      row += "," + std::to_string(res.collisions) + "," +
             std::to_string(res.tables_probed);
      if (a.oracle_check) {
        const double cap = snap.pleb->r() * (1.0 + snap.pleb->eps());
        ok = res.yes
                 ? res.dist <= cap
                 : oracle_range(ref, q, snap.pleb->r()).empty();
      }
      break;
    }
    case SnapshotKind::expleb: {
      const auto res = snap.expleb->query(q);
      row += join_ids(res.points) + "," +
             std::to_string(res.collisions_inside) + "," +
             std::to_string(res.collisions_outside) + "," +
             std::to_string(res.distance_evals);
      if (a.oracle_check)
        ok = res.points == oracle_range(ref, q, snap.expleb->r());
      break;
    }
    case SnapshotKind::exactnn: {
      const auto res = snap.exactnn->query(q);
      row += std::to_string(res.nearest) + "," + fmt(res.dist) + "," +
             std::to_string(res.candidates) + "," +
             std::to_string(res.condition) + "," +
             std::to_string(res.distance_evals) + "," +
             (res.fallback ? "1" : "0");
      if (a.oracle_check) ok = res.dist == oracle_nn(ref, q).dist;
      break;
    }
    case SnapshotKind::rnn:
    case SnapshotKind::rnn_bi: {
      const auto res = snap.rnn->query(q);
      row += join_ids(res.result) + "," + std::to_string(res.site) + "," +
             fmt(res.site_dist) + "," + std::to_string(res.buckets_probed) +
             "," + std::to_string(res.tail_size) + "," +
             (res.in_range ? "1" : "0");
      if (a.oracle_check) {
        const auto want =
            snap.kind == SnapshotKind::rnn
                ? oracle_rnn(snap.rnn->points(), q, rnn_nn)
                : oracle_rnn_bichromatic(snap.rnn->points(),
                                         snap.rnn->sites(), q, rnn_nn);
        ok = res.result == want;
      }
      break;
    }
    }
    if (a.oracle_check) row += ok ? ",1" : ",0";
    rows[i] = std::move(row);
    matched[i] = ok ? 1 : 0;
  };

  const unsigned threads = a.threads ? a.threads : default_threads();
  parallel_for(n, threads, run_one);

  std::ofstream out(a.report);
  if (!out) throw UsageError("cannot open " + a.report + " for writing");
  out << header << "\n";
  for (const auto& row : rows) out << row << "\n";
  out.close();
  if (!out) throw UsageError("write error on " + a.report);

  if (a.oracle_check) {
    const std::size_t hits =
        std::size_t(std::count(matched.begin(), matched.end(), char(1)));
    const double rate = n == 0 ? 1.0 : double(hits) / double(n);
    std::cout << "oracle_match_rate=" << fmt(rate) << " (" << hits << "/" << n
              << ")\n";
    if (rate < a.min_match) return 1;
  }
  return 0;
}

// -------------------------------------------------------------- explore

struct ExploreArgs {
  double s = 2.0;
  std::string grid, out;
};

int run_explore(const ExploreArgs& a) {
  double lo = 0.0, hi = 0.0;
  std::size_t steps = 0;
  {
    std::istringstream in(a.grid);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(in, part, ':')) parts.push_back(part);
    if (parts.size() != 3)
      throw UsageError("--eps-grid wants lo:hi:steps, got '" + a.grid + "'");
    try {
      lo = std::stod(parts[0]);
      hi = std::stod(parts[1]);
      steps = std::stoul(parts[2]);
    } catch (const std::exception&) {
      throw UsageError("--eps-grid wants numbers lo:hi:steps, got '" + a.grid +
                       "'");
    }
  }
  if (!(lo > 0.0) || !(hi >= lo) || steps == 0)
    throw UsageError("--eps-grid wants 0 < lo <= hi and steps >= 1");

  const auto rows = sweep_grid(lo, hi, steps, a.s);
  std::ofstream out(a.out);
  if (!out) throw UsageError("cannot open " + a.out + " for writing");
  out << sweep_csv(rows);
  out.close();
  if (!out) throw UsageError("write error on " + a.out);

  std::size_t bad = 0;
  for (const auto& row : rows)
    if (!row.bound_ok) {
      ++bad;
      std::cout << "bound violated at eps=" << fmt(row.eps)
                << " rho=" << fmt(row.rho) << " cap=" << fmt(row.bound_rho)
                << "\n";
    }
  std::cout << "rows=" << rows.size() << " bound_ok=" << (rows.size() - bad)
            << "\n";
  return bad == 0 ? 0 : 1;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::vector<std::string> indexes;
  std::string queries, out;
  std::size_t batch = 100;
};

struct BenchTotals {
  double cost = 0.0;
  double out_collisions = 0.0;
};

int run_bench(const BenchArgs& a) {
  if (a.indexes.empty()) throw UsageError("bench wants at least one --index");
  if (a.batch == 0) throw UsageError("--batch must be >= 1");
  const PointSet queries = load_points(a.queries);

  std::ofstream out(a.out);
  if (!out) throw UsageError("cannot open " + a.out + " for writing");
  out << "index,kind,n,batch,size,mean_cost,mean_collisions_out,"
         "collision_bound,bound_ok,elapsed_us,qps\n";

  std::vector<double> fit_n, fit_cost;
  for (const auto& path : a.indexes) {
    const Snapshot snap = load_index(path);
    const PointSet& ref = reference_points(snap);
    if (queries.dim() != ref.dim())
      throw UsageError("query dimension does not match index " + path);
    const std::size_t n =
        snap.kind == SnapshotKind::rnn_bi || snap.kind == SnapshotKind::rnn
            ? snap.rnn->points().size()
            : ref.size();

    // The Lemma-style cap applies to the exhaustive reporter: collisions
    // with points outside the slack ball stay under 2 per table.
    std::string bound_text;
    double bound = 0.0;
    if (snap.kind == SnapshotKind::expleb) {
      bound = 2.0 * double(snap.expleb->params().L) *
              double(snap.expleb->groups());
      bound_text = fmt(bound);
    }

    BenchTotals grand{};
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < queries.size();
         start += a.batch, ++batch_no) {
      const std::size_t stop = std::min(queries.size(), start + a.batch);
      BenchTotals totals{};
      const auto t0 = std::chrono::steady_clock::now();
      for (std::size_t i = start; i < stop; ++i) {
        const auto q = queries[i];
        switch (snap.kind) {
        case SnapshotKind::pleb: {
          const auto res = snap.pleb->query(q);
          totals.cost += double(res.collisions + res.tables_probed);
          break;
        }
        case SnapshotKind::expleb: {
          const auto res = snap.expleb->query(q);
          totals.cost += double(res.collisions_inside +
                                res.collisions_outside + res.tables_probed +
                                res.distance_evals);
          totals.out_collisions += double(res.collisions_outside);
          break;
        }
        case SnapshotKind::exactnn: {
          const auto res = snap.exactnn->query(q);
          totals.cost += double(res.candidates + res.distance_evals);
          break;
        }
        case SnapshotKind::rnn:
        case SnapshotKind::rnn_bi: {
          const auto res = snap.rnn->query(q);
          totals.cost += double(res.buckets_probed + res.tail_size +
                                res.candidates.size());
          break;
        }
        }
      }
      const auto t1 = std::chrono::steady_clock::now();
      const double us =
          double(std::chrono::duration_cast<std::chrono::microseconds>(t1 -
                                                                        t0)
                     .count());
      const std::size_t size = stop - start;
      const double mean_cost = totals.cost / double(size);
      const double mean_out = totals.out_collisions / double(size);
      out << path << "," << snapshot_kind_name(snap.kind) << "," << n << ","
          << batch_no << "," << size << "," << fmt(mean_cost) << ","
          << fmt(mean_out) << "," << bound_text << ",";
      if (!bound_text.empty()) out << (mean_out <= bound ? "1" : "0");
      out << "," << fmt(us) << ","
          << fmt(us > 0.0 ? 1e6 * double(size) / us : 0.0) << "\n";
      grand.cost += totals.cost;
      grand.out_collisions += totals.out_collisions;
    }
    if (queries.size() > 0) {
      fit_n.push_back(double(n));
      fit_cost.push_back(grand.cost / double(queries.size()));
    }
  }

  // Log-log regression of mean query cost against the point count; the
  // slope estimates the growth exponent.
  bool have_fit = false;
  double slope = 0.0;
  {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < fit_n.size(); ++i)
      if (fit_cost[i] > 0.0) {
        xs.push_back(std::log(fit_n[i]));
        ys.push_back(std::log(fit_cost[i]));
      }
    const double m = double(xs.size());
    if (xs.size() >= 2) {
      double mx = 0, my = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
      mx /= m;
      my /= m;
      double sxx = 0, sxy = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
      }
      if (sxx > 0) {
        slope = sxy / sxx;
        have_fit = true;
      }
    }
  }
  if (have_fit) {
    out << "(fit),,,,," << fmt(slope) << ",,,,,\n";
    std::cout << "cost_exponent=" << fmt(slope) << "\n";
  }
  out.close();
  if (!out) throw UsageError("write error on " + a.out);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"LSH proximity index toolkit"};
  app.require_subcommand(1);

  BuildArgs build_args;
  auto* build = app.add_subcommand("build", "build an index snapshot");
  build->add_option("--input", build_args.input, "point file (csv or binary)")
      ->required();
  build->add_option("--kind", build_args.kind_name,
                    "pleb | expleb | exactnn | rnn | rnn-bi")
      ->required();
  build->add_option("--eps", build_args.eps, "approximation factor")
      ->required()
      ->check(CLI::PositiveNumber);
  build->add_option("--s", build_args.s, "norm order (1 or 2)")
      ->required()
      ->check(CLI::IsMember({1.0, 2.0}));
  build->add_option("--w", build_args.w, "bucket width (default max{1,eps})");
  build->add_option("--seed", build_args.seed, "hash seed");
  build->add_option("--r", build_args.r, "ball radius (pleb and expleb)");
  build->add_option("--yellow", build_args.yellow,
                    "competitor point file (rnn-bi)");
  build->add_flag("--no-lift", build_args.no_lift,
                  "hash in the original space (expleb, exactnn)");
  build->add_option("--out", build_args.out, "snapshot path")->required();

  QueryArgs query_args;
  auto* query = app.add_subcommand("query", "answer queries from a snapshot");
  query->add_option("--index", query_args.index, "snapshot path")->required();
  query->add_option("--queries", query_args.queries, "query point file")
      ->required();
  query->add_option("--report", query_args.report, "per-query csv")
      ->required();
  query->add_flag("--oracle-check", query_args.oracle_check,
                  "compare answers to a brute-force scan");
  query->add_option("--min-match", query_args.min_match,
                    "lowest acceptable oracle match rate (default 0.99)");
  query->add_option("--threads", query_args.threads, "worker threads");

  ExploreArgs explore_args;
  auto* explore =
      app.add_subcommand("explore", "parameter landscape sweep to csv");
  explore->add_option("--s", explore_args.s, "norm order (1 or 2)")
      ->required()
      ->check(CLI::IsMember({1.0, 2.0}));
  explore->add_option("--eps-grid", explore_args.grid,
                      "lo:hi:steps, log10-spaced")
      ->required();
  explore->add_option("--out", explore_args.out, "csv path")->required();

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "query cost and latency harness");
  bench->add_option("--index", bench_args.indexes,
                    "snapshot path (repeatable; several sizes give a "
                    "cost-scaling fit)")
      ->required();
  bench->add_option("--queries", bench_args.queries, "query point file")
      ->required();
  bench->add_option("--batch", bench_args.batch, "queries per batch row");
  bench->add_option("--out", bench_args.out, "csv path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e); // prints help or the parse message
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (build->parsed()) return run_build(build_args);
    if (query->parsed()) return run_query(query_args);
    if (explore->parsed()) return run_explore(explore_args);
    if (bench->parsed()) return run_bench(bench_args);
    std::cerr << "no subcommand\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
