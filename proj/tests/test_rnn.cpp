#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "prox/exhaustive_pleb.hpp"
#include "prox/oracle.hpp"
#include "prox/rnn.hpp"
#include "test_data.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

using namespace prox;

namespace {

std::shared_ptr<PointSet> line_points(std::vector<double> xs) {
  auto ps = std::make_shared<PointSet>(1, 2.0);
  for (double x : xs) ps->add(std::vector<double>{x});
  return ps;
}

std::vector<PointId> array_ids(const RnnIndex& idx, PointId y) {
  std::vector<PointId> ids;
  for (const auto& [key, p] : idx.reverse_array(y)) ids.push_back(p);
  std::sort(ids.begin(), ids.end());
  return ids;
}

bool subset(const std::vector<PointId>& a, const std::vector<PointId>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

} // namespace

TEST_CASE("collinear triple lands in the expected buckets and arrays") {
  auto ps = line_points({0.0, 1.0, 3.0});
  RnnIndex idx(ps, 0.5);

  REQUIRE(idx.nn_dists().size() == 3);
  CHECK(idx.nn_dists()[0] == 1.0);
  CHECK(idx.nn_dists()[1] == 1.0);
  CHECK(idx.nn_dists()[2] == 2.0);
  CHECK(idx.zero_bucket().empty());

  // nn_dist 1 sits in [1, 1.5) and nn_dist 2 in [1.5, 2.25)
  const auto& buckets = idx.buckets();
  REQUIRE(buckets.size() == 2);
  REQUIRE(buckets.count(1) == 1);
  REQUIRE(buckets.count(2) == 1);
  CHECK(buckets.at(1) == std::vector<PointId>{0, 1});
  CHECK(buckets.at(2) == std::vector<PointId>{2});

  CHECK(array_ids(idx, 0) == std::vector<PointId>{0, 1, 2});
  CHECK(array_ids(idx, 1) == std::vector<PointId>{0, 1, 2});
  CHECK(array_ids(idx, 2) == std::vector<PointId>{2});

  const auto rep = idx.query(std::vector<double>{0.4});
  CHECK(rep.result == std::vector<PointId>{0, 1});
}

TEST_CASE("bucket reporters share the global repetition policy") {
  auto ps = random_cloud(80, 4, 2.0, 6.0, 11);
  RnnIndex idx(ps, 0.5);
  REQUIRE(idx.bucket_count() == idx.buckets().size());
  std::size_t pos = 0;
  for (const auto& [index, members] : idx.buckets()) {
    const auto rep = idx.bucket_index(pos);
    CHECK(rep->r() == std::pow(1.5, double(index)));
    CHECK(rep->eps() == 0.5);
    CHECK(rep->lifted());
    CHECK(rep->config().m == ps->size());
    CHECK(rep->config().c == kExhaustiveRepetitionRate);
    CHECK(rep->points().size() == members.size());
    ++pos;
  }
  CHECK_THROWS_AS(idx.bucket_index(pos), std::out_of_range);
}

TEST_CASE("buckets partition the points by nearest-neighbor distance") {
  auto ps = random_cloud(120, 5, 2.0, 8.0, 21);
  // six exact duplicates
  for (PointId p = 0; p < 6; ++p) ps->add((*ps)[p * 7]);
  const double eps = 0.7;
  RnnIndex idx(ps, eps);

  const auto nn = all_nn_distances(*ps);
  REQUIRE(idx.nn_dists().size() == nn.size());
  for (std::size_t i = 0; i < nn.size(); ++i) CHECK(idx.nn_dists()[i] == nn[i]);

  std::vector<PointId> all = idx.zero_bucket();
  for (const PointId p : idx.zero_bucket()) CHECK(nn[p] == 0.0);
  for (const auto& [index, members] : idx.buckets()) {
    const double lo = std::pow(1.0 + eps, double(index - 1));
    const double hi = std::pow(1.0 + eps, double(index));
    for (const PointId p : members) {
      CHECK(nn[p] >= lo);
      CHECK(nn[p] < hi);
      all.push_back(p);
    }
  }
  std::sort(all.begin(), all.end());
  REQUIRE(all.size() == ps->size());
  for (PointId p = 0; p < ps->size(); ++p) CHECK(all[p] == p);
}

TEST_CASE("reverse arrays hold exactly the relaxed reverse neighbors") {
  auto ps = random_cloud(150, 4, 2.0, 7.0, 31);
  const double eps = 0.5;
  RnnIndex idx(ps, eps);
  const auto nn = all_nn_distances(*ps);
  for (PointId y = 0; y < ps->size(); y += 17) {
    const auto expect = oracle_eps_rnn(*ps, (*ps)[y], eps, nn);
    CHECK(array_ids(idx, y) == expect);
    // keys ascend and carry each member's nn_dist
    const auto arr = idx.reverse_array(y);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      CHECK(arr[i].first == nn[arr[i].second]);
      if (i > 0) CHECK(arr[i - 1].first <= arr[i].first);
    }
  }
}

TEST_CASE("random queries match the scan answer") {
  auto ps = random_cloud(300, 6, 2.0, 10.0, 41);
  const double eps = 0.5;
  RnnIndex idx(ps, eps);
  const auto nn = all_nn_distances(*ps);
  const double relaxed = eps * (2.0 + eps);

  SplitMix64 rng(42);
  std::size_t exact = 0, trials = 0;
  for (int t = 0; t < 150; ++t) {
    std::vector<double> q;
    const PointId base = PointId(rng.next() % ps->size());
    if (t % 5 == 0) {
      q = point_copy(*ps, base); // exactly on a data point
    } else {
      q = displaced(point_copy(*ps, base), 2.0, 0.3 + 2.0 * rng.next_unit(),
                    rng.next());
    }
    const auto rep = idx.query(q);
    const auto truth = oracle_rnn(*ps, q, nn);

    // the final filter is the exact predicate, so no false positives ever
    CHECK(subset(rep.result, truth));
    // candidates stay inside the relaxed reverse-neighbor ball
    for (const PointId p : rep.candidates)
      CHECK(ps->distance_to(p, q) <= (1.0 + relaxed) * nn[p] + 1e-9);
    CHECK(rep.buckets_probed <= idx.bucket_probe_bound());

    ++trials;
    if (rep.result == truth) ++exact;
  }
  CHECK(trials == 150);
  CHECK(exact >= 144);
}

TEST_CASE("answers above the window always sit in the site array") {
  auto ps = random_cloud(200, 5, 2.0, 9.0, 51);
  const double eps = 0.5;
  RnnIndex idx(ps, eps);
  const auto nn = all_nn_distances(*ps);

  SplitMix64 rng(52);
  std::size_t floor_violations = 0;
  for (int t = 0; t < 60; ++t) {
    const auto q = displaced(point_copy(*ps, PointId(rng.next() % 200)), 2.0,
                             0.2 + 1.5 * rng.next_unit(), rng.next());
    const auto rep = idx.query(q);
    if (!rep.in_range) continue;
    const double d_qy = rep.site_dist;
    const auto truth = oracle_rnn(*ps, q, nn);
    for (const PointId p : truth) {
      if (nn[p] == 0.0) continue;
      // a near-optimal site keeps every answer's bucket above the floor
      if (nn[p] < d_qy / (1.0 + eps) * (1.0 - 1e-12)) ++floor_violations;
      if (nn[p] >= d_qy / eps) {
        const auto ids = array_ids(idx, rep.site);
        CHECK(std::binary_search(ids.begin(), ids.end(), p));
      }
    }
  }
  CHECK(floor_violations == 0);
}

TEST_CASE("coordinate duplicates answer only exact hits") {
  auto ps = random_cloud(100, 4, 2.0, 8.0, 61);
  const std::vector<double> twin = point_copy(*ps, 10);
  ps->add(twin);
  ps->add(twin); // ids 100 and 101 duplicate id 10
  RnnIndex idx(ps, 0.5);

  std::vector<PointId> zero = idx.zero_bucket();
  CHECK(zero == std::vector<PointId>{10, 100, 101});

  const auto on = idx.query(twin);
  for (const PointId p : {PointId(10), PointId(100), PointId(101)})
    CHECK(std::binary_search(on.result.begin(), on.result.end(), p));

  auto off = twin;
  off[0] += 0.05;
  const auto near = idx.query(off);
  for (const PointId p : {PointId(10), PointId(100), PointId(101)})
    CHECK_FALSE(std::binary_search(near.result.begin(), near.result.end(), p));
}

TEST_CASE("far queries report empty without probing") {
  auto ps = random_cloud(60, 3, 2.0, 5.0, 71);
  RnnIndex idx(ps, 0.5);
  const std::vector<double> q{1e7, 1e7, 1e7};
  const auto rep = idx.query(q);
  CHECK(rep.result.empty());
  CHECK(rep.candidates.empty());
  CHECK_FALSE(rep.in_range);
  CHECK(rep.buckets_probed == 0);
}

TEST_CASE("one seed yields one behavior") {
  auto ps = random_cloud(90, 4, 2.0, 6.0, 81);
  RnnIndex::Config cfg;
  cfg.hash.seed = 977;
  RnnIndex a(ps, 0.6, cfg);
  RnnIndex b(ps, 0.6, cfg);
  SplitMix64 rng(83);
  for (int t = 0; t < 25; ++t) {
    const auto q = displaced(point_copy(*ps, PointId(rng.next() % 90)), 2.0,
                             1.2 * rng.next_unit(), rng.next());
    const auto ra = a.query(q);
    const auto rb = b.query(q);
    CHECK(ra.result == rb.result);
    CHECK(ra.candidates == rb.candidates);
    CHECK(ra.site == rb.site);
    CHECK(ra.buckets_probed == rb.buckets_probed);
    CHECK(ra.tail_size == rb.tail_size);
  }
}

TEST_CASE("bichromatic line instance answers by color") {
  auto blue = line_points({0.0, 2.0, 5.0});
  auto yellow = line_points({1.0, 6.0});
  RnnIndex idx(blue, yellow, 0.5);
  CHECK(idx.bichromatic());

  // nn_dist is each blue's distance to the yellow set
  CHECK(idx.nn_dists() == std::vector<double>{1.0, 1.0, 1.0});

  const auto a = idx.query(std::vector<double>{1.9});
  CHECK(a.result == std::vector<PointId>{1});
  const auto b = idx.query(std::vector<double>{5.5});
  CHECK(b.result == std::vector<PointId>{2});
}

TEST_CASE("bichromatic answers survive a window floor below the site gap") {
  // the lone blue point is a true answer, yet its bucket sits under
  // d(q,y)/(1+eps): only the halved floor reaches it
  auto blue = line_points({1.49});
  auto yellow = line_points({0.0});
  RnnIndex idx(blue, yellow, 0.5);
  CHECK(idx.scan_sites());
  REQUIRE(idx.buckets().count(1) == 1);

  const auto rep = idx.query(std::vector<double>{2.98});
  CHECK(rep.site == 0);
  CHECK(rep.site_dist == 2.98);
  CHECK(rep.result == std::vector<PointId>{0});
}

TEST_CASE("bichromatic queries match the scan answer") {
  auto blue = random_cloud(200, 5, 2.0, 9.0, 91);
  auto yellow = random_cloud(150, 5, 2.0, 9.0, 92);
  const double eps = 0.5;
  RnnIndex idx(blue, yellow, eps);
  const auto nn = cross_nn_distances(*blue, *yellow);
  const double relaxed = eps * (2.0 + eps);

  SplitMix64 rng(93);
  std::size_t exact = 0;
  for (int t = 0; t < 100; ++t) {
    const auto q = displaced(point_copy(*blue, PointId(rng.next() % 200)), 2.0,
                             0.2 + 1.8 * rng.next_unit(), rng.next());
    const auto rep = idx.query(q);
    const auto truth = oracle_rnn_bichromatic(*blue, *yellow, q, nn);
    CHECK(subset(rep.result, truth));
    for (const PointId p : rep.candidates)
      CHECK(blue->distance_to(p, q) <= (1.0 + relaxed) * nn[p] + 1e-9);
    CHECK(rep.buckets_probed <= idx.bucket_probe_bound());
    if (rep.result == truth) ++exact;
  }
  CHECK(exact >= 96);
}

TEST_CASE("equal color sets reduce to exact coincidence") {
  auto ps = random_cloud(40, 3, 2.0, 5.0, 101);
  RnnIndex idx(ps, ps, 0.5);
  // every blue point touches itself in yellow, so nn_dist is zero across
  // the board and only exact hits answer
  CHECK(idx.zero_bucket().size() == 40);
  CHECK(idx.buckets().empty());

  const auto on = idx.query((*ps)[7]);
  CHECK(on.result == std::vector<PointId>{7});
  const auto off = idx.query(displaced(point_copy(*ps, 7), 2.0, 0.01, 3));
  CHECK(off.result.empty());
}

TEST_CASE("single blue and single yellow") {
  auto blue = std::make_shared<PointSet>(2, 2.0);
  blue->add(std::vector<double>{3.0, 3.0});
  auto yellow = std::make_shared<PointSet>(2, 2.0);
  yellow->add(std::vector<double>{0.0, 0.0});
  RnnIndex idx(blue, yellow, 0.5);
  CHECK(idx.scan_sites());

  const auto in = idx.query(std::vector<double>{1.0, 1.0});
  CHECK(in.result == std::vector<PointId>{0});
  CHECK(in.site_by_scan);
  const auto out = idx.query(std::vector<double>{9.0, 9.0});
  CHECK(out.result.empty());
}

TEST_CASE("no blue points means every answer is empty") {
  auto blue = std::make_shared<PointSet>(2, 2.0);
  auto yellow = random_cloud(20, 2, 2.0, 4.0, 111);
  RnnIndex idx(blue, yellow, 0.5);
  const auto rep = idx.query(std::vector<double>{1.0, 1.0});
  CHECK(rep.result.empty());
  CHECK(rep.candidates.empty());
}

TEST_CASE("a blue twin of a site keys on the next site over") {
  auto blue = line_points({0.0, 1.0});
  auto yellow = line_points({0.0, 4.0});
  RnnIndex idx(blue, yellow, 0.5);

  // blue 0 coincides with yellow 0, so its array key is d(yellow 0, other
  // yellows) = 4 rather than its own zero nn_dist
  const auto arr0 = idx.reverse_array(0);
  REQUIRE(arr0.size() == 2);
  CHECK(arr0[0].first == 1.0);
  CHECK(arr0[0].second == 1);
  CHECK(arr0[1].first == 4.0);
  CHECK(arr0[1].second == 0);
  CHECK(idx.reverse_array(1).empty());

  // with a lone site the twin key degenerates to infinity
  RnnIndex lone(line_points({0.0}), line_points({0.0}), 0.5);
  const auto arr = lone.reverse_array(0);
  REQUIRE(arr.size() == 1);
  CHECK(std::isinf(arr[0].first));
  CHECK(arr[0].second == 0);
}

TEST_CASE("indexed nn_dist computation stays close to the scan") {
  auto ps = random_cloud(200, 4, 2.0, 8.0, 121);
  RnnIndex::Config cfg;
  cfg.indexed_build = true;
  RnnIndex idx(ps, 0.5, cfg);
  const auto nn = all_nn_distances(*ps);

  std::size_t match = 0;
  for (std::size_t i = 0; i < nn.size(); ++i)
    if (idx.nn_dists()[i] == nn[i]) ++match;
  CHECK(match >= 194);

  SplitMix64 rng(122);
  std::size_t exact = 0;
  for (int t = 0; t < 30; ++t) {
    const auto q = displaced(point_copy(*ps, PointId(rng.next() % 200)), 2.0,
                             0.2 + rng.next_unit(), rng.next());
    if (idx.query(q).result == oracle_rnn(*ps, q, nn)) ++exact;
  }
  CHECK(exact >= 27);
}

TEST_CASE("construction rejects bad arguments") {
  auto one = line_points({1.0});
  CHECK_THROWS_AS(RnnIndex(one, 0.5), std::invalid_argument);

  auto ps = line_points({0.0, 1.0});
  CHECK_THROWS_AS(RnnIndex(ps, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(RnnIndex(ps, -1.0), std::invalid_argument);

  RnnIndex::Config bad;
  bad.hash.s = 1.0;
  CHECK_THROWS_AS(RnnIndex(ps, 0.5, bad), std::invalid_argument);

  auto flat = std::make_shared<PointSet>(2, 2.0);
  flat->add(std::vector<double>{0.0, 0.0});
  CHECK_THROWS_AS(RnnIndex(ps, flat, 0.5), std::invalid_argument);

  auto empty_y = std::make_shared<PointSet>(1, 2.0);
  CHECK_THROWS_AS(RnnIndex(ps, empty_y, 0.5), std::invalid_argument);

  RnnIndex ok(ps, 0.5);
  CHECK_THROWS_AS(ok.reverse_array(2), std::out_of_range);
  CHECK_THROWS_AS(ok.query(std::vector<double>{1.0, 2.0}),
                  std::invalid_argument);
}
