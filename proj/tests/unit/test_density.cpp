#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "../support/oracles.hpp"
#include "advpol/density/cover_buffer.hpp"

using namespace advpol;
using namespace advpol::testing;

namespace {

StateMatrix rows_of(std::initializer_list<std::vector<double>> pts) {
  StateMatrix m;
  for (const auto& p : pts) m.append(p);
  return m;
}

CoverBuffer raw_buffer(const StateMatrix& pts, KnnBackend backend = KnnBackend::kSerial) {
  CoverBuffer b(pts.cols(), CoverBufferOptions{.normalize = false, .backend = backend});
  b.insert(pts, 0);
  return b;
}

// Exhaustive oracle: sort every eligible distance and pick the k-th.
double sorted_kth(const StateMatrix& pts, std::span<const double> q, std::size_t k, std::size_t skip) {
  std::vector<double> d;
  for (std::size_t i = 0; i < pts.rows(); ++i) {
    if (i == skip) continue;
    double s = 0.0;
    for (std::size_t j = 0; j < pts.cols(); ++j) s += (pts(i, j) - q[j]) * (pts(i, j) - q[j]);
    d.push_back(std::sqrt(s));
  }
  std::sort(d.begin(), d.end());
  return d[k - 1];
}

}  // namespace

TEST_SUITE("density") {
  TEST_CASE("nearest neighbour worked examples") {
    const CoverBuffer b = raw_buffer(rows_of({{0, 0}, {1, 0}, {0, 1}}));
    CHECK(b.knn_distance(std::vector<double>{0.1, 0.0}, 1) == doctest::Approx(0.1).epsilon(1e-15));
    // A member query skips itself.
    CHECK(b.knn_distance(std::vector<double>{0.0, 0.0}, 1, 0) == 1.0);
    CHECK(b.knn_distance(std::vector<double>{0.0, 0.0}, 1) == 0.0);

    const StateMatrix four = rows_of({{0, 0}, {3, 0}, {0, 1}, {2, 2}});
    const CoverBuffer b4 = raw_buffer(four);
    const std::vector<double> q = {0.5, 0.5};
    CHECK(b4.knn_distance(q, 3) == sorted_kth(four, q, 3, kNoExclusion));
    CHECK_THROWS_AS(b4.knn_distance(q, 5), std::invalid_argument);
    CHECK_THROWS_AS(b4.knn_distance(q, 4, 0), std::invalid_argument);
  }

  TEST_CASE("density is the regularized inverse distance") {
    const StateMatrix dup = rows_of({{1, 1}, {1, 1}, {1, 1}});
    const CoverBuffer b = raw_buffer(dup);
    const std::size_t ex[1] = {0};
    const auto d = estimate_density(b, rows_of({{1, 1}}), ex, 1, 1e-6);
    CHECK(d[0].distance == 0.0);
    CHECK(d[0].density == 1.0 / 1e-6);
    CHECK(std::isfinite(d[0].density));

    const CoverBuffer one = raw_buffer(rows_of({{0, 0}}));
    const auto e = estimate_density(one, rows_of({{1, 0}}), {}, 1, 1e-6);
    CHECK(std::abs(e[0].density - 1.0) < 1e-5);
    CHECK_THROWS_AS(estimate_density(one, rows_of({{1, 0}}), {}, 1, 0.0), std::invalid_argument);
  }

  TEST_CASE("a regular grid has near-uniform density") {
    StateMatrix grid;
    for (int i = 0; i < 32; ++i)
      for (int j = 0; j < 32; ++j) grid.append(std::vector<double>{i / 31.0, j / 31.0});
    CoverBuffer b(2, {});
    const auto rows = b.insert(grid, 0);
    const auto d = estimate_density(b, grid, rows, 1, 1e-6);
    double lo = d[0].density, hi = d[0].density;
    for (const auto& x : d) {
      lo = std::min(lo, x.density);
      hi = std::max(hi, x.density);
    }
    CHECK(hi / lo <= 2.0);
  }

  TEST_CASE("entropy proxy orders spread and responds to scale") {
    auto rng = make_rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.5, 0.05);
    StateMatrix uni(2000, 2), gauss(2000, 2);
    for (std::size_t i = 0; i < 2000; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        uni(i, j) = u(rng);
        gauss(i, j) = g(rng);
      }
    }
    CHECK(entropy_estimate(raw_buffer(uni), 10, 1e-6) > entropy_estimate(raw_buffer(gauss), 10, 1e-6));

    const StateMatrix same = rows_of({{2, 3}, {2, 3}, {2, 3}, {2, 3}});
    CHECK(entropy_estimate(raw_buffer(same), 1, 1e-6) == doctest::Approx(std::log(1e-6)).epsilon(1e-12));

    StateMatrix doubled = uni;
    for (double& x : doubled.data()) x *= 2.0;
    const double h1 = entropy_estimate(raw_buffer(uni), 1, 0.0);
    const double h2 = entropy_estimate(raw_buffer(doubled), 1, 0.0);
    CHECK(h2 - h1 == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    CHECK_THROWS_AS(entropy_estimate(raw_buffer(rows_of({{0, 0}, {1, 1}})), 2, 1e-6), std::invalid_argument);
  }

  TEST_CASE("all backends agree bit for bit with the exhaustive scan") {
    auto rng = make_rng(22);
    CoverBuffer serial(3, {.backend = KnnBackend::kSerial});
    CoverBuffer parallel(3, {.backend = KnnBackend::kParallel});
    CoverBuffer tree(3, {.backend = KnnBackend::kKdTree});
    // Several insertions so the forest holds more than one tree.
    for (int it = 0; it < 5; ++it) {
      const StateMatrix pts = random_matrix(400 + 37 * it, 3, rng);
      serial.insert(pts, it);
      parallel.insert(pts, it);
      tree.insert(pts, it);
    }
    const StateMatrix q = random_matrix(1000, 3, rng, 1.5);
    std::vector<std::size_t> ex(1000, kNoExclusion);
    for (std::size_t i = 0; i < 1000; i += 3) ex[i] = i;  // some queries skip a stored row
    for (std::size_t k : {1, 10}) {
      const auto a = serial.knn_distances(q, ex, k);
      CHECK(parallel.knn_distances(q, ex, k) == a);
      CHECK(tree.knn_distances(q, ex, k) == a);
    }
  }

  TEST_CASE("per-dimension affine rescaling keeps the neighbour ranking when normalizing") {
    auto rng = make_rng(23);
    const StateMatrix pts = random_matrix(300, 2, rng);
    const StateMatrix q = random_matrix(50, 2, rng);
    StateMatrix spts = pts, sq = q;
    const double a[2] = {7.0, 0.02}, c[2] = {-3.0, 11.0};
    for (std::size_t i = 0; i < spts.rows(); ++i)
      for (std::size_t j = 0; j < 2; ++j) spts(i, j) = a[j] * pts(i, j) + c[j];
    for (std::size_t i = 0; i < sq.rows(); ++i)
      for (std::size_t j = 0; j < 2; ++j) sq(i, j) = a[j] * q(i, j) + c[j];
    CoverBuffer b1(2, {}), b2(2, {});
    b1.insert(pts, 0);
    b2.insert(spts, 0);
    const auto s1 = b1.inv_scale(), s2 = b2.inv_scale();
    for (std::size_t i = 0; i < q.rows(); ++i) {
      // Identify the 3rd neighbour by scanning each space in its own normalized coordinates.
      auto kth_index = [](const StateMatrix& p, std::span<const double> x, const std::vector<double>& s) {
        std::vector<std::pair<double, std::size_t>> d;
        for (std::size_t r = 0; r < p.rows(); ++r) d.push_back({squared_distance(p.row(r).data(), x.data(), s.data(), 2), r});
        std::sort(d.begin(), d.end());
        return d[2].second;
      };
      CHECK(kth_index(pts, q.row(i), s1) == kth_index(spts, sq.row(i), s2));
    }
    const auto d1 = b1.knn_distances(q, {}, 3);
    const auto d2 = b2.knn_distances(sq, {}, 3);
    for (std::size_t i = 0; i < d1.size(); ++i) CHECK(d1[i] == doctest::Approx(d2[i]).epsilon(1e-9));
  }

  TEST_CASE("adding points never increases a distance") {
    auto rng = make_rng(24);
    CoverBuffer b(2, {.normalize = false});
    b.insert(random_matrix(50, 2, rng), 0);
    const StateMatrix q = random_matrix(200, 2, rng);
    auto before = b.knn_distances(q, {}, 5);
    for (int it = 1; it < 6; ++it) {
      b.insert(random_matrix(40, 2, rng), it);
      const auto after = b.knn_distances(q, {}, 5);
      for (std::size_t i = 0; i < after.size(); ++i) REQUIRE(after[i] <= before[i]);
      before = after;
    }
  }

  TEST_CASE("insertion order, tags, statistics and reservoir capacity") {
    auto rng = make_rng(25);
    CoverBuffer b(2, {.capacity = 100, .seed = 3});
    StateMatrix all;
    for (int it = 0; it < 6; ++it) {
      const StateMatrix pts = random_matrix(40, 2, rng);
      all.append_rows(pts);
      const auto rows = b.insert(pts, it);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] == kNoExclusion) continue;
        CHECK(b.points().row(rows[i])[0] == pts(i, 0));
        CHECK(b.tags()[rows[i]] == it);
      }
    }
    CHECK(b.size() == 100);
    CHECK(b.total_inserted() == 240);
    CHECK(std::is_sorted(b.tags().begin(), b.tags().end()));
    CHECK_THROWS_AS(b.insert(random_matrix(1, 2, rng), 2), std::invalid_argument);
    // Running moments cover everything inserted, not only what was kept.
    double m = 0.0;
    for (std::size_t i = 0; i < all.rows(); ++i) m += all(i, 1);
    CHECK(b.mean()[1] == doctest::Approx(m / 240.0).epsilon(1e-12));

    CoverBuffer unbounded(2, {});
    const auto rows = unbounded.insert(all, 0);
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i] == i);
  }
}
