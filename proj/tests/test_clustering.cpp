#include <doctest.h>

#include <cmath>

#include "grouprec/clustering.hpp"
#include "grouprec/synthetic.hpp"
#include "testutil.hpp"

using namespace grouprec;

namespace {

// Independent re-computation of the adaptive density: plain loops over the
// same distance matrix, same floating-point expressions.
DensityEstimate<Real> density_oracle(Index i, const SquareMatX& dist,
                                     const std::vector<char>& live, const QuantileGridX& grid) {
  Real d_min = std::numeric_limits<Real>::infinity();
  Real d_max = -std::numeric_limits<Real>::infinity();
  for (Index j = 0; j < dist.rows(); ++j) {
    if (j == i || !live[static_cast<std::size_t>(j)]) continue;
    if (dist(i, j) < d_min) d_min = dist(i, j);
    if (dist(i, j) > d_max) d_max = dist(i, j);
  }
  DensityEstimate<Real> best;
  bool found = false;
  for (Real q : grid.values) {
    const Real r = d_min + (d_max - d_min) * q;
    Index count = 0;
    for (Index j = 0; j < dist.rows(); ++j) {
      if (live[static_cast<std::size_t>(j)] && dist(i, j) <= r) ++count;
    }
    const Real mu = static_cast<Real>(count) / (Real(EIGEN_PI) * r * r);
    if (!found || mu > best.density) {
      best = {mu, r};
      found = true;
    }
  }
  return best;
}

QuantileGridX default_grid() { return QuantileGridX{{0.1, 0.2, 0.3}}; }

}  // namespace

TEST_CASE("pairwise distances") {
  MatX pts(2, 2);
  pts << 0, 0, 3, 4;
  const auto d = pairwise_distances<Real>(pts);
  CHECK(d(0, 1) == 5.0);
  CHECK(d(1, 0) == 5.0);
  CHECK(d(0, 0) == 0.0);

  MatX dup(3, 2);
  dup << 1, 2, 1, 2, 5, 5;
  const auto dd = pairwise_distances<Real>(dup);
  CHECK(dd(0, 1) == 0.0);

  CHECK_THROWS_AS(pairwise_distances<Real>(MatX::Zero(1, 2)), std::invalid_argument);

  SUBCASE("triangle inequality on random triples") {
    Rng rng(17);
    for (int rep = 0; rep < 50; ++rep) {
      const MatX p = testutil::random_matrix(3, 4, rng);
      const auto t = pairwise_distances<Real>(p);
      CHECK(t(0, 2) <= t(0, 1) + t(1, 2) + 1e-12);
    }
  }
}

TEST_CASE("radius proposals follow the quantile interpolation") {
  SquareMatX d(3, 3);
  d << 0, 1, 2, 1, 0, 1.5, 2, 1.5, 0;
  const std::vector<char> live = {1, 1, 1};
  QuantileGridX grid{{0.1}};
  const auto r = radius_proposals<Real>(0, d, live, grid);
  REQUIRE(r.size() == 1);
  CHECK(r[0] == doctest::Approx(1.1).epsilon(1e-15));

  SUBCASE("degenerate d_min == d_max") {
    SquareMatX e(3, 3);
    e << 0, 2, 2, 2, 0, 2, 2, 2, 0;
    const auto rr = radius_proposals<Real>(0, e, live, default_grid());
    for (Real v : rr) CHECK(v == 2.0);
  }
  SUBCASE("grid of three") {
    SquareMatX e(3, 3);
    e << 0, 0.5, 1.5, 0.5, 0, 1.0, 1.5, 1.0, 0;
    const auto rr = radius_proposals<Real>(0, e, live, default_grid());
    CHECK(rr[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(rr[1] == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(rr[2] == doctest::Approx(0.8).epsilon(1e-15));
  }
  SUBCASE("no other live candidate") {
    const std::vector<char> lone = {1, 0, 0};
    CHECK_THROWS_AS(radius_proposals<Real>(0, d, lone, default_grid()), std::invalid_argument);
  }
}

TEST_CASE("adaptive density on the collinear example") {
  MatX pts(3, 2);
  pts << 0, 0, 1, 0, 2, 0;
  const auto d = pairwise_distances<Real>(pts);
  const std::vector<char> live = {1, 1, 1};
  const auto est = adaptive_density<Real>(0, d, live, default_grid());
  // radii {1.1, 1.2, 1.3} all cover exactly {self, middle}: the smallest wins
  CHECK(est.radius == doctest::Approx(1.1).epsilon(1e-15));
  CHECK(est.density == doctest::Approx(2.0 / (EIGEN_PI * 1.1 * 1.1)).epsilon(1e-15));
}

TEST_CASE("adaptive density for two candidates at distance 2") {
  MatX pts(2, 2);
  pts << 0, 0, 2, 0;
  const auto d = pairwise_distances<Real>(pts);
  const std::vector<char> live = {1, 1};
  QuantileGridX grid{{0.1}};
  const auto est = adaptive_density<Real>(0, d, live, grid);
  CHECK(est.radius == 2.0);
  CHECK(est.density == doctest::Approx(2.0 / (4.0 * EIGEN_PI)).epsilon(1e-15));
}

TEST_CASE("denser neighborhoods score strictly higher at equal radii") {
  // hand-built distances: candidates 0 and 1 share d_min=1 and d_max=10
  // (radius 1.9 at q=0.1) but 0 has three in-radius peers, 1 has one
  SquareMatX d(6, 6);
  d << 0, 9, 1.0, 1.5, 1.8, 10,  //
      9, 0, 1.0, 8.0, 8.0, 10,   //
      1.0, 1.0, 0, 5, 5, 5,      //
      1.5, 8.0, 5, 0, 5, 5,      //
      1.8, 8.0, 5, 5, 0, 5,      //
      10, 10, 5, 5, 5, 0;
  const std::vector<char> live(6, 1);
  QuantileGridX grid{{0.1}};
  const auto dense = adaptive_density<Real>(0, d, live, grid);
  const auto sparse = adaptive_density<Real>(1, d, live, grid);
  CHECK(dense.radius == sparse.radius);
  CHECK(dense.density == doctest::Approx(2.0 * sparse.density).epsilon(1e-15));
  CHECK(dense.density > sparse.density);
}

TEST_CASE("adaptive density equals the brute-force oracle exactly") {
  Rng rng(99);
  for (int rep = 0; rep < 60; ++rep) {
    const Index n = 2 + static_cast<Index>(rng.below(20));
    const Index dim = 1 + static_cast<Index>(rng.below(6));
    const MatX pts = testutil::random_matrix(n, dim, rng);
    const auto d = pairwise_distances<Real>(pts);
    std::vector<char> live(static_cast<std::size_t>(n), 1);
    for (auto& l : live) l = rng.uniform01() < 0.8 ? 1 : 0;
    live[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n)))] = 1;
    Index live_count = 0;
    for (char l : live) live_count += l;
    if (live_count < 2) continue;
    for (Index i = 0; i < n; ++i) {
      if (!live[static_cast<std::size_t>(i)]) continue;
      const auto got = adaptive_density<Real>(i, d, live, default_grid());
      const auto want = density_oracle(i, d, live, default_grid());
      CHECK(got.density == want.density);
      CHECK(got.radius == want.radius);
    }
  }
}

TEST_CASE("greedy alpha schedule") {
  CHECK(greedy_alpha(0, 0) == 1.0);
  CHECK(greedy_alpha(0, 1000) == 1.0);
  CHECK(greedy_alpha(3, 8) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  Real prev = 2.0;
  for (Index s = 0; s < 20; ++s) {
    const Real a = greedy_alpha(s, 50);
    CHECK(a > 0.0);
    CHECK(a <= 1.0);
    CHECK(a < prev);
    prev = a;
  }
}

TEST_CASE("explore blends the two step centers") {
  RowVecX v(2);
  v << 3, -1;
  for (Real sigma : {-0.7, 0.0, 0.5, 1.3}) {
    const RowVecX out = explore_blend<Real>(v, v, sigma);
    CHECK(out == v);
  }
  RowVecX cur(2), prev(2);
  cur << 0, 0;
  prev << 2, 0;
  const RowVecX mid = explore_blend<Real>(cur, prev, 0.5);
  CHECK(mid(0) == 1.0);
  CHECK(mid(1) == 0.0);

  SUBCASE("output stays on the line through the two centers") {
    Rng rng(4);
    for (int rep = 0; rep < 30; ++rep) {
      const RowVecX a = testutil::random_matrix(1, 3, rng);
      const RowVecX b = testutil::random_matrix(1, 3, rng);
      const RowVecX out = explore<Real>(a, b, rng);
      // (out - b) must be parallel to (a - b)
      const RowVecX dir = a - b;
      const RowVecX rel = out - b;
      const Real cross = (rel(0) * dir(1) - rel(1) * dir(0)) + (rel(1) * dir(2) - rel(2) * dir(1));
      CHECK(std::abs(cross) < 1e-9);
    }
  }
}

namespace {

CandidateSetX hand_set(const MatX& centers, const VecX& radius) {
  CandidateSetX s;
  s.centers = centers;
  s.radius = radius;
  s.density = VecX::Ones(centers.rows());
  s.live.assign(static_cast<std::size_t>(centers.rows()), 1);
  s.processed.assign(static_cast<std::size_t>(centers.rows()), 0);
  s.k_prime = centers.rows();
  s.total = centers.rows();
  return s;
}

}  // namespace

TEST_CASE("merge_split: both the merge and the split indicator apply") {
  MatX centers(3, 2);
  centers << 0, 0, 1, 0, 5, 0;
  VecX radius(3);
  radius << 2, 2, 0.5;
  auto set = hand_set(centers, radius);
  const auto d = pairwise_distances<Real>(centers);
  const auto rep = merge_split<Real>(0, set, d);
  CHECK(rep.merge_size == 2);  // self + (1,0); (5,0) fails the r_i test
  CHECK(set.k_prime == 2);
  CHECK(set.centers(0, 0) == doctest::Approx(0.5));
  CHECK(set.centers(0, 1) == 0.0);
  CHECK(set.live[1] == 0);
  CHECK(set.live[2] == 1);
  CHECK(set.processed[0] == 1);
}

TEST_CASE("merge_split: the split factor excludes short-reach candidates") {
  MatX centers(2, 2);
  centers << 0, 0, 1, 0;
  VecX radius(2);
  radius << 2.0, 0.5;  // candidate 1 cannot reach back
  auto set = hand_set(centers, radius);
  const auto d = pairwise_distances<Real>(centers);
  const auto rep = merge_split<Real>(0, set, d);
  CHECK(rep.merge_size == 1);
  CHECK(set.k_prime == 2);
  CHECK(set.centers.row(0).norm() == 0.0);  // unchanged
}

TEST_CASE("merge_split: exact duplicates all merge") {
  MatX centers(3, 2);
  centers << 1, 1, 1, 1, 1, 1;
  VecX radius = VecX::Ones(3);
  auto set = hand_set(centers, radius);
  const auto d = pairwise_distances<Real>(centers);
  const auto rep = merge_split<Real>(1, set, d);
  CHECK(rep.merge_size == 3);
  CHECK(set.k_prime == 1);
  CHECK(set.centers(1, 0) == 1.0);
  CHECK(set.centers(1, 1) == 1.0);
}

TEST_CASE("merge_split: no-op merge keeps the candidate") {
  MatX centers(2, 2);
  centers << 0, 0, 9, 9;
  VecX radius(2);
  radius << 1, 1;
  auto set = hand_set(centers, radius);
  const auto d = pairwise_distances<Real>(centers);
  const auto rep = merge_split<Real>(0, set, d);
  CHECK(rep.merge_size == 1);
  CHECK(rep.k_prime_after == 2);
  CHECK_THROWS_AS(merge_split<Real>(0, set, d), std::invalid_argument);  // already processed
}

TEST_CASE("identify: all-identical points collapse to one candidate") {
  MatX pts = MatX::Ones(5, 3) * 2.5;
  Rng rng(1);
  IdentifyTrace trace;
  const auto set = identify_groups<Real>(pts, default_grid(), rng, -1, &trace);
  CHECK(set.k_prime == 1);
  CHECK(set.centers(0, 0) == 2.5);
  CHECK(trace.premerged_duplicates == 4);
}

TEST_CASE("identify: two well-separated blobs, explore disabled") {
  Rng data_rng(7);
  const auto blobs = make_blobs(2, 50, 2, 0.05, 10.0, data_rng);
  Rng rng(3);
  const auto set = identify_groups<Real>(blobs.points, default_grid(), rng, 0);
  REQUIRE(set.k_prime == 2);
  // each center within 0.1 of one blob mean
  for (Index c = 0; c < 2; ++c) {
    const Real d0 = (set.centers.row(c) - blobs.means.row(0)).norm();
    const Real d1 = (set.centers.row(c) - blobs.means.row(1)).norm();
    CHECK(std::min(d0, d1) < 0.1);
  }
}

TEST_CASE("identify: deterministic for a fixed seed") {
  Rng data_rng(21);
  const auto blobs = make_blobs(3, 30, 2, 0.05, 3.0, data_rng);
  Rng r1(5), r2(5);
  const auto a = identify_groups<Real>(blobs.points, default_grid(), r1, -1);
  const auto b = identify_groups<Real>(blobs.points, default_grid(), r2, -1);
  REQUIRE(a.k_prime == b.k_prime);
  CHECK(a.centers == b.centers);
  CHECK(a.radius == b.radius);
  CHECK(a.density == b.density);
}

TEST_CASE("identify: n < 2 rejected") {
  Rng rng(1);
  CHECK_THROWS_AS(identify_groups<Real>(MatX::Zero(1, 2), default_grid(), rng, 0),
                  std::invalid_argument);
}

TEST_CASE("identify bookkeeping: merge accounting holds on random passes") {
  Rng rng(1234);
  for (int rep = 0; rep < 40; ++rep) {
    const Index n = 5 + static_cast<Index>(rng.below(40));
    const Index dim = 1 + static_cast<Index>(rng.below(4));
    MatX pts = testutil::random_matrix(n, dim, rng, 2.0);
    if (rep % 3 == 0) pts.row(0) = pts.row(n - 1);  // plant a duplicate sometimes
    Rng pass_rng(rng.engine()());
    IdentifyTrace trace;
    const long budget = static_cast<long>(rng.below(20));
    const auto set = identify_groups<Real>(pts, default_grid(), pass_rng, budget, &trace);

    Index exploits = 0;
    for (const auto& step : trace.steps) {
      if (step.kind == IdentifyStep::Kind::Exploit) {
        CHECK(step.live_after == step.live_before - (step.merge_size - 1));
        CHECK(step.merge_size >= 1);
        ++exploits;
      } else {
        CHECK(step.live_after == step.live_before + 1);
      }
    }
    CHECK(trace.final_live + trace.removed == trace.initial_candidates + trace.explored);
    CHECK(set.k_prime == trace.final_live);
    CHECK(set.k_prime >= 1);
    CHECK(trace.explored <= budget);
    // every exploit processes one candidate; processed candidates may later
    // be absorbed, so exploits bound the survivors
    CHECK(exploits >= trace.final_live);
  }
}

TEST_CASE("identify: exploit-only centers stay inside the input bounding box") {
  Rng rng(77);
  for (int rep = 0; rep < 10; ++rep) {
    const MatX pts = testutil::random_matrix(30, 2, rng, 3.0);
    Rng pass_rng(1);
    const auto set = identify_groups<Real>(pts, default_grid(), pass_rng, 0);
    const RowVecX lo = pts.colwise().minCoeff();
    const RowVecX hi = pts.colwise().maxCoeff();
    for (Index c = 0; c < set.k_prime; ++c) {
      for (Index j = 0; j < 2; ++j) {
        CHECK(set.centers(c, j) >= lo(j) - 1e-12);
        CHECK(set.centers(c, j) <= hi(j) + 1e-12);
      }
    }
  }
}

TEST_CASE("nearest-center assignment breaks ties toward the lower index") {
  MatX pts(1, 1);
  pts << 0.0;
  MatX centers(2, 1);
  centers << 1.0, -1.0;
  const auto assign = nearest_center_assignment<Real>(pts, centers);
  CHECK(assign[0] == 0);
}
