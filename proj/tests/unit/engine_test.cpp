#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "kmeans/engine.hpp"

using namespace kmeans;
using testing_support::blob4;
using testing_support::centers_of;
using testing_support::labels_of;
using testing_support::to_dataset;

namespace {

Errc error_code(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected kmeans::Error";
    return Errc::ContractViolation;
}

KmeansConfig config_k(std::size_t k) {
    KmeansConfig c;
    c.k = k;
    return c;
}

}  // namespace

TEST(Diameter, UnitSquareTieGoesToLexicographicallySmallestPair) {
    const Dataset sq(4, 2, {0, 0, 1, 0, 0, 1, 1, 1});
    const DiameterResult d = diameter(sq);
    EXPECT_EQ(d.d, std::sqrt(2.0));
    EXPECT_EQ(d.i, 0u);
    EXPECT_EQ(d.j, 3u);
}

TEST(Diameter, Collinear) {
    const Dataset line(3, 1, {0, 1, 5});
    EXPECT_EQ(diameter(line), (DiameterResult{5.0, 0, 2}));
}

TEST(Diameter, MatchesExhaustiveOracle) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto pts = oracle::uniform(50, 3, seed);
        const auto expect = oracle::diameter(pts);
        const DiameterResult got = diameter(to_dataset(pts));
        EXPECT_EQ(got.d, expect.d);
        EXPECT_EQ(got.i, expect.i);
        EXPECT_EQ(got.j, expect.j);
    }
}

TEST(Diameter, WideTilesAndManyDimensionsMatchOracle) {
    // Crosses several column tiles and strip boundaries.
    for (std::size_t m : {1u, 7u, 25u, 40u}) {
        const auto pts = oracle::uniform(700, m, 100 + m);
        const auto expect = oracle::diameter(pts);
        const DiameterResult got = diameter(to_dataset(pts));
        EXPECT_EQ(got, (DiameterResult{expect.d, expect.i, expect.j})) << "m=" << m;
    }
}

TEST(Diameter, DuplicatedExtremesResolveToSmallestPair) {
    // Points 1 and 4 are copies of 0 and 3, so four pairs share the maximum.
    const Dataset ds(5, 1, {0, 0, 2, 9, 9});
    EXPECT_EQ(diameter(ds), (DiameterResult{9.0, 0, 3}));
}

TEST(Diameter, PermutationInvariantDistance) {
    auto pts = oracle::uniform(80, 4, 7);
    const double d0 = diameter(to_dataset(pts)).d;
    std::vector<std::size_t> perm(pts.n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(1));
    oracle::Points shuffled{pts.n, pts.m, std::vector<double>(pts.x.size())};
    for (std::size_t i = 0; i < pts.n; ++i) {
        std::copy_n(pts.row(perm[i]), pts.m, shuffled.x.begin() + i * pts.m);
    }
    const DiameterResult d1 = diameter(to_dataset(shuffled));
    EXPECT_EQ(d1.d, d0);
    // The realizing pair maps back to a pair at the same distance.
    EXPECT_EQ(std::sqrt(oracle::sq(pts.row(perm[d1.i]), pts.row(perm[d1.j]), pts.m)), d0);
}

TEST(Diameter, NeedsTwoSamples) {
    EXPECT_EQ(error_code([] { diameter(Dataset(1, 2, {1, 2})); }), Errc::InsufficientData);
}

TEST(DiameterSampling, StridedRowsRespectPairCap) {
    const auto rows = diameter_sample_rows(1'000'000, 4950);
    EXPECT_EQ(rows.size(), 100u);
    EXPECT_EQ(rows.front(), 0u);
    EXPECT_TRUE(std::is_sorted(rows.begin(), rows.end()));
    EXPECT_EQ(std::set<std::size_t>(rows.begin(), rows.end()).size(), rows.size());
    EXPECT_LT(rows.back(), 1'000'000u);
}

TEST(InitCenters, KTwoMaximinIsTheDiameterPair) {
    const auto pts = oracle::uniform(30, 3, 42);
    const Dataset ds = to_dataset(pts);
    const DiameterResult d = diameter(ds);
    const ClusterModel model = init_centers(ds, config_k(2), d, centroid_of(ds));
    EXPECT_TRUE(std::ranges::equal(model.center(0), ds.row(d.i)));
    EXPECT_TRUE(std::ranges::equal(model.center(1), ds.row(d.j)));
    EXPECT_EQ(model.counts(), (std::vector<std::size_t>{0, 0}));
}

TEST(InitCenters, KEqualsNChoosesEveryPointOnce) {
    const auto pts = oracle::uniform(12, 2, 8);
    const Dataset ds = to_dataset(pts);
    const ClusterModel model = init_centers(ds, config_k(12), diameter(ds), centroid_of(ds));
    std::set<std::vector<double>> seen;
    for (std::size_t c = 0; c < 12; ++c) seen.insert({model.center(c).begin(), model.center(c).end()});
    EXPECT_EQ(seen.size(), 12u);
    for (std::size_t i = 0; i < 12; ++i) EXPECT_TRUE(seen.count({ds.row(i).begin(), ds.row(i).end()}));
}

TEST(InitCenters, MaximinMatchesFarthestFirstOracle) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto pts = oracle::uniform(20, 2, 300 + seed);
        const Dataset ds = to_dataset(pts);
        const DiameterResult d = diameter(ds);
        const auto expect = oracle::maximin(pts, 3, d.i, d.j);
        const ClusterModel model = init_centers(ds, config_k(3), d, centroid_of(ds));
        for (std::size_t c = 0; c < 3; ++c) {
            EXPECT_TRUE(std::ranges::equal(model.center(c), ds.row(expect[c]))) << "seed " << seed << " c " << c;
        }
    }
}

TEST(InitCenters, TooFewDistinctPointsIsDegenerate) {
    const Dataset ds(5, 1, {1, 1, 2, 2, 1});
    const DiameterResult d = diameter(ds);
    EXPECT_EQ(error_code([&] { init_centers(ds, config_k(3), d, centroid_of(ds)); }), Errc::DegenerateData);
    KmeansConfig rnd = config_k(3);
    rnd.init = InitStrategy::RandomFarApart;
    EXPECT_EQ(error_code([&] { init_centers(ds, rnd, d, centroid_of(ds)); }), Errc::DegenerateData);
    const Dataset flat(3, 2, {4, 4, 4, 4, 4, 4});
    EXPECT_EQ(error_code([&] { init_centers(flat, config_k(2), diameter(flat), centroid_of(flat)); }),
              Errc::DegenerateData);
}

TEST(InitCenters, RandomFarApartIsSeededAndSeparated) {
    const auto pts = oracle::uniform(200, 2, 17);
    const Dataset ds = to_dataset(pts);
    const DiameterResult d = diameter(ds);
    KmeansConfig cfg = config_k(5);
    cfg.init = InitStrategy::RandomFarApart;
    cfg.seed = 1234;
    const ClusterModel a = init_centers(ds, cfg, d, centroid_of(ds));
    const ClusterModel b = init_centers(ds, cfg, d, centroid_of(ds));
    EXPECT_EQ(a, b);
    const double threshold = d.d / (2.0 * 5);
    for (std::size_t x = 0; x < 5; ++x) {
        for (std::size_t y = x + 1; y < 5; ++y) EXPECT_GT(distance(a.center(x), a.center(y)), threshold);
    }
    cfg.seed = 99;
    EXPECT_NE(init_centers(ds, cfg, d, centroid_of(ds)), a);
}

TEST(InitCenters, RandomFarApartFallsBackToMaximinWhenRejectionsPileUp) {
    // Two tight far-apart groups plus k=4: the D/(2k) separation cannot be
    // satisfied 4 times, so the rejection budget runs out and maximin finishes.
    std::vector<double> coords;
    for (int i = 0; i < 10; ++i) coords.push_back(0.001 * i);
    for (int i = 0; i < 10; ++i) coords.push_back(100.0 + 0.001 * i);
    const Dataset ds(20, 1, coords);
    KmeansConfig cfg = config_k(4);
    cfg.init = InitStrategy::RandomFarApart;
    cfg.seed = 3;
    const ClusterModel model = init_centers(ds, cfg, diameter(ds), centroid_of(ds));
    std::set<double> distinct;
    for (std::size_t c = 0; c < 4; ++c) distinct.insert(model.center(c)[0]);
    EXPECT_EQ(distinct.size(), 4u);
}

TEST(AssignStep, NearestAndTieToLowestIndex) {
    ClusterModel model(2, 2, {0, 0, 10, 0});
    const Dataset ds(2, 2, {2, 0, 5, 0});
    const Assignment a = assign_step(ds, model);
    EXPECT_EQ(a[0], 0u);
    EXPECT_EQ(a[1], 0u);
    EXPECT_EQ(model.counts(), (std::vector<std::size_t>{2, 0}));
}

TEST(AssignStep, MatchesNaiveScanAndCountsMatchHistogram) {
    const auto pts = oracle::uniform(200, 3, 21);
    const auto ctr = oracle::uniform(4, 3, 22);
    const Dataset ds = to_dataset(pts);
    ClusterModel model(4, 3, ctr.x);
    const Assignment a = assign_step(ds, model);
    EXPECT_EQ(labels_of(a), oracle::assign(pts, ctr.x, 4));
    EXPECT_EQ(model.counts(), a.histogram());
    EXPECT_EQ(std::accumulate(model.counts().begin(), model.counts().end(), std::size_t{0}), ds.n());
}

TEST(AssignStep, DimensionMismatchRejected) {
    ClusterModel model(2, 3);
    EXPECT_THROW(assign_step(blob4(), model), Error);
}

TEST(UpdateStep, BlobMeans) {
    const Dataset ds = blob4();
    const ClusterModel model = update_step(ds, Assignment({0, 0, 1, 1}, 2), 2);
    EXPECT_EQ(centers_of(model), (std::vector<double>{0, 0.5, 10, 0.5}));
    EXPECT_EQ(model.counts(), (std::vector<std::size_t>{2, 2}));
}

TEST(UpdateStep, EmptyClusterReseededAtFarthestSample) {
    const Dataset ds(4, 1, {0, 1, 2, 9});
    const ClusterModel model = update_step(ds, Assignment({0, 0, 0, 0}, 2), 2);
    EXPECT_EQ(model.center(0)[0], 3.0);
    EXPECT_EQ(model.center(1)[0], 9.0);  // |9 - 3| is the largest residual
    EXPECT_EQ(model.counts(), (std::vector<std::size_t>{3, 1}));
}

TEST(UpdateStep, SeveralEmptyClustersTakeDistinctSeeds) {
    const Dataset ds(5, 1, {0, 1, 2, 3, 20});
    const ClusterModel model = update_step(ds, Assignment({1, 1, 1, 1, 1}, 4), 4);
    // Mean 5.2; residuals 5.2, 4.2, 3.2, 2.2, 14.8.
    EXPECT_EQ(model.center(0)[0], 20.0);
    EXPECT_EQ(model.center(1)[0], 5.2);
    EXPECT_EQ(model.center(2)[0], 0.0);
    EXPECT_EQ(model.center(3)[0], 1.0);
    EXPECT_EQ(model.counts(), (std::vector<std::size_t>{1, 2, 1, 1}));
}

TEST(UpdateStep, MatchesGroupedMeanOracle) {
    // n spans several reduction blocks, so the library's blocked sums and the
    // oracle's straight sums may differ in the last bits.
    const auto pts = oracle::uniform(10000, 5, 31, -50, 50);
    std::mt19937_64 rng(4);
    std::vector<Label> labels(pts.n);
    for (auto& l : labels) l = static_cast<Label>(rng() % 6);
    const ClusterModel model = update_step(to_dataset(pts), Assignment(labels, 6), 6);
    std::vector<std::size_t> counts;
    const auto expect = oracle::update(pts, labels, 6, &counts);
    for (std::size_t idx = 0; idx < expect.size(); ++idx) {
        EXPECT_NEAR(model.centers()[idx], expect[idx], 1e-12 * std::max(1.0, std::abs(expect[idx])));
    }
    EXPECT_EQ(model.counts(), counts);
}

TEST(UpdateStep, SingleBlockBitIdenticalToOracle) {
    const auto pts = oracle::uniform(300, 4, 32);
    std::mt19937_64 rng(5);
    std::vector<Label> labels(pts.n);
    for (auto& l : labels) l = static_cast<Label>(rng() % 5);
    EXPECT_EQ(centers_of(update_step(to_dataset(pts), Assignment(labels, 5), 5)), oracle::update(pts, labels, 5));
}

TEST(Converged, Tolerances) {
    const ClusterModel a(2, 2, {0, 0, 1, 1});
    ClusterModel b = a;
    EXPECT_TRUE(converged(a, b, 0.0));
    b.center(1)[0] += 1e-6;
    EXPECT_FALSE(converged(a, b, 0.0));
    EXPECT_TRUE(converged(a, b, 1e-3));
    EXPECT_THROW(converged(a, ClusterModel(3, 2), 0.0), Error);
}

TEST(RunSingle, BlobInstanceReachesGlobalOptimum) {
    const Dataset ds = blob4();
    const KmeansResult r = run_single(ds, config_k(2));
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(labels_of(r.assignment), (std::vector<Label>{0, 0, 1, 1}));
    EXPECT_EQ(centers_of(r.model), (std::vector<double>{0, 0.5, 10, 0.5}));

    // Exhaustive scan over every 2-partition.
    double best = std::numeric_limits<double>::infinity();
    std::vector<Label> best_labels;
    for (unsigned mask = 1; mask < 15; ++mask) {
        std::vector<Label> labels(4);
        for (unsigned b = 0; b < 4; ++b) labels[b] = (mask >> b) & 1u;
        const ClusterModel model = update_step(ds, Assignment(labels, 2), 2);
        const double w = wcss(ds, model, Assignment(labels, 2));
        if (w < best) {
            best = w;
            best_labels = labels;
        }
    }
    EXPECT_EQ(wcss(ds, r.model, r.assignment), best);
    EXPECT_EQ(best, 1.0);
}

TEST(RunSingle, KOneConvergesToGlobalCentroidWithinTwoIterations) {
    const auto pts = oracle::uniform(64, 3, 77);
    const Dataset ds = to_dataset(pts);
    const KmeansResult r = run_single(ds, config_k(1));
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.iterations, 2u);
    EXPECT_EQ(r.model.centroid(0), r.global_centroid);
    EXPECT_EQ(r.global_centroid, centroid_of(ds));
}

TEST(RunSingle, KEqualsNGivesZeroWcss) {
    const auto pts = oracle::uniform(9, 2, 13);
    const Dataset ds = to_dataset(pts);
    const KmeansResult r = run_single(ds, config_k(9));
    EXPECT_EQ(wcss(ds, r.model, r.assignment), 0.0);
    auto h = r.assignment.histogram();
    EXPECT_TRUE(std::all_of(h.begin(), h.end(), [](std::size_t c) { return c == 1; }));
}

TEST(RunSingle, MatchesNaiveLloydOracle) {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        const auto pts = oracle::blobs(60 + 20 * seed, 1 + seed % 5, 3, 0.8, seed);
        const std::size_t k = 1 + seed % 6;
        const auto expect = oracle::lloyd(pts, k);
        const KmeansResult r = run_single(to_dataset(pts), config_k(k));
        EXPECT_EQ(labels_of(r.assignment), expect.labels) << seed;
        EXPECT_EQ(centers_of(r.model), expect.centers) << seed;
        EXPECT_EQ(r.iterations, expect.iterations) << seed;
        EXPECT_EQ(r.converged, expect.converged);
    }
}

TEST(RunSingle, WcssNeverIncreasesAndFixedPointHolds) {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const auto pts = oracle::uniform(150 + 10 * seed, 2 + seed % 4, 500 + seed);
        const Dataset ds = to_dataset(pts);
        KmeansConfig cfg = config_k(2 + seed % 7);
        cfg.track_wcss = true;
        const KmeansResult r = run_single(ds, cfg);
        ASSERT_EQ(r.wcss_history.size(), r.timings.assign_ms.size());
        for (std::size_t t = 1; t < r.wcss_history.size(); ++t) {
            EXPECT_LE(r.wcss_history[t], r.wcss_history[t - 1]) << "seed " << seed << " iter " << t;
        }
        ASSERT_TRUE(r.converged);
        ClusterModel copy = r.model;
        EXPECT_EQ(assign_step(ds, copy), r.assignment);
    }
}

TEST(RunSingle, DeterministicAndBoundedByMaxIters) {
    const auto pts = oracle::uniform(400, 3, 9);
    const Dataset ds = to_dataset(pts);
    KmeansConfig cfg = config_k(8);
    const KmeansResult a = run_single(ds, cfg);
    const KmeansResult b = run_single(ds, cfg);
    EXPECT_EQ(a.assignment, b.assignment);
    EXPECT_EQ(a.model, b.model);
    EXPECT_EQ(a.iterations, b.iterations);

    cfg.max_iters = 2;
    const KmeansResult capped = run_single(ds, cfg);
    EXPECT_LE(capped.iterations, 2u);
    EXPECT_TRUE(capped.converged || capped.iterations == 2u);
}

TEST(RunSingle, ToleranceStopsEarlier) {
    const auto pts = oracle::uniform(500, 2, 10);
    const Dataset ds = to_dataset(pts);
    KmeansConfig cfg = config_k(6);
    const KmeansResult exact = run_single(ds, cfg);
    cfg.tol = 0.05;
    const KmeansResult loose = run_single(ds, cfg);
    EXPECT_TRUE(loose.converged);
    EXPECT_LE(loose.iterations, exact.iterations);
}

TEST(RunSingle, ErrorsPropagate) {
    EXPECT_EQ(error_code([] { run_single(Dataset(1, 1, {0}), config_k(1)); }), Errc::InsufficientData);
    EXPECT_EQ(error_code([] { run_single(Dataset(3, 1, {2, 2, 2}), config_k(2)); }), Errc::DegenerateData);
    EXPECT_EQ(error_code([] { run_single(blob4(), config_k(5)); }), Errc::ContractViolation);
    KmeansConfig bad = config_k(2);
    bad.tol = -1;
    EXPECT_EQ(error_code([&] { run_single(blob4(), bad); }), Errc::ContractViolation);
}

TEST(RunSingle, TimingsAreNonNegativeAndBracketed) {
    const auto pts = oracle::uniform(2000, 4, 12);
    const KmeansResult r = run_single(to_dataset(pts), config_k(4));
    const auto& t = r.timings;
    EXPECT_EQ(t.update_ms.size(), r.iterations);
    const double phases = t.diameter_ms + t.centroid_ms + t.init_ms + t.assign_total_ms() + t.update_total_ms();
    EXPECT_GE(t.total_ms + 1e-6, phases);
    EXPECT_GE(t.diameter_ms, 0.0);
}
