#include "hh412/correlate.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

using namespace hh412;

namespace {

Hyperedge mk(std::vector<int> events, double p = 0.0) {
    Hyperedge h;
    h.events = std::move(events);
    for (int e : h.events) h.event_mask |= 1ull << e;
    h.probability = p;
    return h;
}

std::uint64_t mask_of(std::initializer_list<int> events) {
    std::uint64_t m = 0;
    for (int e : events) m |= 1ull << e;
    return m;
}

}  // namespace

TEST_CASE("clustering") {
    SECTION("subset absorption") {
        auto cl = cluster({mk({1, 2, 3, 4}), mk({1, 2}), mk({5, 6})});
        REQUIRE(cl.size() == 2);
        CHECK(cl[0] == mask_of({1, 2, 3, 4}));
        CHECK(cl[1] == mask_of({5, 6}));
    }

    SECTION("the worked 3x3 example") {
        // Nine events on a grid, two size-4 squares, six vertical pairs, all
        // nine singletons; the valid cluster set is the two squares plus the
        // two pairs that span them.
        std::vector<Hyperedge> H = {mk({1, 2, 4, 5}), mk({5, 6, 8, 9})};
        for (auto pair : {std::pair{1, 4}, {2, 5}, {3, 6}, {4, 7}, {5, 8}, {6, 9}})
            H.push_back(mk({pair.first, pair.second}));
        for (int e = 1; e <= 9; ++e) H.push_back(mk({e}));

        auto cl = cluster(H);
        REQUIRE(cl.size() == 4);
        CHECK(std::count(cl.begin(), cl.end(), mask_of({1, 2, 4, 5})) == 1);
        CHECK(std::count(cl.begin(), cl.end(), mask_of({5, 6, 8, 9})) == 1);
        CHECK(std::count(cl.begin(), cl.end(), mask_of({3, 6})) == 1);
        CHECK(std::count(cl.begin(), cl.end(), mask_of({4, 7})) == 1);

        // titled follow-up: exactly the hyperedges {4}, {5}, {6} have a
        // spanning larger hyperedge and need the recursive adjustment
        std::vector<std::uint64_t> needing;
        for (const auto& h : H) {
            bool needs = false;
            for (std::uint64_t c : cl) {
                if (h.event_mask & ~c) continue;
                for (const auto& hp : H) {
                    if (std::popcount(hp.event_mask) <= h.size()) continue;
                    if ((hp.event_mask & c) != h.event_mask) continue;
                    if ((hp.event_mask & ~c) == 0) continue;
                    needs = true;
                }
            }
            if (needs) needing.push_back(h.event_mask);
        }
        std::sort(needing.begin(), needing.end());
        REQUIRE(needing.size() == 3);
        CHECK(needing[0] == mask_of({4}));
        CHECK(needing[1] == mask_of({5}));
        CHECK(needing[2] == mask_of({6}));
    }

    SECTION("every candidate is covered; max cluster size = max hyperedge size") {
        std::mt19937 gen(3);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<Hyperedge> H;
            int max_size = 1;
            for (int i = 0; i < 25; ++i) {
                std::vector<int> ev;
                int size = 1 + gen() % 4;
                while (static_cast<int>(ev.size()) < size) {
                    int e = gen() % 12;
                    if (std::find(ev.begin(), ev.end(), e) == ev.end()) ev.push_back(e);
                }
                std::sort(ev.begin(), ev.end());
                max_size = std::max<int>(max_size, ev.size());
                H.push_back(mk(ev));
            }
            auto cl = cluster(H);
            int max_cluster = 0;
            for (std::uint64_t c : cl) max_cluster = std::max(max_cluster, std::popcount(c));
            CHECK(max_cluster == max_size);
            for (const auto& h : H) {
                bool covered = false;
                for (std::uint64_t c : cl) covered = covered || (h.event_mask & ~c) == 0;
                CHECK(covered);
            }
        }
    }
}

TEST_CASE("moment accumulation") {
    std::vector<Hyperedge> H = {mk({3}), mk({4}), mk({3, 4})};

    SECTION("direct counts") {
        EventStatistics s = make_statistics(cluster(H));
        s.add_events(mask_of({3}));
        CHECK(s.count(mask_of({3})) == 1);
        CHECK(s.count(mask_of({4})) == 0);
        CHECK(s.count(mask_of({3, 4})) == 0);
        CHECK(s.moment(mask_of({3})) == 1.0);
    }

    SECTION("monotone and bounded") {
        EventStatistics s = make_statistics(cluster(H));
        SplitMix64 rng(5);
        for (int i = 0; i < 1000; ++i) s.add_events(rng.next() & mask_of({3, 4}));
        CHECK(s.count(mask_of({3, 4})) <= s.count(mask_of({3})));
        CHECK(s.count(mask_of({3})) <= s.n_shots);
    }

    SECTION("merge adds disjoint streams and is associative") {
        auto clusters = cluster(H);
        EventStatistics a = make_statistics(clusters), b = make_statistics(clusters),
                        c = make_statistics(clusters);
        SplitMix64 rng(8);
        for (int i = 0; i < 100; ++i) a.add_events(rng.next() & 0x18);
        for (int i = 0; i < 150; ++i) b.add_events(rng.next() & 0x18);
        for (int i = 0; i < 50; ++i) c.add_events(rng.next() & 0x18);
        EventStatistics ab = a;
        ab.merge(b);
        EventStatistics ab_c = ab;
        ab_c.merge(c);
        EventStatistics bc = b;
        bc.merge(c);
        EventStatistics a_bc = a;
        a_bc.merge(bc);
        CHECK(ab_c.n_shots == a_bc.n_shots);
        CHECK(ab_c.pattern_counts == a_bc.pattern_counts);
    }

    SECTION("single pair process: all three moments approach alpha") {
        auto evs = sample_independent_hyperedges({mask_of({3, 4})}, {0.2}, 100000, 3);
        EventStatistics s = make_statistics(cluster(H));
        for (auto e : evs) s.add_events(e);
        CHECK(s.moment(mask_of({3})) == Catch::Approx(0.2).margin(0.005));
        CHECK(s.moment(mask_of({4})) == Catch::Approx(0.2).margin(0.005));
        CHECK(s.moment(mask_of({3, 4})) == Catch::Approx(0.2).margin(0.005));
    }

    SECTION("independent singles: <ij> approaches a*b") {
        // brute-force expectation over the four configurations: the joint
        // moment of two independent singletons is exactly a*b
        const double a = 0.3, b = 0.15;
        double expect = 0;
        for (int fa = 0; fa < 2; ++fa)
            for (int fb = 0; fb < 2; ++fb)
                if (fa && fb) expect += (fa ? a : 1 - a) * (fb ? b : 1 - b);
        CHECK(expect == Catch::Approx(a * b));
        auto evs = sample_independent_hyperedges({mask_of({3}), mask_of({4})}, {a, b}, 200000, 4);
        EventStatistics s = make_statistics(cluster(H));
        for (auto e : evs) s.add_events(e);
        CHECK(s.moment(mask_of({3, 4})) == Catch::Approx(a * b).margin(0.004));
    }
}

TEST_CASE("cluster solving") {
    SECTION("size-1 cluster copies the moment") {
        std::vector<Hyperedge> H = {mk({2})};
        EventStatistics s = make_statistics(cluster(H));
        for (int i = 0; i < 100; ++i) s.add_events(i < 25 ? mask_of({2}) : 0);
        ClusterSolution sol = solve_cluster(mask_of({2}), s, H);
        REQUIRE(sol.alphas.size() == 1);
        CHECK(sol.alphas[0] == 0.25);
    }

    SECTION("size-2 closed form recovers the generating rates") {
        std::vector<std::uint64_t> masks = {mask_of({0}), mask_of({1}), mask_of({0, 1})};
        std::vector<double> alphas = {0.02, 0.03, 0.01};
        auto evs = sample_independent_hyperedges(masks, alphas, 1000000, 11);
        std::vector<Hyperedge> H = {mk({0}), mk({1}), mk({0, 1})};
        EventStatistics s = make_statistics(cluster(H));
        for (auto e : evs) s.add_events(e);
        ClusterSolution sol = solve_cluster(mask_of({0, 1}), s, H);
        REQUIRE(sol.members.size() == 3);
        for (std::size_t i = 0; i < sol.members.size(); ++i) {
            double truth = 0;
            for (std::size_t k = 0; k < masks.size(); ++k)
                if (masks[k] == sol.members[i]) truth = alphas[k];
            CHECK(std::abs(sol.alphas[i] - truth) < 3 * sol.alpha_se[i]);
        }
    }

    SECTION("size-4 cluster with all 15 members recovers numerically") {
        std::vector<std::uint64_t> masks;
        std::vector<double> alphas;
        SplitMix64 rng(5);
        std::vector<Hyperedge> H;
        for (std::uint64_t m = 1; m < 16; ++m) {
            masks.push_back(m);
            alphas.push_back(0.002 + 0.02 * rng.next_double());
            H.push_back(mk(mask_to_events(m)));
        }
        auto evs = sample_independent_hyperedges(masks, alphas, 1000000, 17);
        EventStatistics s = make_statistics(cluster(H));
        for (auto e : evs) s.add_events(e);
        ClusterSolution sol = solve_cluster(15ull, s, H);
        CHECK(sol.converged);
        REQUIRE(sol.members.size() == 15);
        for (std::size_t i = 0; i < sol.members.size(); ++i) {
            double truth = 0;
            for (std::size_t k = 0; k < masks.size(); ++k)
                if (masks[k] == sol.members[i]) truth = alphas[k];
            CHECK(std::abs(sol.alphas[i] - truth) < 3 * sol.alpha_se[i]);
        }
    }
}

TEST_CASE("adjustment") {
    SECTION("update formula") {
        // alpha_h' = 0 leaves alpha unchanged; the spec's worked value
        CHECK((0.37 - 0.0) / (1 - 0.0) == 0.37);
        CHECK((0.5 - 0.2) / (1 - 2 * 0.2) == Catch::Approx(0.5));
    }

    SECTION("adjustment commutes") {
        std::mt19937 gen(12);
        std::uniform_real_distribution<double> dist(0.0, 0.3);
        for (int trial = 0; trial < 200; ++trial) {
            double a = dist(gen);
            std::vector<double> ps = {dist(gen), dist(gen), dist(gen)};
            auto apply = [](double x, double p) { return (x - p) / (1 - 2 * p); };
            double fwd = apply(apply(apply(a, ps[0]), ps[1]), ps[2]);
            double rev = apply(apply(apply(a, ps[2]), ps[0]), ps[1]);
            CHECK(fwd == Catch::Approx(rev).epsilon(1e-12));
        }
    }

    SECTION("spanning pair adjusts the singleton it meets") {
        // clusters {0,1} and {1,2} overlap in event 1; hyperedges {0},{1},
        // {0,1},{1,2}: solving cluster {0,1} sees the extra pair {1,2} as
        // extra mass on {1}, and adjustment removes it.
        std::vector<Hyperedge> H = {mk({0}), mk({1}), mk({0, 1}), mk({1, 2}), mk({2})};
        std::vector<std::uint64_t> masks;
        std::vector<double> alphas = {0.02, 0.04, 0.015, 0.03, 0.01};
        for (const auto& h : H) masks.push_back(h.event_mask);
        auto evs = sample_independent_hyperedges(masks, alphas, 2000000, 29);
        EventStatistics s = make_statistics(cluster(H));
        for (auto e : evs) s.add_events(e);
        auto cal = calibrate(s, H, 4);
        for (std::size_t i = 0; i < masks.size(); ++i)
            CHECK(std::abs(cal.alpha.at(masks[i]) - alphas[i]) <
                  3 * std::max(cal.alpha_se.at(masks[i]), 2e-5));
    }
}

TEST_CASE("negative probabilities are retained and clamp mode works") {
    std::map<std::uint64_t, double> alpha = {{1, -0.002}, {2, 0.01}};
    CalibrationResult cal;
    cal.alpha = alpha;
    auto clamped = clamped_probabilities(cal);
    CHECK(clamped.at(1) == 0.0);
    CHECK(clamped.at(2) == 0.01);
}
