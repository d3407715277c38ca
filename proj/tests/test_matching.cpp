#include "hh412/matching.hpp"
#include "hh412/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <limits>

using namespace hh412;

namespace {

// Exhaustive reference: try every way to pair defects or send them to the
// boundary, tracking the lexicographically smallest optimum.
void enumerate_pairings(const PairingInstance& inst, std::uint32_t mask, double cost,
                        Pairing& current, double& best, Pairing& best_pairing) {
    if (!mask) {
        if (cost < best || (cost == best && current < best_pairing)) {
            best = cost;
            best_pairing = current;
        }
        return;
    }
    const int i = std::countr_zero(mask);
    const std::uint32_t rest = mask & (mask - 1);
    std::uint32_t others = rest;
    while (others) {
        const int j = std::countr_zero(others);
        others &= others - 1;
        current[i] = j;
        current[j] = i;
        enumerate_pairings(inst, rest & ~(1u << j), cost + inst.cost(i, j), current, best,
                           best_pairing);
        current[i] = current[j] = -1;
    }
    enumerate_pairings(inst, rest, cost + inst.boundary_cost[i], current, best, best_pairing);
}

PairingInstance random_instance(SplitMix64& rng, int d) {
    PairingInstance inst;
    inst.n = d;
    inst.defect_cost.assign(std::size_t(d) * d, 0);
    inst.boundary_cost.resize(d);
    for (int i = 0; i < d; ++i) {
        inst.boundary_cost[i] = double(1 + rng.next() % 1024) / 64.0;
        for (int j = i + 1; j < d; ++j)
            inst.cost(i, j) = inst.cost(j, i) = double(1 + rng.next() % 1024) / 64.0;
    }
    return inst;
}

}  // namespace

TEST_CASE("empty and single-defect instances") {
    PairingInstance empty;
    CHECK(min_weight_pairing(empty).empty());

    PairingInstance one;
    one.n = 1;
    one.defect_cost = {0.0};
    one.boundary_cost = {2.5};
    Pairing p = min_weight_pairing(one);
    REQUIRE(p.size() == 1);
    CHECK(p[0] == -1);
    CHECK(pairing_cost(one, p) == 2.5);
}

TEST_CASE("matching equals exhaustive enumeration with the shared tie-break") {
    SplitMix64 rng(2024);
    for (int trial = 0; trial < 400; ++trial) {
        const int d = 2 + int(rng.next() % 9);  // up to 10 defects here
        PairingInstance inst = random_instance(rng, d);
        Pairing got = min_weight_pairing(inst);
        Pairing current(d, -1), best_pairing(d, -1);
        double best = std::numeric_limits<double>::infinity();
        enumerate_pairings(inst, (1u << d) - 1, 0, current, best, best_pairing);
        CHECK(pairing_cost(inst, got) == best);
        CHECK(got == best_pairing);
    }
}

TEST_CASE("blossom path agrees with the DP") {
    SplitMix64 rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        const int d = 2 + int(rng.next() % 15);
        PairingInstance inst = random_instance(rng, d);
        Pairing dp = detail::pair_by_subset_dp(inst);
        Pairing bl = detail::pair_by_blossom(inst);
        for (int i = 0; i < d; ++i)
            if (bl[i] >= 0) REQUIRE(bl[bl[i]] == i);
        CHECK(pairing_cost(inst, bl) == pairing_cost(inst, dp));
    }
}

TEST_CASE("pairing choice is invariant under weight scaling") {
    SplitMix64 rng(55);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 2 + int(rng.next() % 9);
        PairingInstance inst = random_instance(rng, d);
        Pairing base = min_weight_pairing(inst);
        PairingInstance scaled = inst;
        for (auto& w : scaled.defect_cost) w *= 4.0;
        for (auto& w : scaled.boundary_cost) w *= 4.0;
        CHECK(min_weight_pairing(scaled) == base);
    }
}

TEST_CASE("boundary absorbs any number of defects") {
    PairingInstance inst;
    inst.n = 4;
    inst.defect_cost.assign(16, 100.0);
    inst.boundary_cost = {1, 1, 1, 1};
    Pairing p = min_weight_pairing(inst);
    for (int i = 0; i < 4; ++i) CHECK(p[i] == -1);
    CHECK(pairing_cost(inst, p) == 4.0);
}
