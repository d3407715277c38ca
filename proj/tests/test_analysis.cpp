#include "hh412/analysis.hpp"
#include "hh412/correlate.hpp"
#include "hh412/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace hh412;

namespace {

std::vector<DecayPoint> synth_points(double ei, double em, double e, double sigma,
                                     std::uint64_t n_shots = 0, std::mt19937* gen = nullptr) {
    std::vector<DecayPoint> pts;
    for (int r = 0; r <= 10; ++r) {
        double p = 0.5 - 0.5 * (1 - 2 * ei) * (1 - 2 * em) * std::exp(-2 * e * r);
        if (gen) {
            std::binomial_distribution<long> dist(long(n_shots), p);
            p = double(dist(*gen)) / double(n_shots);
            sigma = std::sqrt(std::max(p * (1 - p), 1e-12) / double(n_shots));
        }
        pts.push_back({double(r), p, sigma});
    }
    return pts;
}

}  // namespace

TEST_CASE("decay fit") {
    SECTION("noiseless fixed point recovers zeros") {
        auto fit = fit_decay(synth_points(0, 0, 0, 0));
        CHECK(fit.eps_i == Catch::Approx(0.0).margin(1e-9));
        CHECK(fit.eps == Catch::Approx(0.0).margin(1e-9));
    }

    SECTION("noise-free recovery of the published fit row") {
        auto fit = fit_decay(synth_points(7.00e-4, 1.18e-3, 1.18e-3, 0));
        CHECK(std::abs(fit.eps_i - 7.00e-4) < 1e-6);
        CHECK(std::abs(fit.eps_m - 1.18e-3) < 1e-6);
        CHECK(std::abs(fit.eps - 1.18e-3) < 1e-6);
        CHECK(fit.eps_m == fit.eps);
        // fitted curve reproduces the model at the fitted parameters
        for (const auto& p : fit.points) CHECK(fit.model(p.rounds) == Catch::Approx(p.p_fail));
    }

    SECTION("noisy recovery stays within the stated covariance") {
        std::mt19937 gen(42);
        int ok_eps = 0, fits = 0;
        for (int trial = 0; trial < 100; ++trial) {
            auto pts = synth_points(7.00e-4, 1.18e-3, 1.18e-3, 0, 120000, &gen);
            DecayFit fit = fit_decay(pts);
            const double se = std::sqrt(std::max(fit.covariance[1][1], 0.0));
            if (std::abs(fit.eps - 1.18e-3) <= 3 * se) ++ok_eps;
            ++fits;
        }
        // binomial(100, ~0.997): seeing fewer than 95 successes is wildly unlikely
        CHECK(ok_eps >= 95);
        CHECK(fits == 100);
    }

    SECTION("degenerate data is rejected") {
        std::vector<DecayPoint> flat;
        for (int r = 0; r < 5; ++r) flat.push_back({double(r), 0.5, 0.001});
        CHECK_THROWS_AS(fit_decay(flat), fit_error);
        std::vector<DecayPoint> two = {{0, 0.1, 0.01}, {1, 0.2, 0.01}};
        CHECK_THROWS_AS(fit_decay(two), fit_error);
    }
}

TEST_CASE("noise model refit") {
    CodeDefinition code = code_412(CodeVariant::ZXZ);
    Circuit c = build_circuit(code, LogicalState::MinusL, 2);
    NoiseParams np = fit_noise_params();
    auto locs = enumerate_faults(c, np);
    auto H = trace_hypergraph(c, locs, TraceSemantics::Flagged);

    SECTION("self-consistency at the exact analytical probabilities") {
        auto analytic = analytical_probabilities(H);
        NoiseFit fit = fit_noise_model(analytic, H, locs);
        CHECK(fit.params.p1 == Catch::Approx(np.p1).epsilon(1e-8));
        CHECK(fit.params.pw == Catch::Approx(np.pw).epsilon(1e-8));
        CHECK(fit.params.pi == Catch::Approx(np.pi).epsilon(1e-8));
        CHECK(fit.params.pm == Catch::Approx(np.pm).epsilon(1e-8));
        CHECK(fit.params.pr == Catch::Approx(np.pr).epsilon(1e-8));
        CHECK(fit.params.p2 == Catch::Approx(np.p2).epsilon(1e-8));
        CHECK(fit.residual < 1e-10);

        // idempotence: refitting the fitted forward map returns the same point
        std::map<std::uint64_t, double> forward;
        for (const auto& row : fit.per_hyperedge) forward[row.event_mask] = row.model;
        NoiseFit again = fit_noise_model(forward, H, locs);
        CHECK(again.params.pm == Catch::Approx(fit.params.pm).epsilon(1e-8));
    }

    SECTION("rows are sorted descending by fitted alpha") {
        auto analytic = analytical_probabilities(H);
        NoiseFit fit = fit_noise_model(analytic, H, locs);
        for (std::size_t i = 1; i < fit.per_hyperedge.size(); ++i)
            CHECK(fit.per_hyperedge[i - 1].model >= fit.per_hyperedge[i].model);
    }

    SECTION("calibrated simulation data recovers parameters within 20 percent") {
        auto recs = sample(c, locs, 1000000, 99, 4);
        auto cal = calibrate(std::span<const ShotRecord>(recs), H, 4);
        NoiseFit fit = fit_noise_model(cal.alpha, H, locs);
        CHECK(std::abs(fit.params.p1 - np.p1) / np.p1 < 0.2);
        CHECK(std::abs(fit.params.pw - np.pw) / np.pw < 0.2);
        CHECK(std::abs(fit.params.pi - np.pi) / np.pi < 0.2);
        CHECK(std::abs(fit.params.pm - np.pm) / np.pm < 0.2);
        CHECK(std::abs(fit.params.pr - np.pr) / np.pr < 0.2);
        CHECK(std::abs(fit.params.p2 - np.p2) / np.p2 < 0.2);
    }
}

TEST_CASE("delta metric") {
    std::map<std::uint64_t, double> a = {{1, 0.1}, {2, 0.2}, {4, 0.0}};
    CHECK(delta_metric(a, a) == 0.0);
    auto b = a;
    b[2] += 0.01;
    CHECK(delta_metric(a, b) == Catch::Approx(0.01));
    CHECK(delta_metric(b, a) == Catch::Approx(0.01));

    SECTION("metric properties on random maps") {
        SplitMix64 rng(31);
        for (int trial = 0; trial < 50; ++trial) {
            std::map<std::uint64_t, double> x, y, z;
            for (std::uint64_t k = 1; k <= 6; ++k) {
                x[k] = rng.next_double() * 0.1;
                y[k] = rng.next_double() * 0.1;
                z[k] = rng.next_double() * 0.1;
            }
            CHECK(delta_metric(x, y) >= 0);
            CHECK(delta_metric(x, z) <= delta_metric(x, y) + delta_metric(y, z) + 1e-12);
        }
    }

    SECTION("mismatched hyperedge sets are rejected") {
        std::map<std::uint64_t, double> c = {{1, 0.1}};
        CHECK_THROWS_AS(delta_metric(a, c), std::invalid_argument);
        std::map<std::uint64_t, double> d = {{1, 0.1}, {2, 0.2}, {8, 0.0}};
        CHECK_THROWS_AS(delta_metric(a, d), std::invalid_argument);
    }
}
