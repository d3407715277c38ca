#include "hh412/decoder.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

using namespace hh412;

namespace {

const CodeDefinition kCode = code_412(CodeVariant::ZXZ);

DecodingGraph graph_for(LogicalState st, int rounds, WeightStrategy strategy) {
    Circuit c = build_circuit(kCode, st, rounds);
    auto locs = enumerate_faults(c, fit_noise_params());
    auto H = trace_hypergraph(c, locs, TraceSemantics::Flagged);
    EventTable t = build_event_table(c);
    return build_decoding_graph(H, t.n_events(), strategy);
}

}  // namespace

TEST_CASE("mwpm basics") {
    DecodingGraph g = graph_for(LogicalState::MinusL, 2, WeightStrategy::Analytical);
    MwpmDecoder dec(g);

    SECTION("no defects: empty matching") {
        MatchingResult m = dec.match({});
        CHECK(m.pairs.empty());
        CHECK(m.total_weight == 0);
        CHECK(m.logical_correction == 0);
    }

    SECTION("single defect matches to the boundary along its own edge") {
        // pick an event with a direct boundary edge and no cheaper detour
        int event = -1;
        double w = 0;
        for (const auto& e : g.edges)
            if (e.v == g.boundary() && event < 0) {
                event = e.u;
                w = e.weight;
            }
        REQUIRE(event >= 0);
        MatchingResult m = dec.match({event});
        REQUIRE(m.pairs.size() == 1);
        CHECK(m.pairs[0].first == event);
        CHECK(m.pairs[0].second == g.boundary());
        CHECK(m.total_weight <= w + 1e-12);
    }

    SECTION("unknown defect is rejected") {
        CHECK_THROWS_AS(dec.match({g.n_events + 3}), std::invalid_argument);
    }

    SECTION("matched weight equals the sum of realized path weights") {
        MatchingResult m = dec.match({0, 1, 2});
        double sum = 0;
        for (const auto& path : m.edge_path)
            for (int e : path) sum += g.edges[e].weight;
        CHECK(sum == Catch::Approx(m.total_weight));
    }
}

TEST_CASE("post-selection schemes") {
    Circuit c = build_circuit(kCode, LogicalState::MinusL, 2);
    auto locs = enumerate_faults(c, fit_noise_params());
    auto H = trace_hypergraph(c, locs, TraceSemantics::Flagged);
    EventTable t = build_event_table(c);
    DecodingGraph g = build_decoding_graph(H, t.n_events(), WeightStrategy::Analytical);
    MwpmDecoder dec(g);

    SECTION("all-zero record accepted everywhere") {
        ShotRecord rec;
        for (PostSelection s : {PostSelection::Full, PostSelection::None, PostSelection::Partial}) {
            DecodedShot d = dec.decode(rec, s);
            CHECK(d.verdict == Verdict::Accepted);
            CHECK(d.corrected_logical == 0);
            CHECK_FALSE(d.failed);
        }
    }

    SECTION("any fired event rejects under full post-selection") {
        ShotRecord rec;
        rec.events = 1;  // the round-1 left flag
        DecodedShot d = dec.decode(rec, PostSelection::Full);
        CHECK(d.verdict == Verdict::RejectedFull);
    }

    SECTION("ambiguous matching: partial rejects, none decodes without flipping") {
        // a lone S_X-family defect rides its ambiguous boundary edge
        int sx_event = -1;
        for (const auto& id : t.ids)
            if (id.op == StabOp::SX && id.kind == EventKind::FirstCheck) sx_event = id.index;
        REQUIRE(sx_event >= 0);
        ShotRecord rec;
        rec.events = 1ull << sx_event;
        rec.logical_flip_truth = 1;  // e.g. the underlying fault was Z on d0

        MatchingResult m = dec.match({sx_event});
        REQUIRE(m.used_ambiguous);

        DecodedShot partial = dec.decode(rec, PostSelection::Partial);
        CHECK(partial.verdict == Verdict::RejectedPartial);
        DecodedShot none = dec.decode(rec, PostSelection::None);
        CHECK(none.verdict == Verdict::Accepted);
        CHECK(none.corrected_logical == 0);  // ambiguous edges treated without flipping
        CHECK(none.failed);
    }

    SECTION("flip-class edges correct the logical") {
        // find a flip-class pair edge and fire both endpoints
        for (const auto& e : g.edges) {
            if (e.cls != EdgeClass::Flip || e.v == g.boundary()) continue;
            ShotRecord rec;
            rec.events = (1ull << e.u) | (1ull << e.v);
            rec.logical_flip_truth = 1;
            DecodedShot d = dec.decode(rec, PostSelection::None);
            if (d.corrected_logical == 1) {
                CHECK_FALSE(d.failed);
                return;
            }
        }
        FAIL("no flip-class pair edge produced a correction");
    }
}

TEST_CASE("scheme acceptance ordering on simulated data") {
    Circuit c = build_circuit(kCode, LogicalState::MinusL, 3);
    auto locs = enumerate_faults(c, fit_noise_params());
    auto recs = sample(c, locs, 20000, 11, 4);
    DecodingGraph g = graph_for(LogicalState::MinusL, 3, WeightStrategy::Analytical);
    MwpmDecoder dec(g);
    std::uint64_t acc_full = 0, acc_partial = 0, acc_none = 0;
    for (const auto& rec : recs) {
        if (dec.decode(rec, PostSelection::Full).verdict == Verdict::Accepted) ++acc_full;
        if (dec.decode(rec, PostSelection::Partial).verdict == Verdict::Accepted) ++acc_partial;
        if (dec.decode(rec, PostSelection::None).verdict == Verdict::Accepted) ++acc_none;
    }
    CHECK(acc_full <= acc_partial);
    CHECK(acc_partial <= acc_none);
    CHECK(acc_none == recs.size());
}

TEST_CASE("logical error rate arithmetic") {
    std::vector<DecodedShot> decoded(120000);
    for (std::size_t i = 0; i < decoded.size(); ++i) {
        decoded[i].verdict = i < 30000 ? Verdict::Accepted : Verdict::RejectedFull;
        decoded[i].failed = i < 15;  // 15 failures among the accepted
    }
    RateEstimate r = logical_error_rate(decoded);
    CHECK(r.p_fail == Catch::Approx(5.0e-4));
    CHECK(r.acceptance == Catch::Approx(0.25));
    CHECK(r.p_fail_stderr > 0);

    std::vector<DecodedShot> none_accepted(10, DecodedShot{Verdict::RejectedFull, 0, false});
    CHECK_THROWS_AS(logical_error_rate(none_accepted), std::runtime_error);

    std::vector<DecodedShot> clean(100);
    RateEstimate rc = logical_error_rate(clean);
    CHECK(rc.p_fail == 0.0);
    CHECK(rc.acceptance == 1.0);
}

TEST_CASE("decoded CSV format") {
    std::ostringstream os;
    write_decoded_csv_header(os, "rounds=2 scheme=partial");
    write_decoded_row(os, 0, PostSelection::Partial, {Verdict::Accepted, 1, true});
    write_decoded_row(os, 1, PostSelection::Partial, {Verdict::RejectedPartial, 0, false});
    const std::string want =
        "# rounds=2 scheme=partial\n"
        "shot,scheme,verdict,corrected_logical,failed\n"
        "0,partial,accepted,1,1\n"
        "1,partial,rejected_partial,0,0\n";
    CHECK(os.str() == want);
}
