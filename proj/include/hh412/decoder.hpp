#pragma once

#include "hh412/matching.hpp"
#include "hh412/sim.hpp"
#include "hh412/tracer.hpp"

#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hh412 {

struct MatchingResult {
    std::vector<std::pair<int, int>> pairs;       // (node, node), boundary allowed
    std::vector<std::vector<int>> edge_path;      // graph edge indices per pair
    double total_weight = 0;
    bool used_ambiguous = false;
    std::uint8_t logical_correction = 0;
};

enum class PostSelection { Full, None, Partial };

enum class Verdict { Accepted, RejectedFull, RejectedPartial };

struct DecodedShot {
    Verdict verdict = Verdict::Accepted;
    std::uint8_t corrected_logical = 0;  // the decoder's inferred logical flip
    bool failed = false;                 // corrected_logical != logical_flip_truth
};

inline const char* to_string(PostSelection s) {
    switch (s) {
        case PostSelection::Full: return "full";
        case PostSelection::None: return "none";
        case PostSelection::Partial: return "partial";
    }
    return "?";
}

inline PostSelection parse_post_selection(const std::string& s) {
    if (s == "full") return PostSelection::Full;
    if (s == "none") return PostSelection::None;
    if (s == "partial") return PostSelection::Partial;
    throw std::invalid_argument("unknown post-selection scheme: " + s);
}

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Accepted: return "accepted";
        case Verdict::RejectedFull: return "rejected_full";
        case Verdict::RejectedPartial: return "rejected_partial";
    }
    return "?";
}

// MWPM decoder bound to one decoding graph. Pair costs are shortest-path
// distances; the realized paths are canonical (ties walk through the lowest
// node id), so correction bits and ambiguity flags are deterministic.
class MwpmDecoder {
  public:
    explicit MwpmDecoder(const DecodingGraph& graph) : g(graph) {
        adj.assign(g.n_nodes(), {});
        for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
            adj[g.edges[e].u].push_back(e);
            adj[g.edges[e].v].push_back(e);
        }
    }

    const DecodingGraph& graph() const { return g; }

    MatchingResult match(const std::vector<int>& defects) const {
        MatchingResult res;
        const int d = static_cast<int>(defects.size());
        if (d == 0) return res;
        for (int v : defects)
            if (v < 0 || v >= g.n_events)
                throw std::invalid_argument("mwpm: defect is not an event node");

        std::vector<std::vector<double>> dist(d);
        for (int i = 0; i < d; ++i) dist[i] = dijkstra(defects[i]);

        PairingInstance inst;
        inst.n = d;
        inst.defect_cost.assign(std::size_t(d) * d, 0);
        inst.boundary_cost.resize(d);
        for (int i = 0; i < d; ++i) {
            inst.boundary_cost[i] = dist[i][g.boundary()];
            for (int j = i + 1; j < d; ++j)
                inst.cost(i, j) = inst.cost(j, i) = dist[i][defects[j]];
        }
        Pairing partner = min_weight_pairing(inst);

        for (int i = 0; i < d; ++i) {
            if (partner[i] >= 0 && partner[i] < i) continue;  // emitted once
            const int target = partner[i] < 0 ? g.boundary() : defects[partner[i]];
            if (!std::isfinite(dist[i][target]))
                throw std::runtime_error("mwpm: defect has no path to its partner");
            res.pairs.emplace_back(defects[i], target);
            res.edge_path.push_back(walk_path(defects[i], target, dist[i]));
            res.total_weight += dist[i][target];
            for (int e : res.edge_path.back()) {
                if (g.edges[e].cls == EdgeClass::Ambiguous) res.used_ambiguous = true;
                if (g.edges[e].cls == EdgeClass::Flip) res.logical_correction ^= 1;
            }
        }
        return res;
    }

    DecodedShot decode(const ShotRecord& record, PostSelection scheme) const {
        DecodedShot out;
        if (scheme == PostSelection::Full) {
            out.verdict = record.events ? Verdict::RejectedFull : Verdict::Accepted;
            out.corrected_logical = 0;
        } else {
            std::vector<int> defects;
            for (int e = 0; e < g.n_events; ++e)
                if (record.events & (1ull << e)) defects.push_back(e);
            MatchingResult m = match(defects);
            if (scheme == PostSelection::Partial && m.used_ambiguous) {
                out.verdict = Verdict::RejectedPartial;
                out.corrected_logical = 0;
            } else {
                out.verdict = Verdict::Accepted;
                out.corrected_logical = m.logical_correction;
            }
        }
        out.failed = out.corrected_logical != record.logical_flip_truth;
        return out;
    }

  private:
    DecodingGraph g;
    std::vector<std::vector<int>> adj;

    std::vector<double> dijkstra(int source) const {
        constexpr double kInf = std::numeric_limits<double>::infinity();
        const int n = g.n_nodes();
        std::vector<double> dist(n, kInf);
        std::vector<char> done(n, 0);
        dist[source] = 0;
        for (int it = 0; it < n; ++it) {
            int u = -1;
            for (int v = 0; v < n; ++v)
                if (!done[v] && (u < 0 || dist[v] < dist[u])) u = v;
            if (u < 0 || !std::isfinite(dist[u])) break;
            done[u] = 1;
            for (int e : adj[u]) {
                const GraphEdge& ed = g.edges[e];
                const int w = ed.u == u ? ed.v : ed.u;
                if (dist[u] + ed.weight < dist[w]) dist[w] = dist[u] + ed.weight;
            }
        }
        return dist;
    }

    // Canonical route: walk backwards from the target, always taking the
    // smallest-id neighbor that lies on a shortest path.
    std::vector<int> walk_path(int source, int target, const std::vector<double>& dist) const {
        std::vector<int> path;
        int x = target;
        while (x != source) {
            int best_node = -1, best_edge = -1;
            for (int e : adj[x]) {
                const GraphEdge& ed = g.edges[e];
                const int y = ed.u == x ? ed.v : ed.u;
                if (dist[y] + ed.weight == dist[x] && (best_node < 0 || y < best_node)) {
                    best_node = y;
                    best_edge = e;
                }
            }
            if (best_edge < 0) throw std::logic_error("mwpm: shortest-path walk failed");
            path.push_back(best_edge);
            x = best_node;
        }
        return path;
    }
};

inline MatchingResult mwpm(const DecodingGraph& graph, const std::vector<int>& defects) {
    return MwpmDecoder(graph).match(defects);
}

inline DecodedShot decode_shot(const DecodingGraph& graph, const ShotRecord& record,
                               PostSelection scheme) {
    return MwpmDecoder(graph).decode(record, scheme);
}

// ---- rates -------------------------------------------------------------------

struct RateEstimate {
    double p_fail = 0;
    double p_fail_stderr = 0;
    double acceptance = 0;
    double acceptance_stderr = 0;
    std::uint64_t total = 0;
    std::uint64_t accepted = 0;
    std::uint64_t failed = 0;
};

inline double binomial_stderr(double p, std::uint64_t n) {
    return n ? std::sqrt(p * (1 - p) / double(n)) : 0.0;
}

inline RateEstimate logical_error_rate(const std::vector<DecodedShot>& decoded) {
    RateEstimate r;
    r.total = decoded.size();
    for (const auto& d : decoded) {
        if (d.verdict != Verdict::Accepted) continue;
        ++r.accepted;
        if (d.failed) ++r.failed;
    }
    if (r.accepted == 0) throw std::runtime_error("logical_error_rate: no accepted shots");
    r.p_fail = double(r.failed) / double(r.accepted);
    r.acceptance = r.total ? double(r.accepted) / double(r.total) : 0.0;
    r.p_fail_stderr = binomial_stderr(r.p_fail, r.accepted);
    r.acceptance_stderr = binomial_stderr(r.acceptance, r.total);
    return r;
}

// ---- decoded CSV -------------------------------------------------------------

inline void write_decoded_csv_header(std::ostream& os, const std::string& meta) {
    if (!meta.empty()) os << "# " << meta << "\n";
    os << "shot,scheme,verdict,corrected_logical,failed\n";
}

inline void write_decoded_row(std::ostream& os, std::uint64_t shot, PostSelection scheme,
                              const DecodedShot& d) {
    os << shot << ',' << to_string(scheme) << ',' << to_string(d.verdict) << ','
       << int(d.corrected_logical) << ',' << (d.failed ? 1 : 0) << '\n';
}

}  // namespace hh412
