#pragma once

#include "hh412/circuit.hpp"
#include "hh412/events.hpp"
#include "hh412/frame.hpp"
#include "hh412/noise.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hh412 {

enum class TraceSemantics { Flagged, Deflagged };

enum class LogicalEffect { Preserves, Flips, Mixed };

struct HyperedgeSource {
    int location = -1;  // index into the FaultLocation list
    int fault = -1;     // index into that location's fault alternatives
};

struct Hyperedge {
    std::vector<int> events;  // sorted event indices
    std::uint64_t event_mask = 0;
    double probability = 0;  // first-order: sum of source fault probabilities
    LogicalEffect logical = LogicalEffect::Preserves;
    std::vector<HyperedgeSource> sources;

    int size() const { return static_cast<int>(events.size()); }
};

struct calibration_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Propagates one injected Pauli fault through the circuit. Measurement
// faults precede their readout; every other fault follows its instruction.
// Returns the packed raw flip bits.
inline std::uint64_t propagate_single_fault(const Circuit& circ, int instruction_index,
                                            std::uint32_t fx, std::uint32_t fz) {
    std::uint64_t raw = 0;
    PauliFrame frame;
    for (int i = 0; i < static_cast<int>(circ.instructions.size()); ++i) {
        const Instruction& ins = circ.instructions[i];
        const bool here = i == instruction_index;
        if (here && ins.kind == InstrKind::MeasureZ) frame.apply(fx, fz);
        frame.step(ins, raw);
        if (here && ins.kind != InstrKind::MeasureZ) frame.apply(fx, fz);
    }
    return raw;
}

struct TraceResult {
    std::uint64_t event_mask = 0;
    std::uint8_t logical_flip = 0;
};

inline TraceResult trace_single_fault(const Circuit& circ, const EventTable& table,
                                      const DeflagRules* deflag, int instruction_index,
                                      const Fault& fault) {
    std::uint64_t raw = propagate_single_fault(circ, instruction_index, fault.x_bits, fault.z_bits);
    if (deflag) deflag->apply(raw);
    return {table.compute(raw), table.logical_flip(raw)};
}

// One hyperedge per distinct event signature reachable by a single fault,
// with first-order probabilities and the logical effect of the sources
// (mixed when they disagree). Faults with no visible signature at all form
// one trivial size-0 class, listed first; the paper's census |H| = 32r-2
// counts it, while graph building and calibration operate on the nonempty
// classes only.
inline std::vector<Hyperedge> trace_hypergraph(const Circuit& circ,
                                               const std::vector<FaultLocation>& locations,
                                               TraceSemantics semantics) {
    const bool deflagged = semantics == TraceSemantics::Deflagged;
    EventTable table = build_event_table(circ, deflagged);
    DeflagRules rules;
    if (deflagged) rules = build_deflag_rules(circ);

    std::map<std::uint64_t, Hyperedge> edges;
    for (int l = 0; l < static_cast<int>(locations.size()); ++l) {
        const FaultLocation& loc = locations[l];
        for (int f = 0; f < static_cast<int>(loc.faults.size()); ++f) {
            TraceResult tr = trace_single_fault(circ, table, deflagged ? &rules : nullptr,
                                                loc.instruction_index, loc.faults[f]);
            Hyperedge& h = edges[tr.event_mask];
            if (h.sources.empty()) {
                h.event_mask = tr.event_mask;
                for (int e = 0; e < table.n_events(); ++e)
                    if (tr.event_mask & (1ull << e)) h.events.push_back(e);
                h.logical = tr.logical_flip ? LogicalEffect::Flips : LogicalEffect::Preserves;
            } else if (h.logical != LogicalEffect::Mixed) {
                const bool flips = h.logical == LogicalEffect::Flips;
                if (flips != (tr.logical_flip != 0)) h.logical = LogicalEffect::Mixed;
            }
            h.probability += loc.faults[f].probability;
            h.sources.push_back({l, f});
        }
    }

    std::vector<Hyperedge> out;
    out.reserve(edges.size());
    for (auto& [mask, h] : edges) out.push_back(std::move(h));
    std::sort(out.begin(), out.end(),
              [](const Hyperedge& a, const Hyperedge& b) { return a.events < b.events; });
    return out;
}

// ---- decoding graph --------------------------------------------------------

enum class EdgeClass { Flip, NoFlip, Ambiguous };
enum class WeightStrategy { Uniform, Analytical, Correlation };

inline EdgeClass edge_class_of(LogicalEffect e) {
    switch (e) {
        case LogicalEffect::Flips: return EdgeClass::Flip;
        case LogicalEffect::Preserves: return EdgeClass::NoFlip;
        case LogicalEffect::Mixed: return EdgeClass::Ambiguous;
    }
    return EdgeClass::NoFlip;
}

struct GraphEdge {
    int u = -1;  // event index, or the boundary node
    int v = -1;
    double weight = 0;
    double probability = 0;
    EdgeClass cls = EdgeClass::NoFlip;
};

struct DecodingGraph {
    int n_events = 0;
    WeightStrategy strategy = WeightStrategy::Analytical;
    std::vector<GraphEdge> edges;

    int boundary() const { return n_events; }
    int n_nodes() const { return n_events + 1; }
};

inline double edge_weight_from_probability(double p) {
    constexpr double kCap = 0.5 - 1e-9;
    if (p > kCap) p = kCap;
    return std::log((1.0 - p) / p);
}

// Graph over the size-1/2 hyperedges only. Size-1 edges attach to the merged
// boundary node. P <= 0 edges are dropped; P >= 1/2 is clamped just below.
inline DecodingGraph build_decoding_graph(const std::vector<Hyperedge>& hyperedges, int n_events,
                                          WeightStrategy strategy,
                                          const std::map<std::uint64_t, double>* correlation_probs = nullptr) {
    DecodingGraph g;
    g.n_events = n_events;
    g.strategy = strategy;
    for (const Hyperedge& h : hyperedges) {
        if (h.size() == 0 || h.size() > 2) continue;
        double p = h.probability;
        if (strategy == WeightStrategy::Correlation) {
            if (!correlation_probs)
                throw calibration_error("correlation strategy requires calibrated probabilities");
            auto it = correlation_probs->find(h.event_mask);
            if (it == correlation_probs->end())
                throw calibration_error("missing calibrated probability for a size-1/2 hyperedge");
            p = it->second;
        }
        if (p <= 0 && strategy != WeightStrategy::Uniform) continue;
        GraphEdge e;
        e.u = h.events[0];
        e.v = h.size() == 2 ? h.events[1] : g.boundary();
        e.probability = p;
        e.weight = strategy == WeightStrategy::Uniform ? 1.0 : edge_weight_from_probability(p);
        e.cls = edge_class_of(h.logical);
        g.edges.push_back(e);
    }
    return g;
}

// Re-derive edge classes from the hyperedges backing the graph.
inline void classify_edges(DecodingGraph& graph, const std::vector<Hyperedge>& hyperedges) {
    std::map<std::pair<int, int>, EdgeClass> classes;
    for (const Hyperedge& h : hyperedges) {
        if (h.size() == 0 || h.size() > 2) continue;
        const int v = h.size() == 2 ? h.events[1] : graph.boundary();
        classes[{h.events[0], v}] = edge_class_of(h.logical);
    }
    for (GraphEdge& e : graph.edges) {
        auto it = classes.find({e.u, e.v});
        if (it != classes.end()) e.cls = it->second;
    }
}

// ---- census helpers --------------------------------------------------------

struct HypergraphCensus {
    int total = 0;
    int by_size[5] = {0, 0, 0, 0, 0};  // index = hyperedge size (0 = trivial class)
    int max_size = 0;
};

inline HypergraphCensus census(const std::vector<Hyperedge>& hyperedges) {
    HypergraphCensus c;
    for (const auto& h : hyperedges) {
        ++c.total;
        if (h.size() <= 4) ++c.by_size[h.size()];
        c.max_size = std::max(c.max_size, h.size());
    }
    return c;
}

// ---- text export -----------------------------------------------------------

inline const char* to_string(EdgeClass c) {
    switch (c) {
        case EdgeClass::Flip: return "flip";
        case EdgeClass::NoFlip: return "no-flip";
        case EdgeClass::Ambiguous: return "ambiguous";
    }
    return "?";
}

inline EdgeClass parse_edge_class(const std::string& s) {
    if (s == "flip") return EdgeClass::Flip;
    if (s == "no-flip") return EdgeClass::NoFlip;
    if (s == "ambiguous") return EdgeClass::Ambiguous;
    throw std::invalid_argument("unknown edge class: " + s);
}

inline const char* to_string(WeightStrategy s) {
    switch (s) {
        case WeightStrategy::Uniform: return "uniform";
        case WeightStrategy::Analytical: return "analytical";
        case WeightStrategy::Correlation: return "correlation";
    }
    return "?";
}

inline WeightStrategy parse_weight_strategy(const std::string& s) {
    if (s == "uniform") return WeightStrategy::Uniform;
    if (s == "analytical") return WeightStrategy::Analytical;
    if (s == "correlation") return WeightStrategy::Correlation;
    throw std::invalid_argument("unknown weight strategy: " + s);
}

inline void export_hypergraph(const std::vector<Hyperedge>& hyperedges, std::ostream& os) {
    os.precision(17);
    for (const auto& h : hyperedges) {
        for (std::size_t i = 0; i < h.events.size(); ++i)
            os << (i ? " " : "") << h.events[i];
        os << " | " << h.probability << " | " << to_string(edge_class_of(h.logical)) << "\n";
    }
}

inline std::vector<Hyperedge> parse_hypergraph(std::istream& is) {
    std::vector<Hyperedge> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        Hyperedge h;
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok && tok != "|") h.events.push_back(std::stoi(tok));
        ls >> h.probability >> tok;  // second separator
        std::string cls;
        ls >> cls;
        h.logical = cls == "flip" ? LogicalEffect::Flips
                  : cls == "ambiguous" ? LogicalEffect::Mixed
                                       : LogicalEffect::Preserves;
        for (int e : h.events) h.event_mask |= 1ull << e;
        out.push_back(std::move(h));
    }
    return out;
}

inline void export_decoding_graph(const DecodingGraph& g, std::ostream& os) {
    os.precision(17);
    os << "# events " << g.n_events << "\n";
    os << "# strategy " << to_string(g.strategy) << "\n";
    for (const auto& e : g.edges) {
        os << e.u;
        if (e.v != g.boundary())
            os << " " << e.v;
        os << " | " << e.weight << " | " << e.probability << " | " << to_string(e.cls) << "\n";
    }
}

inline DecodingGraph parse_decoding_graph(std::istream& is) {
    DecodingGraph g;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line);
            std::string hash, key;
            ls >> hash >> key;
            if (key == "events") ls >> g.n_events;
            if (key == "strategy") {
                std::string v;
                ls >> v;
                g.strategy = parse_weight_strategy(v);
            }
            continue;
        }
        GraphEdge e;
        std::istringstream ls(line);
        std::vector<int> nodes;
        std::string tok;
        while (ls >> tok && tok != "|") nodes.push_back(std::stoi(tok));
        ls >> e.weight >> tok >> e.probability >> tok;
        std::string cls;
        ls >> cls;
        e.cls = parse_edge_class(cls);
        e.u = nodes.at(0);
        e.v = nodes.size() > 1 ? nodes[1] : g.boundary();
        g.edges.push_back(e);
    }
    return g;
}

}  // namespace hh412
