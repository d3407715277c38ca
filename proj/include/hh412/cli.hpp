#pragma once

#include "hh412/analysis.hpp"
#include "hh412/correlate.hpp"
#include "hh412/decoder.hpp"
#include "hh412/sim.hpp"
#include "hh412/tracer.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hh412 {

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Batch-run configuration; serializes to flat key=value lines, losslessly.
struct RunConfig {
    LogicalState state = LogicalState::MinusL;
    CodeVariant variant = CodeVariant::ZXZ;
    int rounds = 3;
    std::uint64_t shots = 100000;
    std::uint64_t seed = 1;
    std::string noise = "fit";  // fit | rb | file:<path>
    WeightStrategy strategy = WeightStrategy::Analytical;
    PostSelection scheme = PostSelection::None;
    bool deflagging = false;
    bool equalize = false;
    int threads = 1;
    std::string output_dir = "out";

    std::string serialize() const {
        std::ostringstream os;
        os << "state=" << to_string(state) << "\n";
        os << "variant=" << (variant == CodeVariant::ZXZ ? "ZXZ" : "XZX") << "\n";
        os << "rounds=" << rounds << "\n";
        os << "shots=" << shots << "\n";
        os << "seed=" << seed << "\n";
        os << "noise=" << noise << "\n";
        os << "strategy=" << to_string(strategy) << "\n";
        os << "scheme=" << to_string(scheme) << "\n";
        os << "deflagging=" << (deflagging ? 1 : 0) << "\n";
        os << "equalize=" << (equalize ? 1 : 0) << "\n";
        os << "threads=" << threads << "\n";
        os << "output_dir=" << output_dir << "\n";
        return os.str();
    }

    void set(const std::string& key, const std::string& value) {
        if (key == "state") state = parse_logical_state(value);
        else if (key == "variant") {
            if (value != "ZXZ" && value != "XZX") throw std::invalid_argument("bad variant " + value);
            variant = value == "ZXZ" ? CodeVariant::ZXZ : CodeVariant::XZX;
        } else if (key == "rounds") rounds = std::stoi(value);
        else if (key == "shots") shots = std::stoull(value);
        else if (key == "seed") seed = std::stoull(value);
        else if (key == "noise") noise = value;
        else if (key == "strategy") strategy = parse_weight_strategy(value);
        else if (key == "scheme") scheme = parse_post_selection(value);
        else if (key == "deflagging") deflagging = std::stoi(value) != 0;
        else if (key == "equalize") equalize = std::stoi(value) != 0;
        else if (key == "threads") threads = std::stoi(value);
        else if (key == "output_dir") output_dir = value;
        else throw std::invalid_argument("config: unknown key " + key);
    }

    static RunConfig parse(std::istream& is) {
        RunConfig cfg;
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty() || line[0] == '#') continue;
            auto eq = line.find('=');
            if (eq == std::string::npos) throw std::invalid_argument("config: expected key=value");
            cfg.set(line.substr(0, eq), line.substr(eq + 1));
        }
        if (cfg.rounds < 0) throw std::invalid_argument("config: rounds must be >= 0");
        return cfg;
    }
};

inline NoiseParams resolve_noise(const std::string& spec) {
    if (spec == "fit") return fit_noise_params();
    if (spec == "rb") return rb_noise_params();
    if (spec.rfind("file:", 0) == 0) {
        const std::string path = spec.substr(5);
        std::ifstream f(path);
        if (!f) throw io_error("cannot open noise file " + path);
        return parse_noise_params(f);
    }
    throw std::invalid_argument("config: noise must be fit, rb, or file:<path>");
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& p) {
    std::filesystem::create_directories(p.parent_path().empty() ? "." : p.parent_path());
    std::ofstream f(p);
    if (!f) throw io_error("cannot write " + p.string());
    return f;
}

inline std::ifstream open_in(const std::filesystem::path& p) {
    std::ifstream f(p);
    if (!f) throw io_error("cannot read " + p.string());
    return f;
}

}  // namespace detail

struct PipelineContext {
    RunConfig config;
    CodeDefinition code;
    Circuit circuit;
    NoiseParams params;
    std::vector<FaultLocation> locations;

    explicit PipelineContext(const RunConfig& cfg)
        : config(cfg),
          code(code_412(cfg.variant)),
          circuit(build_circuit(code, cfg.state, cfg.rounds,
                                {cfg.deflagging, cfg.equalize})),
          params(resolve_noise(cfg.noise)),
          locations(enumerate_faults(circuit, params)) {}

    TraceSemantics semantics() const {
        return config.deflagging ? TraceSemantics::Deflagged : TraceSemantics::Flagged;
    }
};

// simulate: sample the configured circuit and write the shot stream plus a
// manifest tying the output to the config and circuit.
inline std::filesystem::path cmd_simulate(const RunConfig& cfg) {
    PipelineContext ctx(cfg);
    const std::filesystem::path dir = cfg.output_dir;
    const auto stream_path = dir / "shots.txt";
    {
        auto f = detail::open_out(stream_path);
        ShotStreamHeader header;
        header.circuit_hash = circuit_hash(ctx.circuit);
        header.params = format_noise_params(ctx.params);
        header.seed = cfg.seed;
        header.n_shots = cfg.shots;
        header.deflagged = cfg.deflagging;
        EventTable table = build_event_table(ctx.circuit, cfg.deflagging);
        for (const auto& id : table.ids) header.event_names.push_back(to_string(id));
        write_shot_stream_header(f, header);
        sample_shots(
            ctx.circuit, ctx.locations, cfg.shots, cfg.seed, cfg.threads,
            [&](std::uint64_t, std::span<const ShotRecord> chunk) {
                for (const auto& rec : chunk) write_shot_record(f, rec);
            },
            cfg.deflagging);
    }
    {
        auto f = detail::open_out(dir / "manifest.txt");
        char cfg_hash[17];
        std::snprintf(cfg_hash, sizeof cfg_hash, "%016llx",
                      static_cast<unsigned long long>(fnv1a64(cfg.serialize())));
        f << "config_hash " << cfg_hash << "\n";
        f << "circuit_hash " << circuit_hash(ctx.circuit) << "\n";
        f << "params " << format_noise_params(ctx.params) << "\n";
        f << cfg.serialize();
    }
    return stream_path;
}

// trace: write the hypergraph and the decoding graph under the configured
// weight strategy (correlation needs a calibrated hypergraph file).
inline std::filesystem::path cmd_trace(const RunConfig& cfg,
                                       const std::string& calibrated_path = "") {
    PipelineContext ctx(cfg);
    const std::filesystem::path dir = cfg.output_dir;
    auto hyperedges = trace_hypergraph(ctx.circuit, ctx.locations, ctx.semantics());
    {
        auto f = detail::open_out(dir / "hypergraph.txt");
        f << "# circuit " << circuit_hash(ctx.circuit) << "\n";
        export_hypergraph(hyperedges, f);
    }
    EventTable table = build_event_table(ctx.circuit, cfg.deflagging);
    std::map<std::uint64_t, double> corr;
    const std::map<std::uint64_t, double>* corr_ptr = nullptr;
    if (cfg.strategy == WeightStrategy::Correlation) {
        if (calibrated_path.empty())
            throw calibration_error("correlation strategy requires --calibrated <file>");
        auto f = detail::open_in(calibrated_path);
        for (const auto& h : parse_hypergraph(f)) corr[h.event_mask] = h.probability;
        corr_ptr = &corr;
    }
    DecodingGraph graph = build_decoding_graph(hyperedges, table.n_events(), cfg.strategy, corr_ptr);
    const auto graph_path = dir / (std::string("graph_") + to_string(cfg.strategy) + ".txt");
    auto f = detail::open_out(graph_path);
    export_decoding_graph(graph, f);
    return graph_path;
}

// calibrate: estimate hyperedge probabilities from a shot stream.
inline std::filesystem::path cmd_calibrate(const std::string& stream_path,
                                           const std::string& hypergraph_path,
                                           const std::string& out_path, int truncate_size = 4,
                                           bool strict = false) {
    std::vector<Hyperedge> hyperedges;
    {
        auto f = detail::open_in(hypergraph_path);
        hyperedges = parse_hypergraph(f);
    }
    std::vector<Hyperedge> candidates;
    for (const auto& h : hyperedges)
        if (h.size() >= 1 && h.size() <= truncate_size) candidates.push_back(h);

    auto f = detail::open_in(stream_path);
    ShotStreamHeader header = read_shot_stream_header(f);
    EventStatistics stats = make_statistics(cluster(candidates));
    ShotRecord rec;
    while (read_shot_record(f, rec)) stats.add_events(rec.events);

    CalibrationResult cal = calibrate(stats, candidates, truncate_size);
    auto out = detail::open_out(out_path);
    out.precision(17);
    out << "# calibrated hypergraph\n";
    out << "# shots " << cal.n_shots << "\n";
    out << "# truncate_size " << cal.truncate_size << "\n";
    out << "# max_residual " << cal.max_residual << "\n";
    out << "# all_converged " << (cal.all_converged ? 1 : 0) << "\n";
    out << "# any_projected " << (cal.any_projected ? 1 : 0) << "\n";
    out << "# strict " << (strict ? 1 : 0) << "\n";
    for (const auto& h : hyperedges) {
        if (h.size() == 0 || h.size() > truncate_size) continue;
        double a = cal.alpha.at(h.event_mask);
        if (strict && a < 0) a = 0;
        for (std::size_t i = 0; i < h.events.size(); ++i) out << (i ? " " : "") << h.events[i];
        out << " | " << a << " | " << to_string(edge_class_of(h.logical)) << "\n";
    }
    return out_path;
}

// decode: run one post-selection scheme over a stream with a decoding graph.
inline std::filesystem::path cmd_decode(const std::string& stream_path,
                                        const std::string& graph_path, PostSelection scheme,
                                        const std::string& out_path,
                                        const std::string& meta = "") {
    DecodingGraph graph;
    {
        auto f = detail::open_in(graph_path);
        graph = parse_decoding_graph(f);
    }
    MwpmDecoder decoder(graph);
    auto f = detail::open_in(stream_path);
    read_shot_stream_header(f);
    auto out = detail::open_out(out_path);
    write_decoded_csv_header(out, meta);
    ShotRecord rec;
    std::uint64_t shot = 0;
    while (read_shot_record(f, rec)) {
        DecodedShot d = decoder.decode(rec, scheme);
        write_decoded_row(out, shot++, scheme, d);
    }
    return out_path;
}

// report: per-file acceptance and failure rates plus a decay fit over rounds
// for each post-selection scheme present.
struct DecodedSummary {
    std::string path;
    int rounds = -1;
    PostSelection scheme = PostSelection::None;
    RateEstimate rate;
};

inline DecodedSummary summarize_decoded(const std::string& path) {
    DecodedSummary s;
    s.path = path;
    auto f = detail::open_in(path);
    std::string line;
    std::vector<DecodedShot> decoded;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string tok;
            while (ls >> tok) {
                auto eq = tok.find('=');
                if (eq == std::string::npos) continue;
                const std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
                if (k == "rounds") s.rounds = std::stoi(v);
                if (k == "scheme") s.scheme = parse_post_selection(v);
            }
            continue;
        }
        if (line.rfind("shot,", 0) == 0) continue;
        std::istringstream ls(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() != 5) throw io_error("decoded csv: bad row in " + path);
        DecodedShot d;
        s.scheme = parse_post_selection(cells[1]);
        d.verdict = cells[2] == "accepted" ? Verdict::Accepted
                  : cells[2] == "rejected_full" ? Verdict::RejectedFull
                                                : Verdict::RejectedPartial;
        d.corrected_logical = static_cast<std::uint8_t>(std::stoi(cells[3]));
        d.failed = cells[4] == "1";
        decoded.push_back(d);
    }
    s.rate = logical_error_rate(decoded);
    return s;
}

inline std::filesystem::path cmd_report(const std::vector<std::string>& decoded_paths,
                                        const std::string& out_prefix) {
    std::vector<DecodedSummary> sums;
    for (const auto& p : decoded_paths) sums.push_back(summarize_decoded(p));

    auto points = detail::open_out(out_prefix + "_points.csv");
    points.precision(17);
    points << "rounds,scheme,acceptance,p_fail,p_fail_stderr,accepted,total\n";
    for (const auto& s : sums)
        points << s.rounds << ',' << to_string(s.scheme) << ',' << s.rate.acceptance << ','
               << s.rate.p_fail << ',' << s.rate.p_fail_stderr << ',' << s.rate.accepted << ','
               << s.rate.total << "\n";

    auto report = detail::open_out(out_prefix + ".txt");
    report.precision(12);
    std::map<PostSelection, std::vector<DecayPoint>> by_scheme;
    for (const auto& s : sums)
        if (s.rounds >= 0)
            by_scheme[s.scheme].push_back(
                {double(s.rounds), s.rate.p_fail, s.rate.p_fail_stderr});
    for (auto& [scheme, pts] : by_scheme) {
        if (pts.size() < 3) continue;
        DecayFit fit = fit_decay(pts);
        report << "scheme=" << to_string(scheme) << " eps_i=" << fit.eps_i
               << " eps_m=" << fit.eps_m << " eps=" << fit.eps
               << " eps_stderr=" << std::sqrt(std::max(0.0, fit.covariance[1][1])) << "\n";
    }
    for (const auto& s : sums)
        report << "file=" << s.path << " rounds=" << s.rounds << " scheme=" << to_string(s.scheme)
               << " acceptance=" << s.rate.acceptance << " p_fail=" << s.rate.p_fail << "\n";
    return out_prefix + ".txt";
}

}  // namespace hh412
