#pragma once

#include "hh412/circuit.hpp"
#include "hh412/events.hpp"
#include "hh412/frame.hpp"
#include "hh412/noise.hpp"
#include "hh412/rng.hpp"

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace hh412 {

// Per-shot result: raw measurement flips (bit = bit_index), derived
// error-sensitive events (bit = EventId.index), and whether the accumulated
// frame flips the measured logical at readout.
struct ShotRecord {
    std::uint64_t raw_flips = 0;
    std::uint64_t events = 0;
    std::uint8_t logical_flip_truth = 0;

    bool operator==(const ShotRecord&) const = default;
};

namespace detail {

struct LocationByInstruction {
    std::vector<const FaultLocation*> at;  // nullptr where no faults attach

    LocationByInstruction(const Circuit& circ, const std::vector<FaultLocation>& locs)
        : at(circ.instructions.size(), nullptr) {
        for (const auto& loc : locs) at[loc.instruction_index] = &loc;
    }
};

inline void inject_sampled_fault(PauliFrame& frame, const FaultLocation& loc, SplitMix64& rng) {
    const double u = rng.next_double();
    double acc = 0;
    for (const Fault& f : loc.faults) {
        acc += f.probability;
        if (u < acc) {
            frame.apply(f.x_bits, f.z_bits);
            return;
        }
    }
}

}  // namespace detail

// Samples one shot: every fault location independently fires one of its
// alternatives (or none); fired Paulis propagate through the Cliffords and
// land in the measurement record.
inline ShotRecord simulate_shot(const Circuit& circ, const detail::LocationByInstruction& locs,
                                const EventTable& table, const DeflagRules* deflag,
                                SplitMix64 rng) {
    ShotRecord rec;
    PauliFrame frame;
    for (std::size_t i = 0; i < circ.instructions.size(); ++i) {
        const Instruction& ins = circ.instructions[i];
        const FaultLocation* loc = locs.at[i];
        if (ins.kind == InstrKind::MeasureZ) {
            if (loc) detail::inject_sampled_fault(frame, *loc, rng);
            frame.step(ins, rec.raw_flips);
        } else {
            frame.step(ins, rec.raw_flips);
            if (loc) detail::inject_sampled_fault(frame, *loc, rng);
        }
    }
    if (deflag) deflag->apply(rec.raw_flips);
    rec.events = table.compute(rec.raw_flips);
    rec.logical_flip_truth = table.logical_flip(rec.raw_flips);
    return rec;
}

// Streams n_shots records to `consume(first_shot_index, span)` in shot order.
// Shot content depends only on (circuit, locations, seed, shot index), so
// results are identical for any thread count.
template <class Consumer>
void sample_shots(const Circuit& circ, const std::vector<FaultLocation>& locations,
                  std::uint64_t n_shots, std::uint64_t seed, int threads, Consumer&& consume,
                  bool deflagged = false) {
    if (threads < 1) threads = 1;
    const detail::LocationByInstruction locs(circ, locations);
    const EventTable table = build_event_table(circ, deflagged);
    DeflagRules rules;
    if (deflagged) rules = build_deflag_rules(circ);
    const DeflagRules* deflag = deflagged ? &rules : nullptr;

    constexpr std::uint64_t kChunk = 8192;
    std::vector<std::vector<ShotRecord>> bufs(threads);
    for (std::uint64_t wave = 0; wave * kChunk < n_shots; wave += threads) {
        const int jobs = static_cast<int>(
            std::min<std::uint64_t>(threads, (n_shots - wave * kChunk + kChunk - 1) / kChunk));
        auto run = [&](int j) {
            const std::uint64_t begin = (wave + j) * kChunk;
            const std::uint64_t end = std::min(n_shots, begin + kChunk);
            bufs[j].clear();
            bufs[j].reserve(end - begin);
            for (std::uint64_t s = begin; s < end; ++s)
                bufs[j].push_back(simulate_shot(circ, locs, table, deflag, shot_rng(seed, s)));
        };
        if (jobs == 1) {
            run(0);
        } else {
            std::vector<std::thread> pool;
            for (int j = 0; j < jobs; ++j) pool.emplace_back(run, j);
            for (auto& t : pool) t.join();
        }
        for (int j = 0; j < jobs; ++j)
            consume((wave + j) * kChunk, std::span<const ShotRecord>(bufs[j]));
    }
}

inline std::vector<ShotRecord> sample(const Circuit& circ,
                                      const std::vector<FaultLocation>& locations,
                                      std::uint64_t n_shots, std::uint64_t seed, int threads = 1,
                                      bool deflagged = false) {
    std::vector<ShotRecord> out;
    out.reserve(n_shots);
    sample_shots(
        circ, locations, n_shots, seed, threads,
        [&](std::uint64_t, std::span<const ShotRecord> chunk) {
            out.insert(out.end(), chunk.begin(), chunk.end());
        },
        deflagged);
    return out;
}

// Reinterprets a record from the flagged circuit under the deflagging
// feed-forward rule: the conditional software X updates every later
// measurement comparison, flag events disappear from the event vector, and
// the logical truth is recomputed from the adjusted readout.
inline ShotRecord apply_deflagging(const ShotRecord& record, const Circuit& circ) {
    if (circ.find_bit(MeasRole::FlagL, is_x_basis_state(circ.initial_state) ? 1 : 0) < 0 &&
        circ.rounds > 0)
        throw std::invalid_argument("apply_deflagging: circuit has no flag measurements");
    const DeflagRules rules = build_deflag_rules(circ);
    const EventTable table = build_event_table(circ, /*deflagged=*/true);
    ShotRecord out = record;
    rules.apply(out.raw_flips);
    out.events = table.compute(out.raw_flips);
    out.logical_flip_truth = table.logical_flip(out.raw_flips);
    return out;
}

// ---- shot stream files ------------------------------------------------------

struct ShotStreamHeader {
    std::string circuit_hash;
    std::string params;
    std::uint64_t seed = 0;
    std::uint64_t n_shots = 0;
    bool deflagged = false;
    std::vector<std::string> event_names;
};

inline void write_shot_stream_header(std::ostream& os, const ShotStreamHeader& h) {
    os << "# hh412 shots v1\n";
    os << "circuit " << h.circuit_hash << "\n";
    os << "params " << h.params << "\n";
    os << "seed " << h.seed << "\n";
    os << "shots " << h.n_shots << "\n";
    os << "deflagged " << (h.deflagged ? 1 : 0) << "\n";
    os << "events " << h.event_names.size() << "\n";
    for (std::size_t i = 0; i < h.event_names.size(); ++i)
        os << "event " << i << " " << h.event_names[i] << "\n";
    os << "data\n";
}

inline void write_shot_record(std::ostream& os, const ShotRecord& rec) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%016llx %016llx %d\n",
                  static_cast<unsigned long long>(rec.events),
                  static_cast<unsigned long long>(rec.raw_flips), int(rec.logical_flip_truth));
    os << buf;
}

// Header is consumed up to and including the "data" line; records follow.
inline ShotStreamHeader read_shot_stream_header(std::istream& is) {
    ShotStreamHeader h;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "data") return h;
        if (key == "circuit") ls >> h.circuit_hash;
        else if (key == "params") std::getline(ls >> std::ws, h.params);
        else if (key == "seed") ls >> h.seed;
        else if (key == "shots") ls >> h.n_shots;
        else if (key == "deflagged") { int v; ls >> v; h.deflagged = v != 0; }
        else if (key == "events") h.event_names.reserve(64);
        else if (key == "event") {
            int idx;
            std::string name;
            ls >> idx >> name;
            h.event_names.push_back(name);
        } else {
            throw std::invalid_argument("shot stream: unknown header key " + key);
        }
    }
    throw std::invalid_argument("shot stream: missing data section");
}

inline bool read_shot_record(std::istream& is, ShotRecord& rec) {
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string ev, raw;
        int truth;
        if (!(ls >> ev >> raw >> truth)) throw std::invalid_argument("shot stream: bad record line");
        rec.events = std::stoull(ev, nullptr, 16);
        rec.raw_flips = std::stoull(raw, nullptr, 16);
        rec.logical_flip_truth = static_cast<std::uint8_t>(truth);
        return true;
    }
    return false;
}

}  // namespace hh412
