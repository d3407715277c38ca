// Command-line driver for the [[4,1,2]] heavy-hex memory toolkit: simulate,
// trace, calibrate, decode, and report compose the pipeline through files.

#include "hh412/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace hh412;

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitCalibration = 4;
constexpr int kExitFit = 5;

void add_config_flags(CLI::App* app, RunConfig& cfg, std::string& config_path) {
    app->add_option("--config", config_path, "config file (key=value lines)");
    app->add_option_function<std::string>(
        "--state", [&](const std::string& v) { cfg.set("state", v); },
        "logical state: 0L, 1L, +L, -L");
    app->add_option_function<std::string>(
        "--variant", [&](const std::string& v) { cfg.set("variant", v); }, "code layout: ZXZ or XZX");
    app->add_option("--rounds", cfg.rounds, "stabilizer rounds");
    app->add_option("--shots", cfg.shots, "number of shots");
    app->add_option("--seed", cfg.seed, "rng seed (all randomness derives from it)");
    app->add_option("--noise", cfg.noise, "noise source: fit, rb, or file:<path>");
    app->add_option_function<std::string>(
        "--strategy", [&](const std::string& v) { cfg.set("strategy", v); },
        "edge weights: uniform, analytical, correlation");
    app->add_option_function<std::string>(
        "--scheme", [&](const std::string& v) { cfg.set("scheme", v); },
        "post-selection: full, none, partial");
    app->add_flag("--deflagging", cfg.deflagging, "apply the flag feed-forward interpretation");
    app->add_flag("--equalize", cfg.equalize, "pad Z checks to the X-check duration");
    app->add_option("--threads", cfg.threads, "worker threads (speed only)");
    app->add_option("--output-dir", cfg.output_dir, "artifact directory");
}

RunConfig finalize_config(RunConfig cfg, const std::string& config_path, CLI::App* app) {
    if (!config_path.empty()) {
        std::ifstream f(config_path);
        if (!f) throw io_error("cannot open config " + config_path);
        // precedence: start from the file, re-apply explicitly passed flags
        RunConfig merged = RunConfig::parse(f);
        if (app->count("--state")) merged.state = cfg.state;
        if (app->count("--variant")) merged.variant = cfg.variant;
        if (app->count("--rounds")) merged.rounds = cfg.rounds;
        if (app->count("--shots")) merged.shots = cfg.shots;
        if (app->count("--seed")) merged.seed = cfg.seed;
        if (app->count("--noise")) merged.noise = cfg.noise;
        if (app->count("--strategy")) merged.strategy = cfg.strategy;
        if (app->count("--scheme")) merged.scheme = cfg.scheme;
        if (app->count("--deflagging")) merged.deflagging = cfg.deflagging;
        if (app->count("--equalize")) merged.equalize = cfg.equalize;
        if (app->count("--threads")) merged.threads = cfg.threads;
        if (app->count("--output-dir")) merged.output_dir = cfg.output_dir;
        cfg = merged;
    }
    if (cfg.rounds < 0) throw std::invalid_argument("rounds must be >= 0");
    if (cfg.threads < 1) throw std::invalid_argument("threads must be >= 1");
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hh412: flagged [[4,1,2]] heavy-hex memory simulation and decoding"};
    app.require_subcommand(1);

    RunConfig sim_cfg, trace_cfg;
    std::string sim_config_path, trace_config_path, trace_calibrated;
    auto* sim = app.add_subcommand("simulate", "sample shots and write a shot stream");
    add_config_flags(sim, sim_cfg, sim_config_path);

    auto* trace = app.add_subcommand("trace", "export the hypergraph and a decoding graph");
    add_config_flags(trace, trace_cfg, trace_config_path);
    trace->add_option("--calibrated", trace_calibrated,
                      "calibrated hypergraph (required for --strategy correlation)");

    std::string cal_stream, cal_hypergraph, cal_out = "calibrated.txt";
    int cal_truncate = 4;
    bool cal_strict = false;
    auto* cal = app.add_subcommand("calibrate", "estimate hyperedge probabilities from a stream");
    cal->add_option("--stream", cal_stream, "shot stream file")->required();
    cal->add_option("--hypergraph", cal_hypergraph, "traced hypergraph file")->required();
    cal->add_option("--out", cal_out, "output calibrated hypergraph");
    cal->add_option("--truncate-size", cal_truncate, "largest hyperedge size used (2 or 4)");
    cal->add_flag("--strict", cal_strict, "clamp negative probabilities to zero");

    std::string dec_stream, dec_graph, dec_out = "decoded.csv", dec_scheme = "none", dec_meta;
    auto* dec = app.add_subcommand("decode", "decode a stream against a decoding graph");
    dec->add_option("--stream", dec_stream, "shot stream file")->required();
    dec->add_option("--graph", dec_graph, "decoding graph file")->required();
    dec->add_option("--scheme", dec_scheme, "post-selection: full, none, partial");
    dec->add_option("--out", dec_out, "output CSV");
    dec->add_option("--meta", dec_meta, "metadata echoed into the CSV header (key=value ...)");

    std::vector<std::string> rep_inputs;
    std::string rep_out = "report";
    auto* rep = app.add_subcommand("report", "summarize decoded CSVs and fit decay curves");
    rep->add_option("inputs", rep_inputs, "decoded CSV files")->required();
    rep->add_option("--out-prefix", rep_out, "output prefix for report files");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            RunConfig cfg = finalize_config(sim_cfg, sim_config_path, sim);
            auto path = cmd_simulate(cfg);
            std::cout << "wrote " << path.string() << "\n";
        } else if (trace->parsed()) {
            RunConfig cfg = finalize_config(trace_cfg, trace_config_path, trace);
            auto path = cmd_trace(cfg, trace_calibrated);
            std::cout << "wrote " << path.string() << "\n";
        } else if (cal->parsed()) {
            auto path = cmd_calibrate(cal_stream, cal_hypergraph, cal_out, cal_truncate, cal_strict);
            std::cout << "wrote " << path.string() << "\n";
        } else if (dec->parsed()) {
            auto path = cmd_decode(dec_stream, dec_graph, parse_post_selection(dec_scheme), dec_out,
                                   dec_meta);
            std::cout << "wrote " << path.string() << "\n";
        } else if (rep->parsed()) {
            auto path = cmd_report(rep_inputs, rep_out);
            std::cout << "wrote " << path.string() << "\n";
        }
    } catch (const hh412::calibration_error& e) {
        std::cerr << "calibration error: " << e.what() << "\n";
        return kExitCalibration;
    } catch (const hh412::fit_error& e) {
        std::cerr << "fit error: " << e.what() << "\n";
        return kExitFit;
    } catch (const hh412::io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
