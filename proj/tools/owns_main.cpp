// owns: one-way marching approximations of semi-discretized hyperbolic
// systems with automatic recursion-parameter selection.
//
// Subcommands: spectrum | select | study | march. All take --config/--out;
// results are CSV (data) plus a metadata.json sidecar (timing, versions).

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "owns/cli.hpp"
#include "owns/io.hpp"
#include "owns/types.hpp"

namespace {

int run_guarded(int (*fn)(const owns::cli::CliOptions&), const owns::cli::CliOptions& opts) {
    try {
        return fn(opts);
    } catch (const owns::BadConfig& e) {
        std::cerr << owns::io::error_json("config", e.what()) << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << owns::io::error_json("config", e.what()) << "\n";
        return 1;
    } catch (const owns::OwnsError& e) {
        std::cerr << owns::io::error_json("runtime", e.what()) << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << owns::io::error_json("internal", e.what()) << "\n";
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"one-way marching of hyperbolic systems (OWNS-P / OWNS-R)"};
    app.require_subcommand(1);

    owns::cli::CliOptions opts;
    std::string config_str, out_str;
    std::uint64_t seed_flag = 0;
    bool seed_given = false;

    // precedence: flag > environment > config file
    if (const char* env = std::getenv("OWNS_OUT")) out_str = env;
    if (const char* env = std::getenv("OWNS_THREADS")) opts.threads = std::atoi(env);
    if (const char* env = std::getenv("OWNS_SEED")) {
        opts.seed = std::strtoull(env, nullptr, 10);
    }
    if (opts.threads <= 0) opts.threads = 1;

    app.add_option("--config", config_str, "path to the study config JSON")->required();
    app.add_option("--out", out_str, "output directory")
        ->required(out_str.empty());
    auto* seed_opt = app.add_option("--seed", seed_flag, "override the config seed");
    app.add_option("--threads", opts.threads, "worker threads for study grids");
    app.add_flag("--timings", opts.timings,
                 "write measured wall_ms into CSV bodies (breaks byte-identical reruns)");

    auto* c_spectrum = app.add_subcommand("spectrum", "classified spectrum + eta-pair export");
    auto* c_select = app.add_subcommand("select", "recursion parameter selection + convergence");
    auto* c_study = app.add_subcommand("study", "projection/mode error study over an n_beta grid");
    auto* c_march = app.add_subcommand("march", "spatial march with parameter tracking");

    CLI11_PARSE(app, argc, argv);

    opts.config = config_str;
    opts.out_dir = out_str;
    seed_given = seed_opt->count() > 0;
    if (seed_given) opts.seed = seed_flag;

    if (c_spectrum->parsed()) return run_guarded(owns::cli::cmd_spectrum, opts);
    if (c_select->parsed()) return run_guarded(owns::cli::cmd_select, opts);
    if (c_study->parsed()) return run_guarded(owns::cli::cmd_study, opts);
    if (c_march->parsed()) return run_guarded(owns::cli::cmd_march, opts);
    return 1;
}
