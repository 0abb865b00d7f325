#include "owns/cli.hpp"

#include <fstream>

#include "owns/diagnostics.hpp"
#include "owns/io.hpp"
#include "owns/marching.hpp"

namespace owns::cli {

namespace {

struct Loaded {
    io::StudyConfig cfg;
    std::uint64_t seed;
};

Loaded load(const CliOptions& opts) {
    Loaded l{io::load_config(opts.config), 0};
    l.seed = opts.seed.value_or(l.cfg.seed);
    std::filesystem::create_directories(opts.out_dir);
    return l;
}

GreedyOptions greedy_options(const io::StudyConfig& cfg, std::uint64_t seed) {
    GreedyOptions g;
    g.seed = seed;
    g.n_starts = cfg.n_starts;
    if (cfg.exclude_im_above) {
        const double lim = *cfg.exclude_im_above;
        g.exclude = [lim](cxd a) { return a.imag() > lim; };
    }
    return g;
}

std::vector<Selector> selectors_of(const std::string& kind) {
    if (kind == "greedy") return {Selector::Greedy};
    if (kind == "heuristic") return {Selector::Heuristic};
    if (kind == "minimal") return {Selector::Minimal};
    if (kind == "both") return {Selector::Greedy, Selector::Heuristic};
    throw BadConfig("selector.kind must be greedy | heuristic | minimal | both");
}

std::vector<Method> methods_of(const std::string& m) {
    if (m == "ownsp") return {Method::OwnsP};
    if (m == "ownsr") return {Method::OwnsR};
    if (m == "both") return {Method::OwnsP, Method::OwnsR};
    throw BadConfig("method must be ownsp | ownsr | both for studies");
}

}  // namespace

int cmd_spectrum(const CliOptions& opts) {
    auto [cfg, seed] = load(opts);
    const Spectrum spec = full_spectrum(cfg.system.builder, cfg.s);
    io::write_spectrum_csv(opts.out_dir / "spectrum.csv", spec);
    io::write_metadata(opts.out_dir / "metadata.json", "spectrum", opts.config, seed, opts.threads);
    return 0;
}

int cmd_select(const CliOptions& opts) {
    auto [cfg, seed] = load(opts);
    if (cfg.n_beta_grid.empty()) throw BadConfig("select needs n_beta or n_beta_grid");
    const Spectrum spec = full_spectrum(cfg.system.builder, cfg.s);

    std::vector<io::ConvergenceRow> rows;
    for (const Selector sel : selectors_of(cfg.selector_kind)) {
        RecursionParamSet xi_max;
        if (sel == Selector::Greedy) {
            const RecursionParamSet chain =
                greedy_select_unordered(spec, cfg.n_beta_grid.back(), greedy_options(cfg, seed));
            for (int nb : cfg.n_beta_grid) {
                RecursionParamSet prefix;
                prefix.beta_plus = chain.beta_plus.head(nb);
                prefix.beta_minus = chain.beta_minus.head(nb);
                prefix.origin = ParamOrigin::Greedy;
                const RecursionParamSet xi = order_params(prefix);
                const ObjectiveReport rep = objectives(spec, xi);
                rows.push_back({nb, "greedy", rep.J_ownsp, rep.J_ownsr,
                                rep.J_plus_per_mode.size() ? rep.J_plus_per_mode.maxCoeff() : 0.0,
                                rep.J_minus_per_mode.size() ? rep.J_minus_per_mode.maxCoeff() : 0.0});
                xi_max = xi;
            }
        } else if (sel == Selector::Heuristic) {
            for (int nb : cfg.n_beta_grid) {
                HeuristicConfig h = cfg.heuristic;
                h.n_beta = nb;
                const RecursionParamSet xi = heuristic_select(h);
                const ObjectiveReport rep = objectives(spec, xi);
                rows.push_back({nb, "heuristic", rep.J_ownsp, rep.J_ownsr,
                                rep.J_plus_per_mode.size() ? rep.J_plus_per_mode.maxCoeff() : 0.0,
                                rep.J_minus_per_mode.size() ? rep.J_minus_per_mode.maxCoeff() : 0.0});
                xi_max = xi;
            }
        } else {
            throw BadConfig("select supports greedy | heuristic | both");
        }
        const std::string tag = sel == Selector::Greedy ? "greedy" : "heuristic";
        io::write_xi_csv(opts.out_dir / ("xi_" + tag + ".csv"), xi_max);
        io::write_xi_json(opts.out_dir / ("xi_" + tag + ".json"), xi_max);
    }
    io::write_convergence_csv(opts.out_dir / "convergence.csv", rows);
    io::write_metadata(opts.out_dir / "metadata.json", "select", opts.config, seed, opts.threads);
    return 0;
}

int cmd_study(const CliOptions& opts) {
    auto [cfg, seed] = load(opts);
    std::vector<ErrorStudyRecord> all;
    for (const Method method : methods_of(cfg.method)) {
        for (const Selector sel : selectors_of(cfg.selector_kind)) {
            ErrorStudyConfig sc;
            sc.n_beta_grid = cfg.n_beta_grid;
            sc.method = method;
            sc.selector = sel;
            sc.seed = seed;
            sc.n_starts = cfg.n_starts;
            sc.n_trials = cfg.n_trials;
            sc.c = cfg.c;
            sc.heuristic = cfg.heuristic;
            auto records = run_error_study(cfg.system.builder, cfg.s, sc, opts.threads);
            all.insert(all.end(), records.begin(), records.end());
        }
    }
    io::write_study_csv(opts.out_dir / "study.csv", all, opts.timings);
    io::write_metadata(opts.out_dir / "metadata.json", "study", opts.config, seed, opts.threads);
    return 0;
}

int cmd_march(const CliOptions& opts) {
    auto [cfg, seed] = load(opts);
    if (cfg.stations < 2) throw BadConfig("march requires a march section with stations >= 2");
    if (cfg.n_beta_grid.empty() && cfg.flavor != "exact")
        throw BadConfig("march needs n_beta");

    StationSequence seq;
    seq.s = cfg.s;
    seq.x_grid.resize(cfg.stations);
    for (int i = 0; i < cfg.stations; ++i)
        seq.x_grid[i] = cfg.x0 + (cfg.x1 - cfg.x0) * i / (cfg.stations - 1);

    const io::StudyConfig& c = cfg;
    const int last = cfg.stations - 1;
    if (cfg.u_ramp_to && c.system.builder_at_fraction) {
        const double u_to = *cfg.u_ramp_to;
        auto at_frac = c.system.builder_at_fraction;
        seq.builder_at = [at_frac, last, u_to](int i) {
            return at_frac(static_cast<double>(i) / last, u_to);
        };
    } else {
        auto builder = c.system.builder;
        seq.builder_at = [builder](int) { return builder; };
    }

    // inlet: the most unstable downstream mode at the first station
    const Spectrum spec0 = full_spectrum(seq.builder_at(0), cfg.s);
    seq.inlet_state = designated_mode(spec0);

    MarchOptions mopts;
    if (cfg.flavor == "exact")
        mopts.flavor = FilterFlavor::Exact;
    else if (cfg.flavor == "ownsp")
        mopts.flavor = FilterFlavor::OwnsP;
    else if (cfg.flavor == "ownsr")
        mopts.flavor = FilterFlavor::OwnsR;
    else
        throw BadConfig("march.flavor must be exact | ownsp | ownsr");

    if (cfg.strategy == "track")
        mopts.strategy = XiStrategy::GreedyTrack;
    else if (cfg.strategy == "greedy_each")
        mopts.strategy = XiStrategy::GreedyEachStation;
    else if (cfg.strategy == "heuristic")
        mopts.strategy = XiStrategy::HeuristicFixed;
    else if (cfg.strategy != "compare")
        throw BadConfig("march.strategy must be track | greedy_each | heuristic | compare");

    mopts.n_beta = cfg.n_beta_grid.empty() ? 8 : cfg.n_beta_grid.back();
    mopts.greedy = greedy_options(cfg, seed);
    mopts.heuristic = cfg.heuristic;
    mopts.heuristic.n_beta = mopts.n_beta;
    mopts.c = cfg.c;
    mopts.step.substeps = cfg.substeps;
    mopts.amplitude_var = cfg.amplitude_var;
    mopts.with_objectives = cfg.with_objectives;

    if (cfg.strategy == "compare") {
        // Table-style cost comparison: tracked greedy vs fixed heuristic
        mopts.strategy = XiStrategy::GreedyTrack;
        const MarchResult greedy_run = march(seq, mopts);
        mopts.strategy = XiStrategy::HeuristicFixed;
        const MarchResult heuristic_run = march(seq, mopts);
        io::write_march_csv(opts.out_dir / "march_greedy.csv", greedy_run, opts.timings);
        io::write_march_csv(opts.out_dir / "march_heuristic.csv", heuristic_run, opts.timings);
        if (opts.timings) {
            std::ofstream out(opts.out_dir / "cost_table.csv", std::ios::binary);
            out << "selector,n_beta,wall_ms,speedup_vs_heuristic\n";
            const double wh = heuristic_run.cost_log.wall_ms_total;
            const double wg = greedy_run.cost_log.wall_ms_total;
            out << "heuristic," << mopts.n_beta << ',' << io::format_double(wh) << ",1\n";
            out << "greedy," << mopts.n_beta << ',' << io::format_double(wg) << ','
                << io::format_double(wh / wg) << '\n';
        }
    } else {
        const MarchResult result = march(seq, mopts);
        io::write_march_csv(opts.out_dir / "march.csv", result, opts.timings);
        if (!result.xi_log.empty() && result.xi_log.back().xi.n_beta() > 0)
            io::write_xi_json(opts.out_dir / "xi_final.json", result.xi_log.back().xi);
    }
    io::write_metadata(opts.out_dir / "metadata.json", "march", opts.config, seed, opts.threads);
    return 0;
}

}  // namespace owns::cli
