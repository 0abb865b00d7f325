#include "owns/diagnostics.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <limits>

#include <Eigen/Dense>

#include "owns/rng.hpp"

namespace owns {

namespace {

double spectral_scale(const Vec& alphas) {
    double s = 1.0;
    for (int i = 0; i < alphas.size(); ++i) s = std::max(s, std::abs(alphas[i]));
    return s;
}

}  // namespace

const char* to_string(Method m) { return m == Method::OwnsP ? "ownsp" : "ownsr"; }

const char* to_string(Selector s) {
    switch (s) {
        case Selector::Greedy: return "greedy";
        case Selector::Heuristic: return "heuristic";
        case Selector::Minimal: return "minimal";
    }
    return "?";
}

double projection_error(const LinOp& p_approx, const Spectrum& spec, int n_trials,
                        std::uint64_t seed) {
    if (n_trials < 1) throw std::invalid_argument("projection_error: n_trials must be >= 1");
    if (spec.n_plus == 0)
        throw std::invalid_argument("projection_error needs a nonempty downstream family");
    auto rng = make_rng(seed, 0);
    double worst = 0.0;
    for (int t = 0; t < n_trials; ++t) {
        const Vec psi_p = uniform_complex_vector(rng, spec.n_plus);
        const Vec psi_m = uniform_complex_vector(rng, spec.n_minus);
        const Vec target = spec.V.leftCols(spec.n_plus) * psi_p;
        const Vec x = target + spec.V.rightCols(spec.n_minus) * psi_m;
        const double denom = target.norm();
        if (denom == 0.0) continue;
        worst = std::max(worst, (p_approx(x) - target).norm() / denom);
    }
    return worst;
}

double mode_error(const LinOp& p_approx, const Vec& mode_vector) {
    const double denom = mode_vector.norm();
    if (denom == 0.0) throw std::invalid_argument("mode_error: zero mode vector");
    return (p_approx(mode_vector) - mode_vector).norm() / denom;
}

Vec designated_mode(const Spectrum& spec) {
    if (spec.n_plus == 0) throw std::invalid_argument("no downstream modes");
    int arg = 0;
    for (int m = 1; m < spec.n_plus; ++m)
        if (spec.alphas[m].imag() < spec.alphas[arg].imag()) arg = m;
    return spec.V.col(arg);
}

BoundReport bound_values(const Spectrum& spec, const RecursionParamSet& xi, Method method, cxd c) {
    constexpr double kEpsHat = 0.01;
    const int np = spec.n_plus, nm = spec.n_minus;

    BoundReport rep;
    for (int m = 0; m < np; ++m)
        rep.f_pp_norm =
            std::max(rep.f_pp_norm, std::abs(filter_gain(spec.alphas[m], xi.beta_plus, xi.beta_minus)));
    for (int k = 0; k < nm; ++k)
        rep.f_mm_inv_norm = std::max(
            rep.f_mm_inv_norm, std::abs(filter_gain(spec.alphas[np + k], xi.beta_minus, xi.beta_plus)));

    const double nv = norm2(spec.V);
    const double nvi = norm2(spec.V.partialPivLu().solve(Mat::Identity(spec.dim(), spec.dim())));

    if (method == Method::OwnsP) {
        const VBlocks vb = v_partition(spec);
        const double w1 = norm2(vb.pp.partialPivLu().solve(vb.pm));
        const double w2 = norm2(vb.mm.partialPivLu().solve(vb.mp));
        rep.bound = nv * rep.f_pp_norm * rep.f_mm_inv_norm * (w1 + w2) * nvi;
        rep.epsilon = std::min(kEpsHat, w1 * w2 > 0.0 ? 1.0 / std::sqrt(w1 * w2) : kEpsHat);
        rep.precondition_ok = rep.f_pp_norm * rep.f_mm_inv_norm < rep.epsilon;
    } else {
        rep.bound = std::max(std::abs(c) * rep.f_pp_norm, rep.f_mm_inv_norm) * nv * nvi;
        rep.epsilon = kEpsHat;
        rep.precondition_ok = std::max(rep.f_pp_norm, rep.f_mm_inv_norm) < rep.epsilon;
    }
    return rep;
}

FilteredSpectrumReport filtered_spectrum_check(const OperatorBuilder& builder, cxd s0,
                                               const RecursionParamSet& xi, Method method,
                                               std::pair<double, double> eta_pair, cxd c) {
    FilteredSpectrumReport rep;
    const cxd s_base = s0 + cxd(eta_pair.first, 0.0);
    rep.eta0 = eta_pair.first;

    if (method == Method::OwnsR) {
        // P^(R) M = V (E diag(i alpha)) V^-1: filtered eigenvalues by index
        BriggsOptions opts;
        opts.eta_large = eta_pair.second;
        const Spectrum spec = full_spectrum(builder, s_base, opts);
        rep.eta_large = spec.eta_used;
        const Vec e0 = ownsr_eigvals(spec, xi, c);
        const double tol = 1e-8 * spectral_scale(spec.alphas);
        rep.filtered_alphas0.reserve(spec.dim());
        for (int k = 0; k < spec.dim(); ++k) rep.filtered_alphas0.push_back(e0[k] * spec.alphas[k]);
        Spectrum spec_eta = spec;   // same Xi applied to the eta-level eigenvalues
        spec_eta.alphas = spec.alphas_eta;
        const Vec e_eta = ownsr_eigvals(spec_eta, xi, c);
        for (int k = spec.n_plus; k < spec.dim(); ++k) {
            const cxd f0 = e0[k] * spec.alphas[k];
            if (f0.imag() < -tol) rep.survivors.push_back({k, f0, e_eta[k] * spec.alphas_eta[k]});
        }
        return rep;
    }

    // OWNS-P: eigenvalues of the filtered operator tracked up the eta ladder
    OperatorFamily fam = [&builder, &xi](cxd s) {
        const OperatorM op = builder(s);
        OwnspFilterSolver solver(op, xi);
        return Mat(solver.apply_multi(op.M));
    };
    const ContinuationResult cont = continue_spectrum(fam, s_base);
    rep.eta_large = cont.eta_large;
    const double tol = 1e-8 * spectral_scale(cont.alphas0);
    const double confirm = 10.0;  // same threshold as the Briggs classification
    rep.filtered_alphas0.assign(cont.alphas0.data(), cont.alphas0.data() + cont.alphas0.size());
    for (int k = 0; k < cont.alphas0.size(); ++k) {
        if (cont.alphas0[k].imag() < -tol && cont.alphas_eta[k].imag() <= -confirm)
            rep.survivors.push_back({-1, cont.alphas0[k], cont.alphas_eta[k]});
    }
    return rep;
}

double polynomial_residual_error(const RecursionParamSet& xi, const Vec& beta_star, int n_samples,
                                 std::uint64_t seed, double scale, cxd c) {
    if (n_samples < 1) throw std::invalid_argument("polynomial_residual_error: n_samples >= 1");
    if (beta_star.size() != xi.n_beta())
        throw std::invalid_argument("beta_star size does not match xi");
    auto rng = make_rng(seed, 0);
    double worst = 0.0;
    for (int t = 0; t < n_samples; ++t) {
        const cxd ck = scale * uniform_complex(rng);
        cxd ps(1.0, 0.0), pm(1.0, 0.0), pp(1.0, 0.0);
        for (int j = 0; j < xi.n_beta(); ++j) {
            ps *= ck - beta_star[j];
            pm *= ck - xi.beta_minus[j];
            pp *= ck - xi.beta_plus[j];
        }
        const double denom = std::abs(pm - pp);
        if (denom == 0.0) continue;
        worst = std::max(worst, std::abs((1.0 + c) * ps - pm - c * pp) / denom);
    }
    return worst;
}

std::vector<ErrorStudyRecord> run_error_study(const OperatorBuilder& builder, cxd s0,
                                              const ErrorStudyConfig& config, int n_threads) {
    if (config.n_beta_grid.empty() && config.selector != Selector::Minimal)
        throw BadConfig("error study: empty n_beta grid");
    for (size_t i = 1; i < config.n_beta_grid.size(); ++i)
        if (config.n_beta_grid[i] <= config.n_beta_grid[i - 1])
            throw BadConfig("error study: n_beta grid must be strictly increasing");

    const Spectrum spec = full_spectrum(builder, s0);
    const OperatorM op = builder(s0);
    const Vec mode = designated_mode(spec);

    // one raw greedy chain at the largest n_beta; prefixes give the nested sets
    RecursionParamSet chain;
    if (config.selector == Selector::Greedy && !config.n_beta_grid.empty()) {
        GreedyOptions gopts;
        gopts.seed = config.seed;
        gopts.n_starts = config.n_starts;
        const int nb_max = config.n_beta_grid.back();
        chain = config.nested_greedy
                    ? greedy_select_unordered(spec, nb_max, gopts)
                    : RecursionParamSet{};
    }

    std::vector<int> grid = config.n_beta_grid;
    if (config.selector == Selector::Minimal) {
        grid = {config.method == Method::OwnsP ? std::min(spec.n_plus, spec.n_minus)
                                               : std::max(spec.n_plus, spec.n_minus)};
    }

    auto run_cell = [&](int cell) -> ErrorStudyRecord {
        const auto t0 = std::chrono::steady_clock::now();
        const int nb = grid[cell];
        RecursionParamSet xi;
        switch (config.selector) {
            case Selector::Greedy: {
                if (config.nested_greedy) {
                    RecursionParamSet prefix;
                    prefix.beta_plus = chain.beta_plus.head(nb);
                    prefix.beta_minus = chain.beta_minus.head(nb);
                    prefix.origin = ParamOrigin::Greedy;
                    xi = order_params(prefix);
                } else {
                    GreedyOptions gopts;
                    gopts.seed = config.seed;
                    gopts.n_starts = config.n_starts;
                    xi = greedy_select(spec, nb, gopts);
                }
                break;
            }
            case Selector::Heuristic: {
                HeuristicConfig h = config.heuristic;
                h.n_beta = nb;
                xi = heuristic_select(h);
                break;
            }
            case Selector::Minimal:
                xi = config.method == Method::OwnsP ? minimal_set_ownsp(spec)
                                                    : minimal_set_ownsr(spec);
                break;
        }

        ErrorStudyRecord rec;
        rec.n_beta = nb;
        rec.selector = config.selector;
        rec.method = config.method;

        const ObjectiveReport obj = objectives(spec, xi);
        rec.J = config.method == Method::OwnsP ? obj.J_ownsp : obj.J_ownsr;

        const std::uint64_t cell_seed = substream_seed(config.seed, 1000 + cell);
        if (config.method == Method::OwnsP) {
            OwnspFilterSolver solver(op, xi);
            const LinOp p = [&solver](const Vec& v) { return solver.apply(v); };
            rec.proj_err = projection_error(p, spec, config.n_trials, cell_seed);
            rec.mode_err = mode_error(p, mode);
            rec.beta_star_residual = std::numeric_limits<double>::quiet_NaN();
        } else {
            OwnsrFilterSolver solver(op, xi, config.c);
            const LinOp p = [&solver](const Vec& v) { return solver.apply(v); };
            rec.proj_err = projection_error(p, spec, config.n_trials, cell_seed);
            rec.mode_err = mode_error(p, mode);
            rec.beta_star_residual =
                polynomial_residual_error(xi, solver.beta_star(), 100, cell_seed, 1.0, config.c);
        }
        const BoundReport br = bound_values(spec, xi, config.method, config.c);
        rec.bound = br.bound;
        rec.precondition_ok = br.precondition_ok;
        rec.wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        return rec;
    };

    std::vector<ErrorStudyRecord> records(grid.size());
    if (n_threads <= 1 || grid.size() <= 1) {
        for (size_t i = 0; i < grid.size(); ++i) records[i] = run_cell(static_cast<int>(i));
    } else {
        std::vector<std::future<void>> futs;
        const int nt = std::min<int>(n_threads, static_cast<int>(grid.size()));
        for (int t = 0; t < nt; ++t) {
            futs.push_back(std::async(std::launch::async, [&, t]() {
                for (size_t i = t; i < grid.size(); i += nt)
                    records[i] = run_cell(static_cast<int>(i));
            }));
        }
        for (auto& f : futs) f.get();
    }
    return records;
}

}  // namespace owns
