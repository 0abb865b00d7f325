#include "owns/marching.hpp"

#include <chrono>
#include <cmath>

#include <Eigen/Dense>

namespace owns {

namespace {

using clock_t_ = std::chrono::steady_clock;

double ms_since(clock_t_::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock_t_::now() - t0).count();
}

/// Max-abs of one physical variable over the grid; undoes the characteristic
/// transform (and the Appendix-B reduction) node by node.
double amplitude_of(const OperatorBuilder& builder, const OperatorM& op, const Vec& phi, int var) {
    const int nodes = builder.disc.n_nodes();
    const int nv = builder.forms.front().n_vars();
    if (var < 0 || var >= nv) throw std::invalid_argument("amplitude variable out of range");

    Vec full;
    if (op.reduction) {
        const auto& red = *op.reduction;
        full = Vec::Zero(nodes * nv);
        for (size_t r = 0; r < red.kept_rows.size(); ++r) full[red.kept_rows[r]] = phi[r];
        const Vec zeros = red.recover_zero(phi);
        for (size_t r = 0; r < red.zero_rows.size(); ++r) full[red.zero_rows[r]] = zeros[r];
    } else {
        full = phi;
    }
    double amp = 0.0;
    for (int i = 0; i < nodes; ++i) {
        const auto& f = builder.forms[builder.forms.size() == 1 ? 0 : i];
        const Vec q = f.T_inv.cast<cxd>() * full.segment(i * nv, nv);
        amp = std::max(amp, std::abs(q[var]));
    }
    return amp;
}

struct FilterAction {
    std::function<Mat(const Mat&)> apply;
};

}  // namespace

double n_factor(const RVec& amplitudes, const RVec& x_grid) {
    if (amplitudes.size() != x_grid.size() || amplitudes.size() == 0)
        throw std::invalid_argument("n_factor: amplitude/grid size mismatch");
    for (int i = 0; i < amplitudes.size(); ++i)
        if (!(amplitudes[i] > 0.0))
            throw NonpositiveAmplitude("amplitude at station " + std::to_string(i) +
                                       " is not positive");
    const double a0 = amplitudes[0];
    double best = 0.0;
    for (int i = 0; i < amplitudes.size(); ++i)
        best = std::max(best, std::log(amplitudes[i] / a0));
    return best;
}

TrackResult track_params(const RecursionParamSet& xi_prev, const OperatorBuilder& builder_new,
                         cxd s, std::pair<int, int> counts_prev, std::pair<int, int> counts_new,
                         int n_beta, const GreedyOptions& greedy_opts) {
    TrackResult out;
    if (counts_prev == counts_new && xi_prev.n_beta() == n_beta) {
        try {
            const OperatorM op = builder_new(s);
            const int nb = xi_prev.n_beta();
            Vec shifts(2 * nb);
            shifts.head(nb) = xi_prev.beta_plus;
            shifts.tail(nb) = xi_prev.beta_minus;
            const NearestEigenpairs near = nearest_eigenpairs(op.M, shifts);
            RecursionParamSet xi;
            xi.beta_plus = near.alphas.head(nb);
            xi.beta_minus = near.alphas.tail(nb);
            xi.origin = xi_prev.origin;
            out.xi = order_params(xi);
            out.xi.origin = xi_prev.origin;
            return out;
        } catch (const NoConvergence&) {
            out.warned = true;  // fall through to a full re-selection
        }
    }
    const Spectrum spec = full_spectrum(builder_new, s);
    out.xi = greedy_select(spec, n_beta, greedy_opts);
    out.refreshed = true;
    return out;
}

MarchResult march(const StationSequence& seq, const MarchOptions& opts, bool complement) {
    const auto t_start = clock_t_::now();
    const int nx = static_cast<int>(seq.x_grid.size());
    if (nx < 2) throw std::invalid_argument("march needs at least two stations");
    for (int i = 0; i + 1 < nx; ++i)
        if (!(seq.x_grid[i + 1] > seq.x_grid[i]))
            throw std::invalid_argument("x grid must be strictly increasing");
    if (!seq.inlet_state.allFinite()) throw std::invalid_argument("inlet state must be finite");
    if (opts.flavor == FilterFlavor::OwnsR && opts.step.reproject_state)
        throw BadConfig("OWNS-R must apply its filter exactly once per step; "
                        "state re-projection schemes are rejected");
    if (complement && opts.flavor != FilterFlavor::Exact)
        throw std::invalid_argument("the complement march is an exact-projection harness only");
    if (opts.flavor != FilterFlavor::Exact && opts.strategy == XiStrategy::FixedXi && !opts.fixed_xi)
        throw BadConfig("FixedXi strategy requires fixed_xi");

    MarchResult res;
    res.states.reserve(nx);
    res.amplitude.resize(nx);
    res.n_factor_running.resize(nx);
    res.xi_log.resize(nx);
    res.integrator_note =
        "implicit midpoint on the filtered right-hand side, substeps=" +
        std::to_string(opts.step.substeps) + ", departure-station operator";

    Vec phi = seq.inlet_state;
    const double inlet_norm = phi.norm();
    RecursionParamSet xi_prev;
    std::pair<int, int> counts_prev{-1, -1};

    for (int i = 0; i < nx; ++i) {
        const auto t_station = clock_t_::now();
        OperatorBuilder builder = seq.builder_at(i);
        if (seq.forcing_at) builder.forcing = seq.forcing_at(i);
        const OperatorM op = builder(seq.s);
        const int n = op.dim();
        const auto counts = builder.char_counts();

        StationRecord& rec = res.xi_log[i];
        rec.x = seq.x_grid[i];

        // --- recursion parameters for this station ---
        RecursionParamSet xi;
        std::optional<Spectrum> spec;
        auto need_spectrum = [&]() -> const Spectrum& {
            if (!spec) {
                const auto e0 = dense_eig_count();
                spec = full_spectrum(builder, seq.s);
                res.cost_log.dense_eigs_selection += dense_eig_count() - e0;
            }
            return *spec;
        };

        if (opts.flavor != FilterFlavor::Exact) {
            switch (opts.strategy) {
                case XiStrategy::GreedyEachStation:
                    xi = greedy_select(need_spectrum(), opts.n_beta, opts.greedy);
                    rec.refreshed = true;
                    break;
                case XiStrategy::GreedyTrack: {
                    if (i == 0) {
                        xi = greedy_select(need_spectrum(), opts.n_beta, opts.greedy);
                        rec.refreshed = true;
                    } else {
                        const auto e0 = dense_eig_count();
                        TrackResult tr = track_params(xi_prev, builder, seq.s, counts_prev, counts,
                                                      opts.n_beta, opts.greedy);
                        res.cost_log.dense_eigs_selection += dense_eig_count() - e0;
                        xi = tr.xi;
                        rec.refreshed = tr.refreshed;
                    }
                    break;
                }
                case XiStrategy::FixedXi:
                    xi = *opts.fixed_xi;
                    break;
                case XiStrategy::HeuristicFixed:
                    xi = heuristic_select(opts.heuristic);
                    break;
            }
        }

        // --- filter action for this station ---
        FilterAction filt;
        if (opts.flavor == FilterFlavor::Exact) {
            Mat p = exact_projection(need_spectrum());
            if (complement) p = Mat::Identity(n, n) - p;
            filt.apply = [p](const Mat& x) { return Mat(p * x); };
        } else if (opts.flavor == FilterFlavor::OwnsP) {
            auto solver = std::make_shared<OwnspFilterSolver>(op, xi);
            filt.apply = [solver](const Mat& x) { return solver->apply_multi(x); };
        } else {
            auto solver = std::make_shared<OwnsrFilterSolver>(op, xi, opts.c);
            filt.apply = [solver](const Mat& x) { return solver->apply_multi(x); };
        }

        if (opts.with_objectives && opts.flavor != FilterFlavor::Exact) {
            const ObjectiveReport rep = objectives(need_spectrum(), xi);
            rec.j_ownsp = rep.J_ownsp;
            rec.j_ownsr = rep.J_ownsr;
        }

        res.states.push_back(phi);
        res.amplitude[i] = amplitude_of(builder, op, phi, opts.amplitude_var);
        rec.xi = xi;

        // --- advance to the next station ---
        if (i + 1 < nx) {
            const double h = (seq.x_grid[i + 1] - seq.x_grid[i]) / std::max(1, opts.step.substeps);
            const Mat k = filt.apply(op.M);
            const Vec kg = op.g_hat.size() ? Vec(filt.apply(op.g_hat)) : Vec(Vec::Zero(n));
            Eigen::PartialPivLU<Mat> lhs(Mat(Mat::Identity(n, n) - 0.5 * h * k));
            const Mat rhs_op = Mat::Identity(n, n) + 0.5 * h * k;
            for (int sub = 0; sub < std::max(1, opts.step.substeps); ++sub) {
                phi = lhs.solve(rhs_op * phi + h * kg);
                ++res.cost_log.linear_solves;
                if (opts.step.reproject_state) phi = filt.apply(phi);
            }
            const double ratio = phi.norm() / std::max(inlet_norm, 1e-300);
            if (ratio > opts.blowup_factor) throw BlowUp(i + 1, ratio);
        }

        rec.wall_ms = ms_since(t_station);
        xi_prev = xi;
        counts_prev = counts;
    }

    res.n_factor_running[0] = 0.0;
    const double a0 = res.amplitude[0];
    if (!(a0 > 0.0)) throw NonpositiveAmplitude("inlet amplitude is not positive");
    for (int i = 1; i < nx; ++i)
        res.n_factor_running[i] =
            std::max(res.n_factor_running[i - 1],
                     res.amplitude[i] > 0.0 ? std::log(res.amplitude[i] / a0)
                                            : -std::numeric_limits<double>::infinity());
    res.n_factor = res.n_factor_running[nx - 1];
    res.cost_log.wall_ms_total = ms_since(t_start);
    return res;
}

}  // namespace owns
