#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "owns/filters.hpp"
#include "owns/params.hpp"
#include "owns/spectral.hpp"

namespace owns {

// ===== quantitative checks: projection errors, bounds, march stability =====

using LinOp = std::function<Vec(const Vec&)>;

inline LinOp matrix_op(const Mat& m) {
    return [m](const Vec& v) { return Vec(m * v); };
}

/// Worst relative error over random psi of
/// ||P[V+ psi+ + V- psi-] - V+ psi+|| / ||V+ psi+||, psi entries uniform in
/// [-1,1] x [-1,1]i.
double projection_error(const LinOp& p_approx, const Spectrum& spec, int n_trials = 20,
                        std::uint64_t seed = 0);

/// ||P phi - phi|| / ||phi|| for one designated downstream mode.
double mode_error(const LinOp& p_approx, const Vec& mode_vector);

/// The testbed stand-in for the paper's tracked instability mode: the
/// downstream eigenvector with the largest -Im(alpha).
Vec designated_mode(const Spectrum& spec);

enum class Method { OwnsP, OwnsR };

struct BoundReport {
    double bound = 0.0;
    bool precondition_ok = false;
    double f_pp_norm = 0.0;       // ||F++||
    double f_mm_inv_norm = 0.0;   // ||F--^-1||
    double epsilon = 0.0;         // smallness gate actually used
};

/// Right-hand sides of the OWNS-P / OWNS-R error bounds plus whether the
/// smallness precondition holds (eps_hat = 0.01).
BoundReport bound_values(const Spectrum& spec, const RecursionParamSet& xi, Method method,
                         cxd c = cxd(1.0, 0.0));

struct SurvivingMode {
    int index = -1;               // mode index in the unfiltered spectrum order (OWNS-R)
    cxd alpha0;                   // filtered eigenvalue at eta = 0
    cxd alpha_eta;                // filtered eigenvalue at eta_large
};

struct FilteredSpectrumReport {
    std::vector<cxd> filtered_alphas0;     // filtered spectrum at eta = 0
    std::vector<SurvivingMode> survivors;  // upstream modes that made it through
    double eta0 = 0.0;
    double eta_large = 0.0;

    int n_flagged() const { return static_cast<int>(survivors.size()); }
};

/// Briggs stability check of the filtered operator (Fig.-3-style diagnostic):
/// flags modes with Im(alpha) < 0 at eta = 0 that the eta-large test confirms
/// as upstream-going. A report, never an assertion.
FilteredSpectrumReport filtered_spectrum_check(const OperatorBuilder& builder, cxd s0,
                                               const RecursionParamSet& xi, Method method,
                                               std::pair<double, double> eta_pair = {0.0, 0.0},
                                               cxd c = cxd(1.0, 0.0));

/// Rounding-error metric of the beta* polynomial identity at n_samples random
/// points c_k with Re, Im uniform in [-1, 1]. `scale` != 1 evaluates the
/// spectrum-scaled variant (points drawn in [-scale, scale]^2), reported
/// separately from the verbatim metric.
double polynomial_residual_error(const RecursionParamSet& xi, const Vec& beta_star,
                                 int n_samples = 100, std::uint64_t seed = 0, double scale = 1.0,
                                 cxd c = cxd(1.0, 0.0));

enum class Selector { Greedy, Heuristic, Minimal };

const char* to_string(Method m);
const char* to_string(Selector s);

struct ErrorStudyConfig {
    std::vector<int> n_beta_grid;       // strictly increasing
    Method method = Method::OwnsP;
    Selector selector = Selector::Greedy;
    std::uint64_t seed = 0;
    int n_starts = 8;
    int n_trials = 20;
    cxd c{1.0, 0.0};
    HeuristicConfig heuristic;          // used when selector == Heuristic
    bool nested_greedy = true;          // one greedy chain, truncated per n_beta
};

struct ErrorStudyRecord {
    int n_beta = 0;
    Selector selector = Selector::Greedy;
    Method method = Method::OwnsP;
    double J = 0.0;
    double proj_err = 0.0;
    double mode_err = 0.0;
    double bound = 0.0;
    bool precondition_ok = false;
    double beta_star_residual = 0.0;    // NaN for OWNS-P
    double wall_ms = 0.0;
};

/// One selector/method sweep over the n_beta grid. Every record is
/// reproducible from (seed, config). n_threads > 1 parallelizes over cells.
std::vector<ErrorStudyRecord> run_error_study(const OperatorBuilder& builder, cxd s0,
                                              const ErrorStudyConfig& config, int n_threads = 1);

}  // namespace owns
