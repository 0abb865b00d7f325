#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "owns/filters.hpp"
#include "owns/spectral.hpp"

namespace owns {

// ===== objective functions and recursion parameter selection =====

struct ObjectiveReport {
    RVec J_plus_per_mode;    // J^+(alpha_m; Xi), one per downstream mode
    RVec J_minus_per_mode;   // J^-(alpha_n; Xi), one per upstream mode
    double J_ownsp = 0.0;    // ||F++|| * ||F--^-1||
    double J_ownsr = 0.0;    // max(||F++||, ||F--^-1||)
    int argmax_plus = -1;
    int argmax_minus = -1;
};

/// Per-mode filter gains and the worst-case objectives, computed in
/// log-magnitude space with exact-zero short-circuit. Throws PoleCollision.
ObjectiveReport objectives(const Spectrum& spec, const RecursionParamSet& xi);

struct GreedyOptions {
    int n_starts = 8;
    std::uint64_t seed = 0;
    std::function<bool(cxd)> exclude;   // modes where exclude(alpha) is true never enter Xi
};

/// Greedy selection (random seed pair, then repeated argmax augmentation),
/// best of n_starts independent chains, re-ordered for numerical stability.
RecursionParamSet greedy_select(const Spectrum& spec, int n_beta, const GreedyOptions& opts = {});

/// Same selection in raw chain order (no stability re-ordering). Prefixes of
/// the returned pairs are the greedy chain at smaller n_beta, which nested
/// studies rely on; re-order each prefix before use.
RecursionParamSet greedy_select_unordered(const Spectrum& spec, int n_beta,
                                          const GreedyOptions& opts = {});

struct HeuristicConfig {
    int n_beta = 1;
    cxd anchor_plus{0.0, 1.0};
    std::optional<cxd> anchor_minus;   // default: mirrored across the real axis
    double ratio = 1.0;                // geometric spacing of |beta| along the ray
};

/// Baseline selector: parameters along geometric rays, |b+_j| = |b-_j| per
/// pair. Not fitted to any spectrum. Throws BadConfig.
RecursionParamSet heuristic_select(const HeuristicConfig& config);

/// Exact-convergence set for OWNS-P (n_beta = min(N+, N-), own-family
/// eigenvalues hit exactly, off-family values off-spectrum).
RecursionParamSet minimal_set_ownsp(const Spectrum& spec);

/// Exact-convergence set for OWNS-R (n_beta = max(N+, N-), both families hit).
RecursionParamSet minimal_set_ownsr(const Spectrum& spec);

/// Sort both families ascending by modulus; objectives are order-invariant.
RecursionParamSet order_params(const RecursionParamSet& xi);

/// Fallback used when a family is empty (supersonic N- = 0): conjugate-
/// reflected copies of the other family, nudged off the real axis.
Vec reflect_family(const Vec& betas, double scale);

}  // namespace owns
