#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "owns/system.hpp"
#include "owns/types.hpp"

namespace owns {

// ===== spectrum of M and Briggs classification =====
//
// Convention shared by all modules: M v = i alpha v. A mode is downstream-going
// if Im(alpha) -> +inf as the Laplace growth rate eta -> +inf (Briggs).

struct Spectrum {
    Vec alphas;                 // eigen-wavenumbers, downstream block first
    Mat V;                      // eigenvectors, columns aligned with alphas
    int n_plus = 0;
    int n_minus = 0;
    double cond_V = 0.0;
    cxd s_used{};
    double eta_used = 0.0;
    Vec alphas_eta;             // paired values at s_used + eta_used
    // state rows carrying positive / negative characteristics (the V-row
    // partition of the filter equations); empty means contiguous [0, n_plus)
    std::vector<int> plus_rows;
    std::vector<int> minus_rows;

    int dim() const { return static_cast<int>(alphas.size()); }
    auto downstream() const { return alphas.head(n_plus); }
    auto upstream() const { return alphas.tail(n_minus); }
    Mat V_plus() const { return V.leftCols(n_plus); }
    Mat V_minus() const { return V.rightCols(n_minus); }
    std::pair<std::vector<int>, std::vector<int>> row_partition() const;
};

/// Row-partitioned eigenvector blocks V++ (plus rows, downstream columns),
/// V+-, V-+, V-- used by the OWNS-P matrix form and the error bounds.
struct VBlocks {
    Mat pp, pm, mp, mm;
};
VBlocks v_partition(const Spectrum& spec);

struct BriggsOptions {
    double eta_large = 0.0;     // 0 => 1e3 * max(1, ||M(s0)|| scale)
    double threshold = 10.0;    // min |Im(alpha)| at eta_large for a confident label
    int ladder_levels = 24;     // geometric continuation levels from ~0 to eta_large
    int bisection_depth = 4;    // per-hop adaptive refinement depth (one cheap eig each)
    std::optional<std::pair<int, int>> expected_counts;  // (N+, N-) from A~ signs
};

using OperatorFamily = std::function<Mat(cxd)>;

/// Dense spectrum of M(s0), classified by continuation in eta up the ladder.
/// Throws ClassificationAmbiguous / UnresolvedPairing on inconclusive labels.
Spectrum full_spectrum(const OperatorFamily& family, cxd s0, const BriggsOptions& opts = {});

/// Convenience: classify the operator from a builder; Prop.-1 counts from the
/// characteristic signs are passed as the expected counts unless overridden.
Spectrum full_spectrum(const OperatorBuilder& builder, cxd s0, BriggsOptions opts = {});

/// One continuation hop: pair the two lists by nearest neighbor (must be a
/// bijection) and label each s0 eigenvalue by sign of Im at the eta level.
/// Returns +1 downstream / -1 upstream per entry, in alphas_at_s0 order.
std::vector<int> classify_briggs(const Vec& alphas_at_s0, const Vec& alphas_at_eta,
                                 double threshold = 10.0);

/// Continuation primitive shared by full_spectrum and the filtered-operator
/// diagnostic: follow every eigenvalue of family(s) from s0 to s0 + eta_large
/// along a geometric ladder. alphas_eta is aligned with alphas0 (and with the
/// eigenvector columns of V0).
struct ContinuationResult {
    Vec alphas0;
    Vec alphas_eta;
    Mat V0;
    double eta_large = 0.0;
    /// Pairs of s0-mode indices whose trajectories could not be separated
    /// (coincident branches); harmless when their final labels agree.
    std::vector<std::pair<int, int>> fused;
};
ContinuationResult continue_spectrum(const OperatorFamily& family, cxd s0, double eta_large = 0.0,
                                     int ladder_levels = 24, int bisection_depth = 4);

struct NearestOptions {
    int max_iter = 200;
    double tol = 1e-12;         // relative eigen-residual target
};

struct NearestEigenpairs {
    Vec alphas;                 // one per shift
    Mat vectors;
    std::vector<char> duplicate;  // true where two shifts hit the same eigenvalue
};

/// For each shift, the eigenvalue of M closest to it (shift-invert iteration
/// with a dense fallback disabled; throws NoConvergence past the cap).
NearestEigenpairs nearest_eigenpairs(const Mat& M, const Vec& shifts,
                                     const NearestOptions& opts = {});

/// Instrumentation: number of dense eigendecompositions taken so far.
std::uint64_t dense_eig_count();

}  // namespace owns
