#pragma once

#include <memory>
#include <vector>

#include <Eigen/LU>

#include "owns/spectral.hpp"
#include "owns/system.hpp"
#include "owns/types.hpp"

namespace owns {

// ===== exact projection and the OWNS-P / OWNS-R approximations =====

enum class ParamOrigin { Greedy, Heuristic, MinimalP, MinimalR, User };

const char* to_string(ParamOrigin o);

/// Ordered recursion parameter pairs (beta+_j, beta-_j), j = 0..n_beta-1.
struct RecursionParamSet {
    Vec beta_plus;
    Vec beta_minus;
    std::vector<int> order_plus;    // permutations applied by order_params
    std::vector<int> order_minus;
    ParamOrigin origin = ParamOrigin::User;

    int n_beta() const { return static_cast<int>(beta_plus.size()); }
};

/// Pole invariant: no beta- within tol of a downstream alpha, no beta+ within
/// tol of an upstream alpha (tol = 1e-12 relative to the spectral scale).
/// Throws PoleCollision.
void validate_params(const RecursionParamSet& xi, const Spectrum& spec);

/// Exact one-way projection P = V E V^-1, E = diag(1 downstream, 0 upstream).
Mat exact_projection(const Spectrum& spec);

struct FilterOWNSP {
    Vec F_diag;      // per-mode gains F_k, spectrum order (inf where 1/F_k = 0)
    Mat R;           // R_{N_beta}
    Mat P_mat;       // V R E R^-1 V^-1
    RVec E_mask;     // 1 on downstream, 0 on upstream
};

/// Matrix form of the OWNS-P filter (diagnostic/test path).
FilterOWNSP ownsp_matrix(const Spectrum& spec, const RecursionParamSet& xi);

/// Production OWNS-P path: factors the full recursion once per (M, xi) as a
/// banded system and applies it to any number of states without ever forming
/// P or an eigendecomposition.
class OwnspFilterSolver {
public:
    OwnspFilterSolver(const OperatorM& op, const RecursionParamSet& xi);
    ~OwnspFilterSolver();
    OwnspFilterSolver(OwnspFilterSolver&&) noexcept;
    OwnspFilterSolver& operator=(OwnspFilterSolver&&) noexcept;

    Vec apply(const Vec& phi) const;
    Mat apply_multi(const Mat& phis) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-shot convenience wrapper around OwnspFilterSolver.
Vec ownsp_apply_filter(const OperatorM& op, const RecursionParamSet& xi, const Vec& phi);

struct FilterOWNSR {
    cxd c{1.0, 0.0};
    Vec E_approx;    // approximate eigenvalues E_{N_beta}^{(k)}, spectrum order
    Vec beta_star;
    Mat P_mat;       // V E_approx V^-1
};

/// Approximate eigenvalues E^{(k)} = prod(a-b-) / [prod(a-b-) + c prod(a-b+)].
Vec ownsr_eigvals(const Spectrum& spec, const RecursionParamSet& xi, cxd c = cxd(1.0, 0.0));

/// Matrix form V E V^-1 plus beta_star (diagnostic/test path).
FilterOWNSR ownsr_matrix(const Spectrum& spec, const RecursionParamSet& xi, cxd c = cxd(1.0, 0.0));

/// Roots beta*_j of (1+c) prod(a - b*_j) = prod(a - b-_j) + c prod(a - b+_j),
/// via coefficient expansion and companion-matrix eigenvalues. The default
/// c = 1 is the factor-2 form quoted everywhere else.
Vec ownsr_beta_star(const RecursionParamSet& xi, cxd c = cxd(1.0, 0.0));

/// Production OWNS-R path: n_beta sequential solves with cached LU factors of
/// (M - i beta*_j I).
class OwnsrFilterSolver {
public:
    OwnsrFilterSolver(const OperatorM& op, const RecursionParamSet& xi, cxd c = cxd(1.0, 0.0));

    Vec apply(const Vec& phi) const;
    Mat apply_multi(const Mat& phis) const;

    const Vec& beta_star() const { return beta_star_; }
    double beta_star_residual() const { return beta_star_residual_; }

private:
    Vec beta_minus_;
    Vec beta_star_;
    cxd c_;
    double beta_star_residual_ = 0.0;
    std::vector<Eigen::PartialPivLU<Mat>> factors_;
    Mat M_;
};

/// One-shot convenience wrapper (beta_star recomputed from xi when empty).
Vec ownsr_apply(const OperatorM& op, const RecursionParamSet& xi, const Vec& beta_star,
                const Vec& phi, cxd c = cxd(1.0, 0.0));

/// ||P M - M P||_2.
double commutator_norm(const Mat& p_like, const OperatorM& op);

// internal helpers shared with param_select / diagnostics

/// prod_j (alpha - beta_plus_j)/(alpha - beta_minus_j) with exact-zero
/// short-circuit; log-magnitude accumulation happens param-side.
cxd filter_gain(cxd alpha, const Vec& beta_plus, const Vec& beta_minus);

}  // namespace owns
