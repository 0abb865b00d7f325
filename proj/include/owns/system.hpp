#pragma once

#include <optional>
#include <string>
#include <vector>

#include "owns/types.hpp"

namespace owns {

// ===== hyperbolic systems and the semi-discrete marching operator =====

/// Constant-coefficient first-order system
///   dq/dt + A dq/dx + sum_j B_j dq/dy_j + C q = f
/// with A, B_j, C real N x N. The constructor verifies hyperbolicity of A
/// (diagonalizable with real eigenvalues up to |Im| <= 1e-10 * ||A||).
struct HyperbolicSystem {
    int n_vars = 0;
    int spatial_dim = 1;             // d; B has d-1 entries
    RMat A;
    std::vector<RMat> B;
    RMat C;

    HyperbolicSystem(RMat A_, std::vector<RMat> B_, RMat C_);
};

/// Characteristic form of one system (or one grid node of a profile):
/// T A T^-1 = diag(a_tilde), diagonal sorted positive / negative / zero.
struct CharacteristicForm {
    RMat T;                          // characteristic transform, phi = T q
    RMat T_inv;
    RVec a_tilde;                    // diagonal of TAT^-1, sorted (+, -, 0)
    std::vector<RMat> B_tilde;       // T B_j T^-1
    std::vector<RMat> B_raw;         // untransformed fluxes (needed for node-varying profiles)
    RMat C_tilde;
    int n_plus = 0, n_minus = 0, n_zero = 0;

    int n_vars() const { return static_cast<int>(a_tilde.size()); }
};

enum class BoundaryKind { Periodic, ZeroDirichlet, WallReflective };

/// One discretized transverse direction. Periodic grids use circulant central
/// differences; non-periodic grids use central interior stencils with
/// one-sided closures (ZeroDirichlet additionally treats ghost values as 0).
struct TransverseDiscretization {
    RVec grid;                       // node coordinates
    int scheme_order = 4;            // 2 or 4
    BoundaryKind bc = BoundaryKind::Periodic;
    std::vector<int> wall_zero_chars;  // characteristic indices pinned at wall nodes
    RMat D;                          // realized difference matrix

    int n_nodes() const { return static_cast<int>(grid.size()); }

    /// d = 1 placeholder: a single node with D = 0.
    static TransverseDiscretization none();
};

TransverseDiscretization make_transverse(const RVec& grid, int scheme_order, BoundaryKind bc,
                                         std::vector<int> wall_zero_chars = {});

/// Uniform grid convenience over [lo, hi]; periodic grids exclude the right endpoint.
TransverseDiscretization make_transverse_uniform(int n_nodes, double lo, double hi,
                                                 int scheme_order, BoundaryKind bc,
                                                 std::vector<int> wall_zero_chars = {});

/// Appendix-B elimination record for systems with zero characteristics.
/// recover_zero reconstructs phi0 = -L00^-1 (L0p phi_pm + f0).
struct SingularReduction {
    Mat L_pp, L_p0, L_0p, L_00;
    RVec a_tilde_pm;                 // diagonal of the nonzero block
    double cond_L00 = 0.0;
    Mat recover_mat;                 // -L00^-1 L0p
    Vec recover_vec;                 // -L00^-1 f0
    std::vector<int> kept_rows;      // full-state indices of the +- rows
    std::vector<int> zero_rows;      // full-state indices of the eliminated rows

    Vec recover_zero(const Vec& phi_pm) const { return recover_mat * phi_pm + recover_vec; }
};

/// Row bookkeeping for the assembled operator: which state rows carry
/// positive / negative characteristics (variable-major within node).
struct OperatorProvenance {
    int n_vars = 0;
    int n_nodes = 0;
    std::vector<int> plus_rows;
    std::vector<int> minus_rows;
    int station = -1;
    std::string note;
};

/// Semi-discrete marching operator: dphi/dx = M phi + g_hat, with
/// M = A~^-1 L and L = -(s I + sum_j i w_j B~_j + C~) assembled over nodes.
struct OperatorM {
    Mat M;
    cxd s{};
    std::vector<double> omega_t;
    Vec g_hat;
    OperatorProvenance provenance;
    std::optional<SingularReduction> reduction;

    int dim() const { return static_cast<int>(M.rows()); }
};

/// Characteristic transform of a single system. Throws NotHyperbolic.
CharacteristicForm characteristic_form(const HyperbolicSystem& system);

/// Assemble M(s) for a uniform-coefficient system on a transverse grid.
/// `forcing` is the physical-variable forcing stacked per node (may be empty).
/// Zero characteristics trigger the Appendix-B reduction automatically.
OperatorM assemble_operator(const CharacteristicForm& form, const TransverseDiscretization& disc,
                            cxd s, const std::vector<double>& omega_t, const Vec& forcing = Vec());

/// Node-varying overload: forms.size() == disc.n_nodes() (or 1 for uniform).
OperatorM assemble_operator(const std::vector<CharacteristicForm>& forms,
                            const TransverseDiscretization& disc, cxd s,
                            const std::vector<double>& omega_t, const Vec& forcing = Vec());

/// Appendix-B reduction, exposed directly. Requires n_zero > 0 (else NotSingular).
std::pair<OperatorM, SingularReduction> reduce_singular(const std::vector<CharacteristicForm>& forms,
                                                        const TransverseDiscretization& disc, cxd s,
                                                        const std::vector<double>& omega_t,
                                                        const Vec& forcing = Vec());

/// Bundles everything needed to evaluate M(s) at arbitrary Re(s) >= 0;
/// this is the "operator factory" handed to the spectral module.
struct OperatorBuilder {
    std::vector<CharacteristicForm> forms;   // size 1 or n_nodes
    TransverseDiscretization disc;
    std::vector<double> omega_t;
    Vec forcing;                             // physical forcing, may be empty

    OperatorM operator()(cxd s) const;

    /// (N+, N-) over the active (non-eliminated) rows.
    std::pair<int, int> char_counts() const;
    int active_dim() const;
};

}  // namespace owns
