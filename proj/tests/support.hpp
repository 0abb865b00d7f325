#pragma once

// shared fixtures for the unit and acceptance suites

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "owns/rng.hpp"
#include "owns/system.hpp"
#include "owns/testbeds.hpp"

namespace owns::test {

/// Dense Briggs-count oracle: eigenvalues of M(s0 + eta) with alpha = -i lambda,
/// counted by sign of Im(alpha). Independent of the spectral module's ladder.
inline std::pair<int, int> briggs_count_oracle(const OperatorBuilder& builder, cxd s0,
                                               double eta = 1e3) {
    const Mat m = builder(s0 + cxd(eta, 0.0)).M;
    Eigen::ComplexEigenSolver<Mat> es(m, false);
    int np = 0, nm = 0;
    for (int k = 0; k < es.eigenvalues().size(); ++k) {
        const cxd alpha = -I1 * es.eigenvalues()[k];
        (alpha.imag() > 0 ? np : nm)++;
    }
    return {np, nm};
}

/// Random diagonalizable real matrix with prescribed eigenvalues (seeded).
inline RMat real_matrix_with_spectrum(const RVec& eigvals, std::uint64_t seed) {
    const int n = static_cast<int>(eigvals.size());
    auto rng = make_rng(seed, 7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    while (true) {
        RMat q(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) q(i, j) = u(rng);
        Eigen::FullPivLU<RMat> lu(q);
        if (!lu.isInvertible()) continue;
        if (1.0 / lu.rcond() > 50.0) continue;  // keep the transform well conditioned
        return q * eigvals.asDiagonal() * lu.inverse();
    }
}

inline RMat random_real_matrix(int n, double scale, std::uint64_t seed) {
    auto rng = make_rng(seed, 11);
    std::uniform_real_distribution<double> u(-scale, scale);
    RMat m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = u(rng);
    return m;
}

/// The acceptance-scale shear testbed (n = 64, N+ = 48, N- = 16).
inline OperatorBuilder shear_testbed() { return make_shear_layer_2d(ShearLayer2D{}); }

/// Reversed-flow variant (N+ = 16, N- = 48) for the Prop.-18-style checks.
inline OperatorBuilder reversed_shear_testbed() {
    ShearLayer2D p;
    p.u0 = -0.5;
    return make_shear_layer_2d(p);
}

inline OperatorBuilder uniform_euler_testbed(double u = 0.5, int nodes = 8) {
    UniformEuler2D p;
    p.u = u;
    p.nodes = nodes;
    return make_uniform_euler_2d(p);
}

/// Laplace parameter used by most shear-testbed checks: a mostly oscillatory
/// s with a small growth offset so neutral modes sit just off the real axis.
inline cxd shear_s() { return {0.1, 0.7}; }

}  // namespace owns::test

#include "owns/filters.hpp"

namespace owns::test {

/// Admissible random parameter set: each pair perturbs a randomly chosen
/// (downstream, upstream) eigenvalue pair, kept clear of the opposing family
/// so the pole invariant holds with margin.
inline RecursionParamSet random_xi(const Spectrum& spec, int n_beta, std::mt19937_64& rng,
                                   double wobble = 0.15) {
    double scale = 1.0;
    for (int i = 0; i < spec.dim(); ++i) scale = std::max(scale, std::abs(spec.alphas[i]));
    auto clear_of = [&](cxd b, int begin, int end) {
        for (int k = begin; k < end; ++k)
            if (std::abs(b - spec.alphas[k]) < 1e-3 * scale) return false;
        return true;
    };
    RecursionParamSet xi;
    xi.beta_plus.resize(n_beta);
    xi.beta_minus.resize(n_beta);
    std::uniform_int_distribution<int> pick_p(0, spec.n_plus - 1);
    std::uniform_int_distribution<int> pick_m(spec.n_plus, spec.dim() - 1);
    for (int j = 0; j < n_beta; ++j) {
        for (int tries = 0;; ++tries) {
            const cxd b = spec.alphas[pick_p(rng)] + wobble * scale * uniform_complex(rng);
            if (clear_of(b, spec.n_plus, spec.dim()) || tries > 200) {
                xi.beta_plus[j] = b;
                break;
            }
        }
        for (int tries = 0;; ++tries) {
            const cxd b = spec.alphas[pick_m(rng)] + wobble * scale * uniform_complex(rng);
            if (clear_of(b, 0, spec.n_plus) || tries > 200) {
                xi.beta_minus[j] = b;
                break;
            }
        }
    }
    return xi;
}

}  // namespace owns::test
