#include "owns/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#define LAPACK_COMPLEX_CPP
#include <lapacke.h>

#include "owns/rng.hpp"

namespace owns {

namespace {

std::atomic<std::uint64_t> g_dense_eig_count{0};

double operator_scale(const Mat& m) {
    if (m.size() == 0) return 1.0;
    return std::max(1.0, m.cwiseAbs().rowwise().sum().maxCoeff());
}

/// Eigen-wavenumbers alpha = -i lambda so that M v = i alpha v.
Vec eig_alphas(const Mat& m, Mat* vectors = nullptr) {
    const int n = static_cast<int>(m.rows());
    Mat a = m;  // zgeev overwrites its input
    Vec w(n);
    Mat vr;
    if (vectors) vr.resize(n, n);
    const int info = LAPACKE_zgeev(
        LAPACK_COL_MAJOR, 'N', vectors ? 'V' : 'N', n,
        reinterpret_cast<lapack_complex_double*>(a.data()), std::max(1, n),
        reinterpret_cast<lapack_complex_double*>(w.data()), nullptr, 1,
        vectors ? reinterpret_cast<lapack_complex_double*>(vr.data()) : nullptr, std::max(1, n));
    ++g_dense_eig_count;
    if (info != 0) throw OwnsError("dense eigendecomposition failed (zgeev info != 0)");
    if (vectors) *vectors = std::move(vr);
    return Vec(-I1 * w.array());
}

/// Nearest-neighbor pairing source -> target via greedy global matching.
/// Exactly repeated eigenvalues (degenerate modes) tie-break arbitrarily.
/// A source whose match is materially farther than its strict nearest
/// neighbor is "fused" with the sources holding the contested targets: the
/// assignment within such a group is ambiguous, which is harmless unless the
/// group's final Briggs labels disagree (checked by the caller).
struct Pairing {
    std::vector<int> match;
    std::vector<std::pair<int, int>> fused;  // ambiguous source pairs (s0 indices)
};

Pairing nn_pairing(const Vec& source, const Vec& target) {
    const int n = static_cast<int>(source.size());
    struct Entry {
        double d;
        int i, j;
    };
    std::vector<Entry> entries;
    entries.reserve(static_cast<size_t>(n) * n);
    std::vector<double> nn_dist(n, std::numeric_limits<double>::infinity());
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double d = std::abs(source[i] - target[j]);
            entries.push_back({d, i, j});
            nn_dist[i] = std::min(nn_dist[i], d);
        }
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.d != b.d) return a.d < b.d;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });
    Pairing p;
    p.match.assign(n, -1);
    std::vector<int> owner(n, -1);
    int left = n;
    for (const Entry& e : entries) {
        if (left == 0) break;
        if (p.match[e.i] >= 0 || owner[e.j] >= 0) continue;
        p.match[e.i] = e.j;
        owner[e.j] = e.i;
        --left;
    }
    for (int i = 0; i < n; ++i) {
        const double got = std::abs(source[i] - target[p.match[i]]);
        const double tie_tol = 1e-8 * (1.0 + std::abs(source[i]));
        if (got <= nn_dist[i] + tie_tol) continue;
        // ambiguous: tie this source to everyone holding a target it contests
        for (int j = 0; j < n; ++j) {
            if (owner[j] == i) continue;
            if (std::abs(source[i] - target[j]) <= got + tie_tol)
                p.fused.emplace_back(i, owner[j]);
        }
    }
    return p;
}

}  // namespace

std::uint64_t dense_eig_count() { return g_dense_eig_count.load(); }

std::pair<std::vector<int>, std::vector<int>> Spectrum::row_partition() const {
    if (!plus_rows.empty() || !minus_rows.empty()) return {plus_rows, minus_rows};
    std::vector<int> p(n_plus), m(n_minus);
    std::iota(p.begin(), p.end(), 0);
    std::iota(m.begin(), m.end(), n_plus);
    return {p, m};
}

VBlocks v_partition(const Spectrum& spec) {
    const auto [pr, mr] = spec.row_partition();
    const int np = spec.n_plus, nm = spec.n_minus;
    VBlocks b;
    b.pp.resize(pr.size(), np);
    b.pm.resize(pr.size(), nm);
    b.mp.resize(mr.size(), np);
    b.mm.resize(mr.size(), nm);
    for (size_t r = 0; r < pr.size(); ++r) {
        b.pp.row(r) = spec.V.row(pr[r]).head(np);
        b.pm.row(r) = spec.V.row(pr[r]).tail(nm);
    }
    for (size_t r = 0; r < mr.size(); ++r) {
        b.mp.row(r) = spec.V.row(mr[r]).head(np);
        b.mm.row(r) = spec.V.row(mr[r]).tail(nm);
    }
    return b;
}

std::vector<int> classify_briggs(const Vec& alphas_at_s0, const Vec& alphas_at_eta,
                                 double threshold) {
    if (alphas_at_s0.size() != alphas_at_eta.size())
        throw std::invalid_argument("classify_briggs: list sizes differ");
    const Pairing p = nn_pairing(alphas_at_s0, alphas_at_eta);
    std::vector<int> labels(alphas_at_s0.size());
    for (int i = 0; i < alphas_at_s0.size(); ++i) {
        const double im = alphas_at_eta[p.match[i]].imag();
        if (im >= threshold)
            labels[i] = +1;
        else if (im <= -threshold)
            labels[i] = -1;
        else
            throw ClassificationAmbiguous(
                "eigenvalue " + std::to_string(i) + " has |Im(alpha)| = " + std::to_string(std::abs(im)) +
                " below the classification threshold at eta large");
    }
    for (const auto& [a, b] : p.fused) {
        if (labels[a] != labels[b])
            throw UnresolvedPairing("nearest-neighbor matching is not a bijection for modes " +
                                    std::to_string(a) + " and " + std::to_string(b) +
                                    ", whose labels differ");
    }
    return labels;
}

namespace {

/// One ladder hop with depth-limited bisection. An ambiguity that reproduces
/// the identical fused set after a bisection is persistent (coincident
/// branches) and is accepted immediately; the final label check catches any
/// scramble that would actually matter.
void continuation_hop(const OperatorFamily& family, cxd s0, Vec& current, double eta_a,
                      double eta_b, int depth, std::vector<std::pair<int, int>>& fused_out,
                      const std::vector<std::pair<int, int>>* parent_fused = nullptr) {
    const int n = static_cast<int>(current.size());
    Vec next = eig_alphas(family(s0 + cxd(eta_b, 0.0)));
    Pairing p = nn_pairing(current, next);
    std::sort(p.fused.begin(), p.fused.end());
    p.fused.erase(std::unique(p.fused.begin(), p.fused.end()), p.fused.end());
    // bisect only while refinement keeps shrinking the ambiguous set
    const bool persistent = parent_fused && p.fused.size() >= parent_fused->size();
    if (!p.fused.empty() && depth > 0 && !persistent) {
        const double mid = 0.5 * (eta_a + eta_b);
        continuation_hop(family, s0, current, eta_a, mid, depth - 1, fused_out, &p.fused);
        continuation_hop(family, s0, current, mid, eta_b, depth - 1, fused_out, &p.fused);
        return;
    }
    fused_out.insert(fused_out.end(), p.fused.begin(), p.fused.end());
    Vec reordered(n);
    for (int i = 0; i < n; ++i) reordered[i] = next[p.match[i]];
    current = reordered;
}

}  // namespace

ContinuationResult continue_spectrum(const OperatorFamily& family, cxd s0, double eta_large,
                                     int ladder_levels, int bisection_depth) {
    Mat m0 = family(s0);
    const int n = static_cast<int>(m0.rows());
    if (n == 0) throw EmptySpectrum();
    if (eta_large <= 0.0) eta_large = 1e3 * operator_scale(m0);

    ContinuationResult out;
    out.eta_large = eta_large;
    out.alphas0 = eig_alphas(m0, &out.V0);

    // geometric continuation ladder 0 -> eta_large, adaptive hop bisection
    const int levels = std::max(2, ladder_levels);
    const double eta_min = eta_large * 1e-6;
    const double ratio = std::pow(eta_large / eta_min, 1.0 / (levels - 1));
    std::vector<double> etas;
    etas.push_back(0.0);
    for (int k = 0; k < levels; ++k) etas.push_back(eta_min * std::pow(ratio, k));

    Vec current = out.alphas0;
    for (size_t k = 1; k < etas.size(); ++k)
        continuation_hop(family, s0, current, etas[k - 1], etas[k], bisection_depth, out.fused);
    out.alphas_eta = current;
    return out;
}

Spectrum full_spectrum(const OperatorFamily& family, cxd s0, const BriggsOptions& opts) {
    ContinuationResult cont = continue_spectrum(family, s0, opts.eta_large, opts.ladder_levels,
                                                opts.bisection_depth);
    const int n = static_cast<int>(cont.alphas0.size());
    const double eta_large = cont.eta_large;
    const Vec& a0 = cont.alphas0;
    const Vec& a_top = cont.alphas_eta;
    const Mat& v0 = cont.V0;

    // labels at the top of the ladder, chained back to the s0 ordering
    std::vector<int> labels(n);
    int n_plus = 0, n_minus = 0;
    for (int i = 0; i < n; ++i) {
        const double im = a_top[i].imag();
        if (im >= opts.threshold) {
            labels[i] = +1;
            ++n_plus;
        } else if (im <= -opts.threshold) {
            labels[i] = -1;
            ++n_minus;
        } else {
            throw ClassificationAmbiguous("mode " + std::to_string(i) +
                                          " is unclassifiable at eta = " + std::to_string(eta_large));
        }
    }
    // coincident-branch scrambles are harmless only within one label class
    for (const auto& [a, b] : cont.fused) {
        if (labels[a] != labels[b])
            throw UnresolvedPairing(
                "Briggs continuation could not separate modes " + std::to_string(a) + " and " +
                std::to_string(b) + ", whose labels differ");
    }
    if (opts.expected_counts) {
        auto [ep, em] = *opts.expected_counts;
        if (ep != n_plus || em != n_minus)
            throw ClassificationAmbiguous(
                "Briggs counts (" + std::to_string(n_plus) + ", " + std::to_string(n_minus) +
                ") disagree with the characteristic sign counts (" + std::to_string(ep) + ", " +
                std::to_string(em) + ")");
    }

    // order: downstream block first; within a family by (Im, Re) at s0
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) {
        if (labels[i] != labels[j]) return labels[i] > labels[j];
        if (a0[i].imag() != a0[j].imag()) return a0[i].imag() < a0[j].imag();
        return a0[i].real() < a0[j].real();
    });

    Spectrum spec;
    spec.alphas.resize(n);
    spec.alphas_eta.resize(n);
    spec.V.resize(n, n);
    for (int k = 0; k < n; ++k) {
        const int i = idx[k];
        spec.alphas[k] = a0[i];
        spec.alphas_eta[k] = a_top[i];
        Vec col = v0.col(i);
        col /= col.norm();
        const double mx = col.cwiseAbs().maxCoeff();
        for (int r = 0; r < n; ++r) {
            if (std::abs(col[r]) > 1e-12 * mx) {
                col *= std::conj(col[r]) / std::abs(col[r]);
                break;
            }
        }
        spec.V.col(k) = col;
    }
    spec.n_plus = n_plus;
    spec.n_minus = n_minus;
    spec.cond_V = cond2(spec.V);
    spec.s_used = s0;
    spec.eta_used = eta_large;
    return spec;
}

Spectrum full_spectrum(const OperatorBuilder& builder, cxd s0, BriggsOptions opts) {
    if (!opts.expected_counts) opts.expected_counts = builder.char_counts();
    Spectrum spec = full_spectrum([&builder](cxd s) { return builder(s).M; }, s0, opts);
    const OperatorM op0 = builder(s0);
    spec.plus_rows = op0.provenance.plus_rows;
    spec.minus_rows = op0.provenance.minus_rows;
    return spec;
}

NearestEigenpairs nearest_eigenpairs(const Mat& m, const Vec& shifts, const NearestOptions& opts) {
    if (shifts.size() == 0) throw std::invalid_argument("nearest_eigenpairs: no shifts");
    const int n = static_cast<int>(m.rows());
    const double m_scale = operator_scale(m);

    NearestEigenpairs out;
    out.alphas.resize(shifts.size());
    out.vectors.resize(n, shifts.size());
    out.duplicate.assign(shifts.size(), 0);

    for (int k = 0; k < shifts.size(); ++k) {
        const cxd sigma = shifts[k];
        // regularized shift keeps the factorization usable when sigma is an
        // exact eigenvalue; the Rayleigh quotient recovers full accuracy
        const double delta = 1e-9 * (1.0 + std::abs(sigma)) + 1e-12 * m_scale;
        Mat shifted = m - I1 * sigma * Mat::Identity(n, n);
        shifted.diagonal().array() += delta;
        Eigen::PartialPivLU<Mat> lu(shifted);

        auto rng = make_rng(0x5eedULL, static_cast<std::uint64_t>(k));
        Vec v = uniform_complex_vector(rng, n);
        v /= v.norm();

        bool converged = false;
        cxd alpha{};
        for (int it = 0; it < opts.max_iter; ++it) {
            Vec w = lu.solve(v);
            const double wn = w.norm();
            if (!std::isfinite(wn) || wn == 0.0) break;
            v = w / wn;
            const cxd lambda = v.dot(m * v);  // Rayleigh quotient (v is unit)
            alpha = -I1 * lambda;
            const double resid = (m * v - lambda * v).norm();
            if (resid <= opts.tol * m_scale) {
                converged = true;
                break;
            }
        }
        if (!converged) throw NoConvergence(sigma);
        out.alphas[k] = alpha;
        out.vectors.col(k) = v;
    }

    for (int i = 0; i < shifts.size(); ++i) {
        for (int j = i + 1; j < shifts.size(); ++j) {
            if (std::abs(out.alphas[i] - out.alphas[j]) <= 1e-8 * m_scale) {
                out.duplicate[i] = 1;
                out.duplicate[j] = 1;
            }
        }
    }
    return out;
}

}  // namespace owns
