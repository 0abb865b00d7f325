#include "owns/filters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "owns/banded.hpp"
#include "owns/rng.hpp"

namespace owns {

namespace {

constexpr double kPoleTol = 1e-12;
constexpr double kCondLimit = 1e12;

double spectral_scale(const Vec& alphas) {
    double s = 1.0;
    for (int i = 0; i < alphas.size(); ++i) s = std::max(s, std::abs(alphas[i]));
    return s;
}

/// Monic polynomial coefficients (descending powers, c[0] = 1) from its roots.
Vec monic_from_roots(const Vec& roots) {
    Vec c = Vec::Zero(roots.size() + 1);
    c[0] = 1.0;
    for (int j = 0; j < roots.size(); ++j)
        for (int k = static_cast<int>(j) + 1; k >= 1; --k) c[k] -= roots[j] * c[k - 1];
    return c;
}

}  // namespace

const char* to_string(ParamOrigin o) {
    switch (o) {
        case ParamOrigin::Greedy: return "greedy";
        case ParamOrigin::Heuristic: return "heuristic";
        case ParamOrigin::MinimalP: return "minimal_P";
        case ParamOrigin::MinimalR: return "minimal_R";
        case ParamOrigin::User: return "user";
    }
    return "?";
}

void validate_params(const RecursionParamSet& xi, const Spectrum& spec) {
    if (xi.beta_plus.size() != xi.beta_minus.size())
        throw PoleCollision("recursion parameter families have different lengths");
    const double tol = kPoleTol * spectral_scale(spec.alphas);
    for (int j = 0; j < xi.n_beta(); ++j) {
        for (int m = 0; m < spec.n_plus; ++m) {
            if (std::abs(xi.beta_minus[j] - spec.alphas[m]) <= tol)
                throw PoleCollision("beta-_" + std::to_string(j) +
                                    " collides with downstream eigenvalue " + std::to_string(m));
        }
        for (int k = spec.n_plus; k < spec.dim(); ++k) {
            if (std::abs(xi.beta_plus[j] - spec.alphas[k]) <= tol)
                throw PoleCollision("beta+_" + std::to_string(j) +
                                    " collides with upstream eigenvalue " + std::to_string(k));
        }
    }
}

cxd filter_gain(cxd alpha, const Vec& beta_plus, const Vec& beta_minus) {
    cxd num(1.0, 0.0), den(1.0, 0.0);
    for (int j = 0; j < beta_plus.size(); ++j) num *= alpha - beta_plus[j];
    for (int j = 0; j < beta_minus.size(); ++j) den *= alpha - beta_minus[j];
    if (num == cxd(0.0, 0.0)) return den == cxd(0.0, 0.0) ? cxd(std::nan(""), 0.0) : cxd(0.0, 0.0);
    if (den == cxd(0.0, 0.0)) return {std::numeric_limits<double>::infinity(), 0.0};
    return num / den;
}

Mat exact_projection(const Spectrum& spec) {
    if (!(spec.cond_V < kCondLimit)) throw IllConditioned("eigenvector matrix V", spec.cond_V);
    const int n = spec.dim();
    Mat ve = Mat::Zero(n, n);
    ve.leftCols(spec.n_plus) = spec.V.leftCols(spec.n_plus);
    return ve * spec.V.partialPivLu().solve(Mat::Identity(n, n));
}

FilterOWNSP ownsp_matrix(const Spectrum& spec, const RecursionParamSet& xi) {
    validate_params(xi, spec);
    const int n = spec.dim();
    const int np = spec.n_plus;
    const int nm = spec.n_minus;

    Vec f_down(np), f_up_inv(nm);
    for (int m = 0; m < np; ++m) f_down[m] = filter_gain(spec.alphas[m], xi.beta_plus, xi.beta_minus);
    for (int k = 0; k < nm; ++k)
        f_up_inv[k] = filter_gain(spec.alphas[np + k], xi.beta_minus, xi.beta_plus);

    FilterOWNSP out;
    out.F_diag.resize(n);
    out.F_diag.head(np) = f_down;
    for (int k = 0; k < nm; ++k)
        out.F_diag[np + k] = f_up_inv[k] == cxd(0.0, 0.0)
                                 ? cxd(std::numeric_limits<double>::infinity(), 0.0)
                                 : 1.0 / f_up_inv[k];
    out.E_mask = RVec::Zero(n);
    out.E_mask.head(np).setOnes();

    const VBlocks vb = v_partition(spec);
    const Mat w_pm = vb.pp.partialPivLu().solve(vb.pm);  // V++^-1 V+-
    const Mat w_mp = vb.mm.partialPivLu().solve(vb.mp);  // V--^-1 V-+

    Mat g = Mat::Identity(n, n);
    g.topRightCorner(np, nm) = f_down.asDiagonal() * w_pm * f_up_inv.asDiagonal();
    g.bottomLeftCorner(nm, np) = f_up_inv.asDiagonal() * w_mp * f_down.asDiagonal();

    const double cg = cond2(g);
    if (!(cg < kCondLimit)) throw IllConditioned("R_{N_beta}", cg);

    Eigen::PartialPivLU<Mat> lug(g);
    out.R = lug.solve(Mat::Identity(n, n));  // R = G^-1 by Eq.-16 convention

    Mat eg = g;
    eg.bottomRows(nm).setZero();             // E * G
    const Mat v_inv = spec.V.partialPivLu().solve(Mat::Identity(n, n));
    out.P_mat = spec.V * lug.solve(eg * v_inv);
    return out;
}

// ===== OWNS-P production path: banded solve of the full recursion =====

struct OwnspFilterSolver::Impl {
    int n = 0;
    int n_beta = 0;
    std::vector<int> plus_rows, minus_rows;
    Mat m;
    Vec beta_plus, beta_minus;
    BandedLU band;

    Impl(const OperatorM& op, const RecursionParamSet& xi)
        : n(op.dim()),
          n_beta(xi.n_beta()),
          plus_rows(op.provenance.plus_rows),
          minus_rows(op.provenance.minus_rows),
          m(op.M),
          beta_plus(xi.beta_plus),
          beta_minus(xi.beta_minus),
          band((2 * xi.n_beta() + 1) * op.dim(), 2 * op.dim(), 2 * op.dim()) {
        if (n_beta < 1) throw std::invalid_argument("OWNS-P filter needs n_beta >= 1");
        if (static_cast<int>(plus_rows.size() + minus_rows.size()) != n)
            throw std::invalid_argument("operator row partition does not cover the state");
        const int np = static_cast<int>(plus_rows.size());

        auto add_block = [&](int row0, int col_block, const Mat& blk) {
            const int c0 = col_block * n;
            for (int c = 0; c < n; ++c)
                for (int r = 0; r < n; ++r)
                    if (blk(r, c) != cxd(0.0, 0.0)) band.add(row0 + r, c0 + c, blk(r, c));
        };
        auto shifted = [&](cxd beta) { return Mat(m - I1 * beta * Mat::Identity(n, n)); };

        // end+: plus rows of phi^{-n_beta} vanish
        for (int r = 0; r < np; ++r) band.add(r, plus_rows[r], cxd(1.0, 0.0));
        // descending chain: (M - i b-_j) phi^{-j} = (M - i b+_j) phi^{-j-1}
        for (int l = 1; l <= n_beta - 1; ++l) {
            const int j = n_beta - l;
            const int row0 = np + (l - 1) * n;
            add_block(row0, l, shifted(beta_minus[j]));
            add_block(row0, l - 1, -shifted(beta_plus[j]));
        }
        // middle: (M - i b-_0) phi^0 - (M - i b+_0) phi^{-1} = (M - i b-_0) phi
        {
            const int row0 = np + (n_beta - 1) * n;
            add_block(row0, n_beta, shifted(beta_minus[0]));
            add_block(row0, n_beta - 1, -shifted(beta_plus[0]));
        }
        // ascending chain: (M - i b+_j) phi^j = (M - i b-_j) phi^{j+1}
        for (int j = 0; j <= n_beta - 1; ++j) {
            const int row0 = np + (n_beta + j) * n;
            add_block(row0, n_beta + j, shifted(beta_plus[j]));
            add_block(row0, n_beta + j + 1, -shifted(beta_minus[j]));
        }
        // end-: minus rows of phi^{+n_beta} vanish
        const int tail = np + 2 * n_beta * n;
        for (int r = 0; r < static_cast<int>(minus_rows.size()); ++r)
            band.add(tail + r, 2 * n_beta * n + minus_rows[r], cxd(1.0, 0.0));

        band.factor();
    }

    Mat apply(const Mat& phis) const {
        const int np = static_cast<int>(plus_rows.size());
        const int n_tot = (2 * n_beta + 1) * n;
        Mat rhs = Mat::Zero(n_tot, phis.cols());
        rhs.middleRows(np + (n_beta - 1) * n, n) =
            (m - I1 * beta_minus[0] * Mat::Identity(n, n)) * phis;
        band.solve(rhs);
        Mat out = rhs.middleRows(n_beta * n, n);
        if (!out.allFinite())
            throw SolveFailure(beta_minus[0], 0.0, "recursive filter solve produced non-finite values");
        return out;
    }
};

OwnspFilterSolver::OwnspFilterSolver(const OperatorM& op, const RecursionParamSet& xi)
    : impl_(std::make_unique<Impl>(op, xi)) {}
OwnspFilterSolver::~OwnspFilterSolver() = default;
OwnspFilterSolver::OwnspFilterSolver(OwnspFilterSolver&&) noexcept = default;
OwnspFilterSolver& OwnspFilterSolver::operator=(OwnspFilterSolver&&) noexcept = default;

Vec OwnspFilterSolver::apply(const Vec& phi) const { return impl_->apply(phi); }
Mat OwnspFilterSolver::apply_multi(const Mat& phis) const { return impl_->apply(phis); }

Vec ownsp_apply_filter(const OperatorM& op, const RecursionParamSet& xi, const Vec& phi) {
    return OwnspFilterSolver(op, xi).apply(phi);
}

// ===== OWNS-R =====

Vec ownsr_eigvals(const Spectrum& spec, const RecursionParamSet& xi, cxd c) {
    const int n = spec.dim();
    Vec e(n);
    for (int k = 0; k < n; ++k) {
        cxd num(1.0, 0.0), pls(1.0, 0.0);
        for (int j = 0; j < xi.n_beta(); ++j) {
            num *= spec.alphas[k] - xi.beta_minus[j];
            pls *= spec.alphas[k] - xi.beta_plus[j];
        }
        const cxd den = num + c * pls;
        if (den == cxd(0.0, 0.0))
            throw PoleAtEigenvalue("1 + c F vanishes at eigenvalue " + std::to_string(k));
        e[k] = num / den;
    }
    return e;
}

Vec ownsr_beta_star(const RecursionParamSet& xi, cxd c) {
    const int nb = xi.n_beta();
    if (nb < 1) throw std::invalid_argument("beta_star needs n_beta >= 1");
    if (c == cxd(-1.0, 0.0))
        throw DegenerateLeadingCoefficient("leading coefficient 1 + c vanishes at c = -1");

    const Vec pm = monic_from_roots(xi.beta_minus);  // descending coefficients
    const Vec pp = monic_from_roots(xi.beta_plus);
    Vec avg = (pm + c * pp) / (cxd(1.0, 0.0) + c);
    // avg[0] == 1 by construction (monic average)

    if (nb == 1) {
        Vec r(1);
        r[0] = -avg[1];
        return r;
    }
    Mat companion = Mat::Zero(nb, nb);
    for (int i = 1; i < nb; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < nb; ++i) companion(0, i) = -avg[i + 1];
    Eigen::ComplexEigenSolver<Mat> es(companion, false);
    if (es.info() != Eigen::Success) throw OwnsError("companion eigensolve failed");
    Vec roots = es.eigenvalues();
    std::sort(roots.data(), roots.data() + roots.size(), [](cxd a, cxd b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return roots;
}

FilterOWNSR ownsr_matrix(const Spectrum& spec, const RecursionParamSet& xi, cxd c) {
    validate_params(xi, spec);
    FilterOWNSR out;
    out.c = c;
    out.E_approx = ownsr_eigvals(spec, xi, c);
    out.beta_star = ownsr_beta_star(xi, c);
    const Mat v_inv = spec.V.partialPivLu().solve(Mat::Identity(spec.dim(), spec.dim()));
    out.P_mat = spec.V * out.E_approx.asDiagonal() * v_inv;
    return out;
}

OwnsrFilterSolver::OwnsrFilterSolver(const OperatorM& op, const RecursionParamSet& xi, cxd c)
    : beta_minus_(xi.beta_minus), beta_star_(ownsr_beta_star(xi, c)), c_(c), M_(op.M) {
    const int n = op.dim();
    factors_.reserve(beta_star_.size());
    for (int j = 0; j < beta_star_.size(); ++j)
        factors_.emplace_back(Mat(M_ - I1 * beta_star_[j] * Mat::Identity(n, n)));
    // Eq.-43-style sampled residual of the computed roots (100 unit-box points)
    {
        auto rng = make_rng(0, 0);
        double worst = 0.0;
        for (int t = 0; t < 100; ++t) {
            const cxd ck = uniform_complex(rng);
            cxd ps(1.0, 0.0), pmn(1.0, 0.0), pps(1.0, 0.0);
            for (int j = 0; j < beta_star_.size(); ++j) {
                ps *= ck - beta_star_[j];
                pmn *= ck - beta_minus_[j];
                pps *= ck - xi.beta_plus[j];
            }
            const double denom = std::abs(pmn - pps);
            if (denom > 0.0)
                worst = std::max(worst, std::abs((1.0 + c_) * ps - pmn - c_ * pps) / denom);
        }
        beta_star_residual_ = worst;
    }
}

Mat OwnsrFilterSolver::apply_multi(const Mat& phis) const {
    const int n = static_cast<int>(M_.rows());
    Mat cur = phis / (cxd(1.0, 0.0) + c_);
    for (size_t j = 0; j < factors_.size(); ++j) {
        const Mat rhs = (M_ - I1 * beta_minus_[j] * Mat::Identity(n, n)) * cur;
        cur = factors_[j].solve(rhs);
        if (!cur.allFinite())
            throw SolveFailure(beta_star_[j], 0.0,
                               "OWNS-R solve with (M - i beta*_j) produced non-finite values");
    }
    return cur;
}

Vec OwnsrFilterSolver::apply(const Vec& phi) const { return Vec(apply_multi(phi)); }

Vec ownsr_apply(const OperatorM& op, const RecursionParamSet& xi, const Vec& beta_star,
                const Vec& phi, cxd c) {
    OwnsrFilterSolver solver(op, xi, c);
    if (beta_star.size() != 0 && (beta_star - solver.beta_star()).norm() >
                                     1e-8 * (1.0 + beta_star.norm()))
        throw std::invalid_argument("beta_star is inconsistent with xi");
    return solver.apply(phi);
}

double commutator_norm(const Mat& p_like, const OperatorM& op) {
    if (p_like.rows() != op.M.rows() || p_like.cols() != op.M.cols())
        throw std::invalid_argument("commutator_norm: dimension mismatch");
    return norm2(p_like * op.M - op.M * p_like);
}

}  // namespace owns
