#include "owns/system.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace owns {

namespace {

constexpr double kHyperbolicTol = 1e-10;   // |Im(lambda)| <= tol * ||A||
constexpr double kZeroCharTol = 1e-10;     // |a_tilde| <= tol * scale counts as zero
constexpr double kCondLimit = 1e12;

double frob(const RMat& a) { return a.norm(); }

/// Re-orthonormalize eigenvector columns within clusters of equal eigenvalues;
/// keeps them eigenvectors while improving conditioning for repeated roots.
void orthonormalize_clusters(RMat& vecs, const RVec& vals, double scale) {
    const int n = static_cast<int>(vals.size());
    int start = 0;
    while (start < n) {
        int end = start + 1;
        while (end < n && std::abs(vals[end] - vals[start]) <= 1e-8 * std::max(1.0, scale)) ++end;
        if (end - start > 1) {
            Eigen::HouseholderQR<RMat> qr(vecs.middleCols(start, end - start));
            RMat q = qr.householderQ() * RMat::Identity(vecs.rows(), end - start);
            vecs.middleCols(start, end - start) = q;
        }
        start = end;
    }
}

bool is_sorted_characteristic(const RVec& d, double tol) {
    auto group = [tol](double v) { return std::abs(v) <= tol ? 2 : (v > 0.0 ? 0 : 1); };
    for (int i = 0; i + 1 < d.size(); ++i) {
        const int gi = group(d[i]), gj = group(d[i + 1]);
        if (gi > gj) return false;
        if (gi == gj && gi != 2 && d[i] < d[i + 1]) return false;  // descending within group
    }
    return true;
}

int zero_group(double v, double tol) { return std::abs(v) <= tol ? 2 : (v > 0.0 ? 0 : 1); }

RMat central_difference(const RVec& grid, int order, BoundaryKind bc) {
    const int n = static_cast<int>(grid.size());
    RMat d = RMat::Zero(n, n);
    if (n == 1) return d;
    const double h = grid[1] - grid[0];
    for (int i = 0; i + 1 < n; ++i) {
        if (std::abs((grid[i + 1] - grid[i]) - h) > 1e-12 * std::max(1.0, std::abs(h)))
            throw std::invalid_argument("transverse grid must be uniform");
    }

    auto wrap = [n](int i) { return ((i % n) + n) % n; };
    const bool periodic = (bc == BoundaryKind::Periodic);

    auto stamp = [&](int row, int off, double w) {
        const int col = row + off;
        if (periodic) {
            d(row, wrap(col)) += w;
        } else if (col >= 0 && col < n) {
            d(row, col) += w;
        } else if (bc == BoundaryKind::ZeroDirichlet) {
            // ghost value is zero: drop the term
        } else {
            throw std::logic_error("stencil out of range");
        }
    };

    const bool fourth = (order >= 4) && (n >= 5);
    for (int i = 0; i < n; ++i) {
        const bool near_edge = !periodic && (i < 2 || i >= n - 2);
        if (bc == BoundaryKind::WallReflective && (i == 0 || i == n - 1)) {
            // one-sided second-order closure at wall rows
            const double sgn = (i == 0) ? 1.0 : -1.0;
            const int o = (i == 0) ? 1 : -1;
            stamp(i, 0, sgn * -1.5 / h);
            stamp(i, o, sgn * 2.0 / h);
            stamp(i, 2 * o, sgn * -0.5 / h);
        } else if (fourth && (periodic || !near_edge)) {
            stamp(i, -2, 1.0 / (12.0 * h));
            stamp(i, -1, -8.0 / (12.0 * h));
            stamp(i, 1, 8.0 / (12.0 * h));
            stamp(i, 2, -1.0 / (12.0 * h));
        } else if (!periodic && bc == BoundaryKind::WallReflective && (i == 1 || i == n - 2)) {
            stamp(i, -1, -0.5 / h);
            stamp(i, 1, 0.5 / h);
        } else if (!periodic && bc == BoundaryKind::ZeroDirichlet) {
            // truncated central stencil, ghost values are zero
            stamp(i, -1, -0.5 / h);
            stamp(i, 1, 0.5 / h);
        } else {
            stamp(i, -1, -0.5 / h);
            stamp(i, 1, 0.5 / h);
        }
    }
    return d;
}

}  // namespace

HyperbolicSystem::HyperbolicSystem(RMat A_, std::vector<RMat> B_, RMat C_)
    : n_vars(static_cast<int>(A_.rows())),
      spatial_dim(static_cast<int>(B_.size()) + 1),
      A(std::move(A_)),
      B(std::move(B_)),
      C(std::move(C_)) {
    if (A.rows() != A.cols()) throw std::invalid_argument("A must be square");
    if (C.size() == 0) C = RMat::Zero(n_vars, n_vars);
    if (C.rows() != n_vars || C.cols() != n_vars)
        throw std::invalid_argument("C dimension mismatch");
    for (const auto& b : B)
        if (b.rows() != n_vars || b.cols() != n_vars)
            throw std::invalid_argument("B_j dimension mismatch");
    // hyperbolicity: real spectrum (diagonalizability is re-checked by the transform)
    Eigen::EigenSolver<RMat> es(A, false);
    const double scale = std::max(1.0, frob(A));
    for (int i = 0; i < n_vars; ++i) {
        const cxd lam = es.eigenvalues()[i];
        if (std::abs(lam.imag()) > kHyperbolicTol * scale) throw NotHyperbolic(lam);
    }
}

TransverseDiscretization TransverseDiscretization::none() {
    TransverseDiscretization disc;
    disc.grid = RVec::Zero(1);
    disc.scheme_order = 2;
    disc.bc = BoundaryKind::Periodic;
    disc.D = RMat::Zero(1, 1);
    return disc;
}

TransverseDiscretization make_transverse(const RVec& grid, int scheme_order, BoundaryKind bc,
                                         std::vector<int> wall_zero_chars) {
    if (grid.size() < 1) throw std::invalid_argument("empty transverse grid");
    if (scheme_order != 2 && scheme_order != 4)
        throw std::invalid_argument("scheme_order must be 2 or 4");
    TransverseDiscretization disc;
    disc.grid = grid;
    disc.scheme_order = scheme_order;
    disc.bc = bc;
    disc.wall_zero_chars = std::move(wall_zero_chars);
    disc.D = grid.size() == 1 ? RMat::Zero(1, 1) : central_difference(grid, scheme_order, bc);
    return disc;
}

TransverseDiscretization make_transverse_uniform(int n_nodes, double lo, double hi,
                                                 int scheme_order, BoundaryKind bc,
                                                 std::vector<int> wall_zero_chars) {
    if (n_nodes < 1) throw std::invalid_argument("n_nodes must be >= 1");
    RVec grid(n_nodes);
    if (n_nodes == 1) {
        grid[0] = lo;
    } else if (bc == BoundaryKind::Periodic) {
        const double h = (hi - lo) / n_nodes;  // right endpoint excluded
        for (int i = 0; i < n_nodes; ++i) grid[i] = lo + i * h;
    } else {
        const double h = (hi - lo) / (n_nodes - 1);
        for (int i = 0; i < n_nodes; ++i) grid[i] = lo + i * h;
    }
    return make_transverse(grid, scheme_order, bc, std::move(wall_zero_chars));
}

CharacteristicForm characteristic_form(const HyperbolicSystem& system) {
    const int n = system.n_vars;
    const double scale = std::max(1.0, frob(system.A));
    const double ztol = kZeroCharTol * scale;

    CharacteristicForm form;
    form.B_raw = system.B;

    const bool diag_already =
        (system.A - RMat(system.A.diagonal().asDiagonal())).cwiseAbs().maxCoeff() <= 1e-14 * scale;
    if (diag_already && is_sorted_characteristic(system.A.diagonal(), ztol)) {
        form.T = RMat::Identity(n, n);
        form.T_inv = form.T;
        form.a_tilde = system.A.diagonal();
    } else {
        Eigen::EigenSolver<RMat> es(system.A, true);
        RVec vals(n);
        for (int i = 0; i < n; ++i) {
            const cxd lam = es.eigenvalues()[i];
            if (std::abs(lam.imag()) > kHyperbolicTol * scale) throw NotHyperbolic(lam);
            vals[i] = lam.real();
        }
        RMat vecs = es.eigenvectors().real();
        // complex-conjugate eigenvector pairs cannot occur once the spectrum is
        // real to tolerance, but the imaginary dust is dropped above; renormalize
        for (int i = 0; i < n; ++i) {
            double nv = vecs.col(i).norm();
            if (nv <= 0) throw NotHyperbolic(es.eigenvalues()[i]);
            vecs.col(i) /= nv;
        }
        // sort: positive, negative, zero; descending value within sign groups
        std::vector<int> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) {
            const int gi = zero_group(vals[i], ztol), gj = zero_group(vals[j], ztol);
            if (gi != gj) return gi < gj;
            if (gi == 2) return false;
            return vals[i] > vals[j];
        });
        RVec svals(n);
        RMat svecs(n, n);
        for (int k = 0; k < n; ++k) {
            svals[k] = vals[idx[k]];
            svecs.col(k) = vecs.col(idx[k]);
        }
        orthonormalize_clusters(svecs, svals, scale);
        for (int k = 0; k < n; ++k) {
            int imax = 0;
            svecs.col(k).cwiseAbs().maxCoeff(&imax);
            if (svecs(imax, k) < 0) svecs.col(k) = -svecs.col(k);
        }
        form.T_inv = svecs;
        Eigen::PartialPivLU<RMat> lu(svecs);
        form.T = lu.solve(RMat::Identity(n, n));
        form.a_tilde = svals;
        const RMat check = form.T * system.A * form.T_inv;
        if ((check - RMat(check.diagonal().asDiagonal())).cwiseAbs().maxCoeff() > 1e-8 * scale)
            throw NotHyperbolic(es.eigenvalues()[0]);
        form.a_tilde = check.diagonal();
    }

    for (int i = 0; i < n; ++i) {
        switch (zero_group(form.a_tilde[i], ztol)) {
            case 0: ++form.n_plus; break;
            case 1: ++form.n_minus; break;
            default: ++form.n_zero; break;
        }
    }
    form.B_tilde.reserve(system.B.size());
    for (const auto& b : system.B) form.B_tilde.push_back(form.T * b * form.T_inv);
    form.C_tilde = form.T * system.C * form.T_inv;
    return form;
}

namespace {

struct RowClassification {
    std::vector<int> plus, minus, zero;   // full-state indices
    RVec a_big;                           // per-row characteristic speeds
};

/// Characteristic speeds per state row, wall zeroing applied, rows classified.
RowClassification classify_rows(const std::vector<CharacteristicForm>& forms,
                                const TransverseDiscretization& disc) {
    const int nodes = disc.n_nodes();
    const int nv = forms.front().n_vars();
    RowClassification rc;
    rc.a_big.resize(nodes * nv);
    double scale = 1.0;
    for (const auto& f : forms) scale = std::max(scale, f.a_tilde.cwiseAbs().maxCoeff());
    const double ztol = kZeroCharTol * scale;
    for (int i = 0; i < nodes; ++i) {
        const auto& f = forms[forms.size() == 1 ? 0 : i];
        RVec a = f.a_tilde;
        if (disc.bc == BoundaryKind::WallReflective && (i == 0 || i == nodes - 1)) {
            for (int k : disc.wall_zero_chars) {
                if (k < 0 || k >= nv) throw std::invalid_argument("wall_zero_chars out of range");
                a[k] = 0.0;
            }
        }
        for (int k = 0; k < nv; ++k) {
            const int row = i * nv + k;
            rc.a_big[row] = a[k];
            switch (zero_group(a[k], ztol)) {
                case 0: rc.plus.push_back(row); break;
                case 1: rc.minus.push_back(row); break;
                default: rc.zero.push_back(row); break;
            }
        }
    }
    return rc;
}

const CharacteristicForm& form_at(const std::vector<CharacteristicForm>& forms, size_t i) {
    return forms[forms.size() == 1 ? 0 : i];
}

/// L = -(s I + sum_fourier i w_k B~_k + C~) - D (x) (T_i B_0 T_j^-1),
/// so that A~ dphi/dx = L phi + f and M = A~^-1 L is the marching generator.
Mat assemble_L(const std::vector<CharacteristicForm>& forms, const TransverseDiscretization& disc,
               cxd s, const std::vector<double>& omega_t) {
    const int nodes = disc.n_nodes();
    const int nv = forms.front().n_vars();
    const int n = nodes * nv;
    const int n_b = static_cast<int>(forms.front().B_tilde.size());
    const bool grid_direction = nodes > 1;
    const int fourier_count = n_b - (grid_direction ? 1 : 0);
    if (static_cast<int>(omega_t.size()) != fourier_count)
        throw std::invalid_argument("omega_t length must match the Fourier transverse directions");

    Mat L = Mat::Zero(n, n);
    for (int i = 0; i < nodes; ++i) {
        const auto& fi = form_at(forms, i);
        Mat blk = -s * Mat::Identity(nv, nv) - fi.C_tilde.cast<cxd>();
        for (int k = 0; k < fourier_count; ++k) {
            const auto& bt = fi.B_tilde[grid_direction ? k + 1 : k];
            blk -= cxd(0.0, omega_t[k]) * bt.cast<cxd>();
        }
        L.block(i * nv, i * nv, nv, nv) += blk;
        if (grid_direction) {
            for (int j = 0; j < nodes; ++j) {
                const double dij = disc.D(i, j);
                if (dij == 0.0) continue;
                const auto& fj = form_at(forms, j);
                const RMat cross = fi.T * fi.B_raw[0] * fj.T_inv;
                L.block(i * nv, j * nv, nv, nv) -= dij * cross.cast<cxd>();
            }
        }
    }
    return L;
}

Vec transformed_forcing(const std::vector<CharacteristicForm>& forms,
                        const TransverseDiscretization& disc, const Vec& forcing) {
    const int nodes = disc.n_nodes();
    const int nv = forms.front().n_vars();
    if (forcing.size() == 0) return Vec::Zero(nodes * nv);
    if (forcing.size() != nodes * nv) throw std::invalid_argument("forcing dimension mismatch");
    Vec f(nodes * nv);
    for (int i = 0; i < nodes; ++i)
        f.segment(i * nv, nv) = form_at(forms, i).T.cast<cxd>() * forcing.segment(i * nv, nv);
    return f;
}

OperatorM assemble_impl(const std::vector<CharacteristicForm>& forms,
                        const TransverseDiscretization& disc, cxd s,
                        const std::vector<double>& omega_t, const Vec& forcing) {
    if (forms.empty()) throw std::invalid_argument("no characteristic forms given");
    if (forms.size() != 1 && static_cast<int>(forms.size()) != disc.n_nodes())
        throw std::invalid_argument("forms must have size 1 or n_nodes");
    if (s.real() < 0.0) throw std::invalid_argument("Re(s) must be >= 0");
    const int nv = forms.front().n_vars();

    const RowClassification rc = classify_rows(forms, disc);
    const Mat L = assemble_L(forms, disc, s, omega_t);
    const Vec f = transformed_forcing(forms, disc, forcing);

    OperatorM op;
    op.s = s;
    op.omega_t = omega_t;
    op.provenance.n_vars = nv;
    op.provenance.n_nodes = disc.n_nodes();

    if (rc.zero.empty()) {
        const int n = static_cast<int>(L.rows());
        op.M = L;
        op.g_hat = f;
        for (int r = 0; r < n; ++r) {
            op.M.row(r) /= rc.a_big[r];
            op.g_hat[r] /= rc.a_big[r];
        }
        op.provenance.plus_rows = rc.plus;
        op.provenance.minus_rows = rc.minus;
        return op;
    }

    // Appendix-B elimination of the zero-characteristic rows
    std::vector<int> kept = rc.plus;
    kept.insert(kept.end(), rc.minus.begin(), rc.minus.end());
    std::sort(kept.begin(), kept.end());
    const int nk = static_cast<int>(kept.size());
    const int nz = static_cast<int>(rc.zero.size());

    SingularReduction red;
    red.kept_rows = kept;
    red.zero_rows = rc.zero;
    red.L_pp.resize(nk, nk);
    red.L_p0.resize(nk, nz);
    red.L_0p.resize(nz, nk);
    red.L_00.resize(nz, nz);
    red.a_tilde_pm.resize(nk);
    for (int r = 0; r < nk; ++r) {
        red.a_tilde_pm[r] = rc.a_big[kept[r]];
        for (int c = 0; c < nk; ++c) red.L_pp(r, c) = L(kept[r], kept[c]);
        for (int c = 0; c < nz; ++c) red.L_p0(r, c) = L(kept[r], rc.zero[c]);
    }
    for (int r = 0; r < nz; ++r) {
        for (int c = 0; c < nk; ++c) red.L_0p(r, c) = L(rc.zero[r], kept[c]);
        for (int c = 0; c < nz; ++c) red.L_00(r, c) = L(rc.zero[r], rc.zero[c]);
    }
    red.cond_L00 = cond2(red.L_00);
    if (!(red.cond_L00 < kCondLimit)) throw SingularBlock(red.cond_L00);

    Eigen::PartialPivLU<Mat> lu00(red.L_00);
    Vec f_pm(nk), f_0(nz);
    for (int r = 0; r < nk; ++r) f_pm[r] = f[kept[r]];
    for (int r = 0; r < nz; ++r) f_0[r] = f[rc.zero[r]];

    red.recover_mat = -lu00.solve(red.L_0p);
    red.recover_vec = -lu00.solve(f_0);

    Mat m = red.L_pp - red.L_p0 * lu00.solve(red.L_0p);
    Vec g = f_pm - red.L_p0 * lu00.solve(f_0);
    for (int r = 0; r < nk; ++r) {
        m.row(r) /= red.a_tilde_pm[r];
        g[r] /= red.a_tilde_pm[r];
    }

    op.M = std::move(m);
    op.g_hat = std::move(g);
    // active-state row indices after renumbering
    for (int r = 0; r < nk; ++r) {
        if (rc.a_big[kept[r]] > 0)
            op.provenance.plus_rows.push_back(r);
        else
            op.provenance.minus_rows.push_back(r);
    }
    op.reduction = std::move(red);
    return op;
}

}  // namespace

OperatorM assemble_operator(const CharacteristicForm& form, const TransverseDiscretization& disc,
                            cxd s, const std::vector<double>& omega_t, const Vec& forcing) {
    return assemble_impl({form}, disc, s, omega_t, forcing);
}

OperatorM assemble_operator(const std::vector<CharacteristicForm>& forms,
                            const TransverseDiscretization& disc, cxd s,
                            const std::vector<double>& omega_t, const Vec& forcing) {
    return assemble_impl(forms, disc, s, omega_t, forcing);
}

std::pair<OperatorM, SingularReduction> reduce_singular(const std::vector<CharacteristicForm>& forms,
                                                        const TransverseDiscretization& disc, cxd s,
                                                        const std::vector<double>& omega_t,
                                                        const Vec& forcing) {
    OperatorM op = assemble_impl(forms, disc, s, omega_t, forcing);
    if (!op.reduction) throw NotSingular();
    SingularReduction red = *op.reduction;
    return {std::move(op), std::move(red)};
}

OperatorM OperatorBuilder::operator()(cxd s) const {
    return assemble_impl(forms, disc, s, omega_t, forcing);
}

std::pair<int, int> OperatorBuilder::char_counts() const {
    const RowClassification rc = classify_rows(forms, disc);
    return {static_cast<int>(rc.plus.size()), static_cast<int>(rc.minus.size())};
}

int OperatorBuilder::active_dim() const {
    auto [p, m] = char_counts();
    return p + m;
}

}  // namespace owns
