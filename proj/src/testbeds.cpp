#include "owns/testbeds.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace owns {

namespace {

RMat euler2d_A(double u, double a, double rho) {
    RMat A = RMat::Zero(4, 4);
    // vars (rho, u, v, p)
    A(0, 0) = u; A(0, 1) = rho;
    A(1, 1) = u; A(1, 3) = 1.0 / rho;
    A(2, 2) = u;
    A(3, 1) = rho * a * a; A(3, 3) = u;
    return A;
}

RMat euler2d_B(double a, double rho) {
    RMat B = RMat::Zero(4, 4);
    B(0, 2) = rho;
    B(2, 3) = 1.0 / rho;
    B(3, 2) = rho * a * a;
    return B;
}

RMat euler3d_A(double u, double a, double rho) {
    RMat A = RMat::Zero(5, 5);
    // vars (rho, u, v, w, p)
    A(0, 0) = u; A(0, 1) = rho;
    A(1, 1) = u; A(1, 4) = 1.0 / rho;
    A(2, 2) = u;
    A(3, 3) = u;
    A(4, 1) = rho * a * a; A(4, 4) = u;
    return A;
}

RMat euler3d_By(double a, double rho) {
    RMat B = RMat::Zero(5, 5);
    B(0, 2) = rho;
    B(2, 4) = 1.0 / rho;
    B(4, 2) = rho * a * a;
    return B;
}

RMat euler3d_Bz(double a, double rho) {
    RMat B = RMat::Zero(5, 5);
    B(0, 3) = rho;
    B(3, 4) = 1.0 / rho;
    B(4, 3) = rho * a * a;
    return B;
}

/// Rows of the 2D characteristic transform, sorted (+ descending, -, 0):
/// fast acoustic u+a, entropy u, shear u, slow acoustic u-a (subsonic order).
RMat euler2d_T(double u, double a, double rho) {
    RMat T = RMat::Zero(4, 4);
    RVec speeds(4);
    RMat rows = RMat::Zero(4, 4);
    rows(0, 1) = 1.0; rows(0, 3) = 1.0 / (rho * a); speeds[0] = u + a;   // u + p/(rho a)
    rows(1, 0) = 1.0; rows(1, 3) = -1.0 / (a * a);  speeds[1] = u;       // rho - p/a^2
    rows(2, 2) = 1.0;                                speeds[2] = u;      // v
    rows(3, 1) = 1.0; rows(3, 3) = -1.0 / (rho * a); speeds[3] = u - a;  // u - p/(rho a)
    // subsonic 0 < u < a keeps this order; re-sort handles other regimes
    std::vector<int> idx = {0, 1, 2, 3};
    std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) {
        auto grp = [](double v) { return v > 0 ? 0 : (v < 0 ? 1 : 2); };
        if (grp(speeds[i]) != grp(speeds[j])) return grp(speeds[i]) < grp(speeds[j]);
        return speeds[i] > speeds[j];
    });
    for (int k = 0; k < 4; ++k) T.row(k) = rows.row(idx[k]);
    return T;
}

RMat euler3d_T(double u, double a, double rho) {
    RMat T = RMat::Zero(5, 5);
    RVec speeds(5);
    RMat rows = RMat::Zero(5, 5);
    rows(0, 1) = 1.0; rows(0, 4) = 1.0 / (rho * a);  speeds[0] = u + a;
    rows(1, 0) = 1.0; rows(1, 4) = -1.0 / (a * a);   speeds[1] = u;
    rows(2, 2) = 1.0;                                 speeds[2] = u;
    rows(3, 3) = 1.0;                                 speeds[3] = u;
    rows(4, 1) = 1.0; rows(4, 4) = -1.0 / (rho * a); speeds[4] = u - a;
    std::vector<int> idx = {0, 1, 2, 3, 4};
    std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) {
        auto grp = [](double v) { return v > 0 ? 0 : (v < 0 ? 1 : 2); };
        if (grp(speeds[i]) != grp(speeds[j])) return grp(speeds[i]) < grp(speeds[j]);
        return speeds[i] > speeds[j];
    });
    for (int k = 0; k < 5; ++k) T.row(k) = rows.row(idx[k]);
    return T;
}

CharacteristicForm analytic_form(const RMat& T, const HyperbolicSystem& sys) {
    CharacteristicForm form;
    form.T = T;
    form.T_inv = T.partialPivLu().solve(RMat::Identity(T.rows(), T.cols()));
    const RMat at = form.T * sys.A * form.T_inv;
    form.a_tilde = at.diagonal();
    form.B_raw = sys.B;
    for (const auto& b : sys.B) form.B_tilde.push_back(form.T * b * form.T_inv);
    form.C_tilde = form.T * sys.C * form.T_inv;
    const double tol = 1e-10 * std::max(1.0, sys.A.norm());
    for (int i = 0; i < form.a_tilde.size(); ++i) {
        if (std::abs(form.a_tilde[i]) <= tol)
            ++form.n_zero;
        else if (form.a_tilde[i] > 0)
            ++form.n_plus;
        else
            ++form.n_minus;
    }
    return form;
}

}  // namespace

HyperbolicSystem euler2d_system(double u, double a, double rho) {
    return HyperbolicSystem(euler2d_A(u, a, rho), {euler2d_B(a, rho)}, RMat::Zero(4, 4));
}

HyperbolicSystem euler3d_system(double u, double a, double rho) {
    return HyperbolicSystem(euler3d_A(u, a, rho), {euler3d_By(a, rho), euler3d_Bz(a, rho)},
                            RMat::Zero(5, 5));
}

CharacteristicForm euler2d_characteristic(double u, double a, double rho) {
    return analytic_form(euler2d_T(u, a, rho), euler2d_system(u, a, rho));
}

CharacteristicForm euler3d_characteristic(double u, double a, double rho) {
    return analytic_form(euler3d_T(u, a, rho), euler3d_system(u, a, rho));
}

OperatorBuilder make_uniform_euler_2d(const UniformEuler2D& p) {
    OperatorBuilder b;
    b.forms = {euler2d_characteristic(p.u, p.a, p.rho)};
    b.disc = make_transverse_uniform(p.nodes, p.span_lo, p.span_hi, p.scheme_order, p.bc);
    return b;
}

OperatorBuilder make_uniform_euler_3d(const UniformEuler3D& p, std::vector<double> omega_t) {
    OperatorBuilder b;
    b.forms = {euler3d_characteristic(p.u, p.a, p.rho)};
    b.disc = make_transverse_uniform(p.nodes, p.span_lo, p.span_hi, p.scheme_order, p.bc);
    b.omega_t = std::move(omega_t);
    return b;
}

OperatorBuilder make_shear_layer_2d(const ShearLayer2D& p) {
    OperatorBuilder b;
    b.disc = make_transverse_uniform(p.nodes, p.span_lo, p.span_hi, p.scheme_order, p.bc);
    b.forms.reserve(p.nodes);
    for (int i = 0; i < p.nodes; ++i) {
        const double y = b.disc.grid[i];
        const double uy = p.u0 + p.du * std::tanh(y / p.delta);
        const double dudy = (p.du / p.delta) / std::pow(std::cosh(y / p.delta), 2);
        RMat C = RMat::Zero(4, 4);
        C(1, 2) = dudy;  // v' d(u)/dy in the u-momentum equation
        HyperbolicSystem sys(euler2d_A(uy, p.a, p.rho), {euler2d_B(p.a, p.rho)}, C);
        b.forms.push_back(analytic_form(euler2d_T(uy, p.a, p.rho), sys));
    }
    return b;
}

}  // namespace owns
