#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "owns/system.hpp"
#include "owns/testbeds.hpp"
#include "support.hpp"

using namespace owns;
using doctest::Approx;

TEST_CASE("3D Euler characteristic speeds are {u+a, u, u, u, u-a}") {
    const double u = 0.5, a = 1.0;
    const CharacteristicForm f = euler3d_characteristic(u, a, 1.0);
    REQUIRE(f.a_tilde.size() == 5);
    CHECK(f.a_tilde[0] == Approx(u + a).epsilon(1e-12));
    CHECK(f.a_tilde[1] == Approx(u).epsilon(1e-12));
    CHECK(f.a_tilde[2] == Approx(u).epsilon(1e-12));
    CHECK(f.a_tilde[3] == Approx(u).epsilon(1e-12));
    CHECK(f.a_tilde[4] == Approx(u - a).epsilon(1e-12));
    CHECK(f.n_plus == 4);
    CHECK(f.n_minus == 1);

    // the generic eigensolver path agrees on the multiset of speeds
    const CharacteristicForm g = characteristic_form(euler3d_system(u, a, 1.0));
    RVec sa = f.a_tilde, sb = g.a_tilde;
    std::sort(sa.data(), sa.data() + 5);
    std::sort(sb.data(), sb.data() + 5);
    CHECK((sa - sb).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("already-diagonal flux keeps T = identity") {
    RMat A = RMat::Zero(2, 2);
    A(0, 0) = 1.0;
    A(1, 1) = -1.0;
    const CharacteristicForm f = characteristic_form(HyperbolicSystem(A, {}, RMat()));
    CHECK((f.T - RMat::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(f.n_plus == 1);
    CHECK(f.n_minus == 1);
}

TEST_CASE("2D Euler subsonic counts via the generic eigensolver") {
    const CharacteristicForm f = characteristic_form(euler2d_system(0.5, 1.0, 1.0));
    CHECK(f.n_plus == 3);
    CHECK(f.n_minus == 1);
    CHECK(f.n_zero == 0);
    // transform round-trip
    const RMat back = f.T_inv * RMat(f.a_tilde.asDiagonal()) * f.T;
    CHECK((back - euler2d_system(0.5, 1.0, 1.0).A).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("non-hyperbolic flux is rejected with the offending eigenvalue") {
    RMat A(2, 2);
    A << 0.0, 1.0, -1.0, 0.0;  // rotation: eigenvalues +-i
    CHECK_THROWS_AS(HyperbolicSystem(A, {}, RMat()), NotHyperbolic);
    try {
        HyperbolicSystem sys(A, {}, RMat());
    } catch (const NotHyperbolic& e) {
        CHECK(std::abs(std::abs(e.offending.imag()) - 1.0) < 1e-12);
    }
}

TEST_CASE("characteristic_form is idempotent") {
    const CharacteristicForm f = characteristic_form(euler2d_system(0.5, 1.0, 1.0));
    // re-apply on the already-characteristic system
    RMat At = f.a_tilde.asDiagonal();
    std::vector<RMat> Bt = {f.B_tilde[0]};
    const CharacteristicForm g = characteristic_form(HyperbolicSystem(At, Bt, f.C_tilde));
    CHECK((g.T - RMat::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((g.a_tilde - f.a_tilde).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("scalar operator: M = -i w / a for A = (a)") {
    RMat A(1, 1);
    A << 2.0;
    const CharacteristicForm f = characteristic_form(HyperbolicSystem(A, {}, RMat()));
    const double w = 0.7;
    const OperatorM op = assemble_operator(f, TransverseDiscretization::none(), cxd(0.0, w), {});
    REQUIRE(op.dim() == 1);
    // marching-generator sign: d phi/dx = M phi with M = -s/a
    CHECK(std::abs(op.M(0, 0) - cxd(0.0, -w / 2.0)) < 1e-15);
    CHECK(op.provenance.plus_rows.size() == 1);
}

TEST_CASE("block consistency: B = 0, C = 0 gives M = -s * A~^-1") {
    const CharacteristicForm f = euler2d_characteristic(0.5, 1.0, 1.0);
    CharacteristicForm g = f;
    g.B_tilde[0].setZero();
    g.B_raw[0].setZero();
    g.C_tilde.setZero();
    const cxd s{0.3, 1.1};
    const auto disc = make_transverse_uniform(4, 0.0, 1.0, 2, BoundaryKind::Periodic);
    const OperatorM op = assemble_operator(g, disc, s, {});
    Mat expect = Mat::Zero(16, 16);
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) expect(i * 4 + k, i * 4 + k) = -s / f.a_tilde[k];
    CHECK((op.M - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("uniform 2D Euler on 8 periodic nodes: 32x32 with 24/8 Briggs counts") {
    const OperatorBuilder b = test::uniform_euler_testbed();
    const OperatorM op = b(cxd(0.0, 1.0));
    REQUIRE(op.dim() == 32);
    CHECK(op.provenance.plus_rows.size() == 24);
    CHECK(op.provenance.minus_rows.size() == 8);
    const auto [np, nm] = test::briggs_count_oracle(b, cxd(0.0, 1.0));
    CHECK(np == 24);
    CHECK(nm == 8);
}

TEST_CASE("periodic difference rows sum to zero") {
    for (int order : {2, 4}) {
        const auto disc = make_transverse_uniform(8, 0.0, 1.0, order, BoundaryKind::Periodic);
        CHECK(disc.D.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("reduce_singular rejects regular systems") {
    const CharacteristicForm f = euler2d_characteristic(0.5, 1.0, 1.0);
    const auto disc = make_transverse_uniform(4, 0.0, 1.0, 2, BoundaryKind::Periodic);
    CHECK_THROWS_AS(reduce_singular({f}, disc, cxd(0.0, 1.0), {}), NotSingular);
}

TEST_CASE("1x1 zero block: recover_zero is -0.5 * phi[0]") {
    // A = diag(1, -1, 0); C chosen so L00 = 2, L0+- = (1, 0): C~ row 2 = (-1, 0, -2), s = 0
    RMat A = RMat::Zero(3, 3);
    A(0, 0) = 1.0;
    A(1, 1) = -1.0;
    RMat C = RMat::Zero(3, 3);
    C(2, 0) = -1.0;
    C(2, 2) = -2.0;
    const CharacteristicForm f = characteristic_form(HyperbolicSystem(A, {}, C));
    auto [op, red] = reduce_singular({f}, TransverseDiscretization::none(), cxd(0.0, 0.0), {});
    REQUIRE(op.dim() == 2);
    CHECK(std::abs(red.L_00(0, 0) - cxd(2.0, 0.0)) < 1e-14);
    CHECK(std::abs(red.L_0p(0, 0) - cxd(1.0, 0.0)) < 1e-14);
    Vec phi(2);
    phi << cxd(1.0, 0.0), cxd(0.0, 0.0);
    CHECK(std::abs(red.recover_zero(phi)[0] - cxd(-0.5, 0.0)) < 1e-14);
}

TEST_CASE("random 6-var system with one zero characteristic: eliminated-row residual") {
    RVec eigvals(6);
    eigvals << 2.0, 1.0, 0.5, -1.0, -2.0, 0.0;
    const RMat A = test::real_matrix_with_spectrum(eigvals, 21);
    const RMat C = test::random_real_matrix(6, 0.6, 22);
    const CharacteristicForm f = characteristic_form(HyperbolicSystem(A, {}, C));
    REQUIRE(f.n_zero == 1);

    const cxd s{0.4, 0.8};
    auto rng = make_rng(33, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const Vec forcing = uniform_complex_vector(rng, 6);
        auto [op, red] = reduce_singular({f}, TransverseDiscretization::none(), s, {}, forcing);
        REQUIRE(op.dim() == 5);
        const Vec phi = uniform_complex_vector(rng, 5);
        const Vec phi0 = red.recover_zero(phi);
        // residual of the eliminated algebraic rows 0 = L0p phi + L00 phi0 + f0
        const Vec f_phi = f.T.cast<cxd>() * forcing;
        Vec f0(1);
        f0[0] = f_phi[red.zero_rows[0]];
        const Vec resid = red.L_0p * phi + red.L_00 * phi0 + f0;
        CHECK(resid.norm() <= 1e-10 * (1.0 + phi.norm()));
        // matches the least-squares solve of the same rows
        const Vec ls = red.L_00.fullPivHouseholderQr().solve(-(red.L_0p * phi + f0));
        CHECK((ls - phi0).norm() <= 1e-10 * (1.0 + ls.norm()));
    }
}

TEST_CASE("wall-bounded reduction drops exactly the pinned wall rows") {
    // interior speeds (1, -1, 0.5); wall nodes pin characteristic 2 (speed 0.5)
    RMat A = RMat::Zero(3, 3);
    A(0, 0) = 1.0;
    A(1, 1) = -1.0;
    A(2, 2) = 0.5;
    const RMat B = test::random_real_matrix(3, 0.3, 4);
    const RMat C = test::random_real_matrix(3, 0.4, 5);
    const CharacteristicForm f = characteristic_form(HyperbolicSystem(A, {B}, C));
    const auto disc =
        make_transverse_uniform(5, 0.0, 1.0, 2, BoundaryKind::WallReflective, {2});
    auto [op, red] = reduce_singular({f}, disc, cxd(0.2, 0.5), {});
    CHECK(op.dim() == 15 - 2);
    CHECK(red.zero_rows.size() == 2);
    CHECK(red.cond_L00 < 1e6);

    auto rng = make_rng(9, 0);
    const Vec phi = uniform_complex_vector(rng, op.dim());
    const Vec phi0 = red.recover_zero(phi);
    const Vec resid = red.L_0p * phi + red.L_00 * phi0;  // no forcing
    CHECK(resid.norm() <= 1e-10 * (1.0 + phi.norm()));
}

TEST_CASE("Appendix-B reduction matches the eps-perturbed system's slow eigenvalues") {
    RMat A = RMat::Zero(3, 3);
    A(0, 0) = 1.0;
    A(1, 1) = -1.0;
    const RMat C = test::random_real_matrix(3, 0.5, 17);
    const cxd s{0.3, 0.7};

    const CharacteristicForm f0 = characteristic_form(HyperbolicSystem(A, {}, C));
    auto [op_red, red] = reduce_singular({f0}, TransverseDiscretization::none(), s, {});
    Eigen::ComplexEigenSolver<Mat> es_red(op_red.M, false);

    auto slow_distance = [&](double eps) {
        RMat Ae = A;
        Ae(2, 2) = eps;
        const CharacteristicForm fe = characteristic_form(HyperbolicSystem(Ae, {}, C));
        const OperatorM ope = assemble_operator(fe, TransverseDiscretization::none(), s, {});
        Eigen::ComplexEigenSolver<Mat> es(ope.M, false);
        double worst = 0.0;
        for (int i = 0; i < es_red.eigenvalues().size(); ++i) {
            double best = 1e300;
            for (int j = 0; j < es.eigenvalues().size(); ++j)
                best = std::min(best, std::abs(es_red.eigenvalues()[i] - es.eigenvalues()[j]));
            worst = std::max(worst, best);
        }
        return worst;
    };
    const double d6 = slow_distance(1e-6);
    const double d8 = slow_distance(1e-8);
    CHECK(d8 < d6);  // monotone approach as eps -> 0
    CHECK(d6 < 1e-4);
    CHECK(d8 < 1e-6);
}

TEST_CASE("SingularBlock when L00 is numerically singular") {
    // zero characteristic whose algebraic row vanishes identically at s = 0
    RMat A = RMat::Zero(2, 2);
    A(0, 0) = 1.0;
    const CharacteristicForm f = characteristic_form(HyperbolicSystem(A, {}, RMat::Zero(2, 2)));
    CHECK_THROWS_AS(reduce_singular({f}, TransverseDiscretization::none(), cxd(0.0, 0.0), {}),
                    SingularBlock);
}

TEST_CASE("Re(s) < 0 is rejected") {
    const CharacteristicForm f = euler2d_characteristic(0.5, 1.0, 1.0);
    const auto disc = make_transverse_uniform(4, 0.0, 1.0, 2, BoundaryKind::Periodic);
    CHECK_THROWS_AS(assemble_operator(f, disc, cxd(-0.1, 1.0), {}), std::invalid_argument);
}
