#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace owns {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr cxd I1{0.0, 1.0};

// ===== error taxonomy =====
// One exception type per named failure mode; payloads carry the diagnostic
// the caller needs to act (offending eigenvalue, station index, condition).

struct OwnsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotHyperbolic : OwnsError {
    cxd offending;
    explicit NotHyperbolic(cxd lambda)
        : OwnsError("flux matrix is not hyperbolic: eigenvalue (" +
                    std::to_string(lambda.real()) + ", " + std::to_string(lambda.imag()) +
                    "i) has a non-negligible imaginary part"),
          offending(lambda) {}
};

struct SingularBlock : OwnsError {
    double cond;
    explicit SingularBlock(double c)
        : OwnsError("L00 block is numerically singular (cond ~ " + std::to_string(c) +
                    "); a grid node sits on a sonic/zero-velocity point"),
          cond(c) {}
};

struct NotSingular : OwnsError {
    NotSingular() : OwnsError("system has no zero characteristics; use assemble_operator") {}
};

struct ClassificationAmbiguous : OwnsError {
    using OwnsError::OwnsError;
};

struct UnresolvedPairing : OwnsError {
    using OwnsError::OwnsError;
};

struct NoConvergence : OwnsError {
    cxd shift;
    explicit NoConvergence(cxd sh)
        : OwnsError("shift-invert iteration did not converge for shift (" +
                    std::to_string(sh.real()) + ", " + std::to_string(sh.imag()) + "i)"),
          shift(sh) {}
};

struct IllConditioned : OwnsError {
    double cond;
    IllConditioned(const std::string& what_mat, double c)
        : OwnsError(what_mat + " is ill-conditioned (cond ~ " + std::to_string(c) + ")"), cond(c) {}
};

struct PoleCollision : OwnsError {
    using OwnsError::OwnsError;
};

struct PoleAtEigenvalue : OwnsError {
    using OwnsError::OwnsError;
};

struct DegenerateLeadingCoefficient : OwnsError {
    using OwnsError::OwnsError;
};

struct SolveFailure : OwnsError {
    cxd beta;
    double cond;
    SolveFailure(cxd b, double c, const std::string& msg)
        : OwnsError(msg), beta(b), cond(c) {}
};

struct EmptySpectrum : OwnsError {
    EmptySpectrum() : OwnsError("spectrum has no modes to select from") {}
};

struct ExcludedAll : OwnsError {
    using OwnsError::OwnsError;
};

struct BadConfig : OwnsError {
    using OwnsError::OwnsError;
};

struct DegenerateSpectrum : OwnsError {
    using OwnsError::OwnsError;
};

struct BlowUp : OwnsError {
    int station;
    explicit BlowUp(int st, double norm_ratio)
        : OwnsError("march blew up at station " + std::to_string(st) +
                    " (state norm exceeds inlet norm by " + std::to_string(norm_ratio) + ")"),
          station(st) {}
};

struct NonpositiveAmplitude : OwnsError {
    using OwnsError::OwnsError;
};

// ===== small shared numerics =====

/// Euclidean-induced matrix 2-norm (largest singular value).
double norm2(const Mat& a);

/// 2-norm condition number; returns +inf for (numerically) rank-deficient input.
double cond2(const Mat& a);

}  // namespace owns
