#include "owns/banded.hpp"

#include <cstdlib>
#include <stdexcept>

#define LAPACK_COMPLEX_CPP
#include <lapacke.h>

namespace owns {

BandedLU::BandedLU(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1) {
    if (n <= 0 || kl < 0 || ku < 0) throw std::invalid_argument("BandedLU: bad dimensions");
    ab_.assign(static_cast<size_t>(ldab_) * n_, cxd(0.0, 0.0));
    ipiv_.assign(n_, 0);
}

void BandedLU::add(int i, int j, cxd v) {
    const int d = i - j;
    if (d > kl_ || -d > ku_) throw std::out_of_range("BandedLU::add outside band");
    // row kl+ku+i-j of column j in LAPACK band storage (0-based)
    ab_[static_cast<size_t>(j) * ldab_ + (kl_ + ku_ + d)] += v;
}

void BandedLU::factor() {
    const int info = LAPACKE_zgbtrf(LAPACK_COL_MAJOR, n_, n_, kl_, ku_,
                                    reinterpret_cast<lapack_complex_double*>(ab_.data()), ldab_,
                                    ipiv_.data());
    if (info != 0) {
        throw SolveFailure(cxd(0, 0), 0.0,
                           "banded LU factorization failed (zgbtrf info = " + std::to_string(info) + ")");
    }
    factored_ = true;
}

void BandedLU::solve(Mat& b) const {
    if (!factored_) throw std::logic_error("BandedLU::solve before factor");
    if (b.rows() != n_) throw std::invalid_argument("BandedLU::solve dimension mismatch");
    const int nrhs = static_cast<int>(b.cols());
    const int info = LAPACKE_zgbtrs(LAPACK_COL_MAJOR, 'N', n_, kl_, ku_, nrhs,
                                    reinterpret_cast<const lapack_complex_double*>(ab_.data()), ldab_,
                                    ipiv_.data(), reinterpret_cast<lapack_complex_double*>(b.data()),
                                    n_);
    if (info != 0) {
        throw SolveFailure(cxd(0, 0), 0.0,
                           "banded solve failed (zgbtrs info = " + std::to_string(info) + ")");
    }
}

}  // namespace owns
