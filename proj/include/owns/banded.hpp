#pragma once

#include <vector>

#include "owns/types.hpp"

namespace owns {

/// Complex banded LU (LAPACK zgbtrf/zgbtrs) for the recursive-filter systems.
/// Entries outside the declared band are rejected at assembly time.
class BandedLU {
public:
    BandedLU(int n, int kl, int ku);

    int size() const { return n_; }

    /// Accumulate into entry (i, j); |i - j| must lie within the band.
    void add(int i, int j, cxd v);

    /// Factor in place. Throws SolveFailure if a zero pivot is hit.
    void factor();

    /// Solve A X = B in place (B is n x nrhs). Requires factor() first.
    void solve(Mat& b) const;

private:
    int n_ = 0;
    int kl_ = 0;
    int ku_ = 0;
    int ldab_ = 0;
    bool factored_ = false;
    std::vector<cxd> ab_;       // LAPACK band storage, column-major
    std::vector<int> ipiv_;
};

}  // namespace owns
