#include "owns/types.hpp"

#include <limits>

#include <Eigen/SVD>

namespace owns {

double norm2(const Mat& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(a);
    return svd.singularValues()(0);
}

double cond2(const Mat& a) {
    if (a.size() == 0) return 1.0;
    Eigen::JacobiSVD<Mat> svd(a);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (smin <= 0.0) return std::numeric_limits<double>::infinity();
    return sv(0) / smin;
}

}  // namespace owns
