#pragma once

#include "grou/linalg.hpp"
#include "grou/rng.hpp"
#include "oracles.hpp"

#include <Eigen/Eigenvalues>

#include <vector>

namespace testing_util {

using grou::Mat;
using grou::Vec;

inline oracle::Dense to_dense(const Mat& m) {
    oracle::Dense out = oracle::zeros(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
    return out;
}

inline Mat from_dense(const oracle::Dense& d) {
    Mat m(d.size(), d[0].size());
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < d[0].size(); ++j) m(i, j) = d[i][j];
    return m;
}

inline std::vector<oracle::Series> columns(const Mat& values) {
    std::vector<oracle::Series> out;
    for (Eigen::Index k = 0; k < values.cols(); ++k) {
        out.emplace_back(values.col(k).data(), values.col(k).data() + values.rows());
    }
    return out;
}

inline Mat random_matrix(grou::Rng& rng, int r, int c, double scale = 1.0) {
    Mat m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = scale * rng.normal();
    return m;
}

inline Mat random_spd(grou::Rng& rng, int d, double floor = 0.3) {
    const Mat a = random_matrix(rng, d, d, 1.0 / std::sqrt(static_cast<double>(d)));
    return a * a.transpose() + floor * Mat::Identity(d, d);
}

/// Random matrix whose eigenvalues have real parts in [shift, ...).
inline Mat random_stable(grou::Rng& rng, int d, double shift) {
    Mat a = random_matrix(rng, d, d, 1.0 / std::sqrt(static_cast<double>(d)));
    const double lo = Eigen::EigenSolver<Mat>(a).eigenvalues().real().minCoeff();
    a.diagonal().array() += shift - lo;
    return a;
}

inline double rel_err(const Mat& a, const Mat& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

}  // namespace testing_util
