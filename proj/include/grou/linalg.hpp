#pragma once

#include "grou/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace grou {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Column-stacking vectorisation: entry (i, j) of an n x n matrix lands at
/// index n * j + i (zero-based).
inline Vec vec(const Mat& m) {
    return Eigen::Map<const Vec>(m.data(), m.size());
}

/// Inverse of vec() for square matrices.
inline Mat vec_inverse(const Vec& x) {
    const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(x.size()))));
    if (n * n != x.size() || x.size() == 0) {
        throw DimensionError("vec_inverse: length " + std::to_string(x.size()) + " is not a positive perfect square");
    }
    return Eigen::Map<const Mat>(x.data(), n, n);
}

inline Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

inline double norm1(const Mat& m) {
    return m.cwiseAbs().colwise().sum().maxCoeff();
}

namespace detail {

// Pade coefficients for exp, orders 3, 5, 7, 9, 13 (Higham 2005).
inline void pade_uv(const Mat& a, int order, Mat& u, Mat& v) {
    const Eigen::Index n = a.rows();
    const Mat id = Mat::Identity(n, n);
    const Mat a2 = a * a;
    switch (order) {
        case 3: {
            constexpr std::array<double, 4> b{120., 60., 12., 1.};
            u = a * (b[3] * a2 + b[1] * id);
            v = b[2] * a2 + b[0] * id;
            return;
        }
        case 5: {
            constexpr std::array<double, 6> b{30240., 15120., 3360., 420., 30., 1.};
            const Mat a4 = a2 * a2;
            u = a * (b[5] * a4 + b[3] * a2 + b[1] * id);
            v = b[4] * a4 + b[2] * a2 + b[0] * id;
            return;
        }
        case 7: {
            constexpr std::array<double, 8> b{17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.};
            const Mat a4 = a2 * a2;
            const Mat a6 = a4 * a2;
            u = a * (b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
            v = b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
            return;
        }
        case 9: {
            constexpr std::array<double, 10> b{17643225600., 8821612800., 2075673600., 302702400., 30270240.,
                                               2162160.,     110880.,     3960.,       90.,        1.};
            const Mat a4 = a2 * a2;
            const Mat a6 = a4 * a2;
            const Mat a8 = a6 * a2;
            u = a * (b[9] * a8 + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
            v = b[8] * a8 + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
            return;
        }
        default: {
            constexpr std::array<double, 14> b{64764752532480000., 32382376266240000., 7771770303897600.,
                                               1187353796428800.,  129060195264000.,   10559470521600.,
                                               670442572800.,      33522128640.,       1323241920.,
                                               40840800.,          960960.,            16380.,
                                               182.,               1.};
            const Mat a4 = a2 * a2;
            const Mat a6 = a4 * a2;
            u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
            v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
            return;
        }
    }
}

}  // namespace detail

/// Matrix exponential by scaling and squaring with a diagonal Pade
/// approximant; the order and scaling follow Higham (2005).
inline Mat matrix_exponential(const Mat& m) {
    if (m.rows() != m.cols()) {
        throw DimensionError("matrix_exponential: matrix is not square");
    }
    if (!m.allFinite()) {
        throw NumericError("matrix_exponential: non-finite entries");
    }
    const Eigen::Index n = m.rows();
    if (n == 0) {
        return m;
    }
    constexpr std::array<double, 4> theta{1.495585217958292e-2, 2.539398330063230e-1, 9.504178996162932e-1,
                                          2.097847961257068e0};
    constexpr std::array<int, 4> orders{3, 5, 7, 9};
    constexpr double theta13 = 5.371920351148152e0;

    const double l1 = norm1(m);
    Mat u, v;
    for (std::size_t k = 0; k < orders.size(); ++k) {
        if (l1 <= theta[k]) {
            detail::pade_uv(m, orders[k], u, v);
            return (v - u).partialPivLu().solve(v + u);
        }
    }
    int squarings = 0;
    if (l1 > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(l1 / theta13)));
    }
    if (squarings > 1000) {
        throw NumericError("matrix_exponential: norm too large (overflow)");
    }
    const Mat scaled = m * std::ldexp(1.0, -squarings);
    detail::pade_uv(scaled, 13, u, v);
    Mat result = (v - u).partialPivLu().solve(v + u);
    for (int s = 0; s < squarings; ++s) {
        result = result * result;
    }
    if (!result.allFinite()) {
        throw NumericError("matrix_exponential: overflow");
    }
    return result;
}

/// Stationary covariance S solving Q S + S Q^T = Sigma, i.e. the closed form
/// of the integral of exp(-sQ) Sigma exp(-sQ^T) over s >= 0. Solved as
/// (Q (x) I + I (x) Q) vec(S) = vec(Sigma).
inline Mat lyapunov_solve(const Mat& q, const Mat& sigma) {
    const Eigen::Index d = q.rows();
    if (q.cols() != d || sigma.rows() != d || sigma.cols() != d) {
        throw DimensionError("lyapunov_solve: dimension mismatch");
    }
    const Mat id = Mat::Identity(d, d);
    const Mat ksum = kron(q, id) + kron(id, q);
    Eigen::PartialPivLU<Mat> lu(ksum);
    const double rc = lu.rcond();
    if (!(rc > 1e-14)) {
        throw NumericError("lyapunov_solve: singular Kronecker sum (dynamics matrix not stationary)");
    }
    Mat s = vec_inverse(lu.solve(vec(sigma)));
    return 0.5 * (s + s.transpose());
}

/// Operator X -> vec^{-1}((Q (+) Q)^{-1} vec(X)), precomputed once for repeated
/// Lyapunov solves with a fixed Q.
class LyapunovOperator {
public:
    explicit LyapunovOperator(const Mat& q) : d_(q.rows()) {
        const Mat id = Mat::Identity(d_, d_);
        Eigen::PartialPivLU<Mat> lu(kron(q, id) + kron(id, q));
        if (!(lu.rcond() > 1e-14)) {
            throw NumericError("LyapunovOperator: singular Kronecker sum (dynamics matrix not stationary)");
        }
        inverse_ = lu.inverse();
    }

    [[nodiscard]] Mat apply(const Mat& x) const {
        Mat s(d_, d_);
        Eigen::Map<Vec>(s.data(), s.size()).noalias() = inverse_ * Eigen::Map<const Vec>(x.data(), x.size());
        return 0.5 * (s + s.transpose());
    }

private:
    Eigen::Index d_;
    Mat inverse_;
};

/// Symmetric square root of a PSD matrix; negative eigenvalues clipped at 0.
inline Mat sym_sqrt_psd(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()));
    const Vec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

/// Pseudo-inverse of a symmetric PSD matrix: eigenvalues below `floor`
/// (absolute) are treated as zero.
inline Mat sym_pinv(const Mat& m, double floor = 1e-10) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()));
    Vec inv = es.eigenvalues();
    for (Eigen::Index i = 0; i < inv.size(); ++i) {
        inv[i] = inv[i] > floor ? 1.0 / inv[i] : 0.0;
    }
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

/// Factor L with L L^T = m for a PSD matrix. Falls back to the clipped
/// symmetric square root when Cholesky fails (semidefinite input).
inline Mat psd_factor(const Mat& m) {
    Eigen::LLT<Mat> llt(m);
    if (llt.info() == Eigen::Success) {
        return llt.matrixL();
    }
    return sym_sqrt_psd(m);
}

inline double min_eigenvalue_sym(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

/// Smallest real part over the spectrum of a general square matrix.
inline double min_real_eigenvalue(const Mat& m) {
    Eigen::EigenSolver<Mat> es(m, false);
    if (es.info() != Eigen::Success) {
        throw NumericError("eigenvalue solver failed");
    }
    return es.eigenvalues().real().minCoeff();
}

/// Cholesky factor of a symmetric positive-definite matrix, or throws with
/// `what` naming the offending input.
inline Eigen::LLT<Mat> require_spd(const Mat& m, const std::string& what) {
    if (m.rows() != m.cols()) {
        throw DimensionError(what + " is not square");
    }
    if (!m.isApprox(m.transpose(), 1e-12)) {
        throw NumericError(what + " is not symmetric");
    }
    Eigen::LLT<Mat> llt(m);
    if (llt.info() != Eigen::Success) {
        throw NumericError(what + " is not positive definite (Cholesky factorisation failed)");
    }
    return llt;
}

}  // namespace grou
