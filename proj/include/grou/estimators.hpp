#pragma once

#include "grou/error.hpp"
#include "grou/graph.hpp"
#include "grou/levy.hpp"
#include "grou/likelihood.hpp"
#include "grou/linalg.hpp"
#include "grou/stats.hpp"

#include <cmath>
#include <optional>
#include <string>

namespace grou {

enum class EstimateKind { Theta, Psi, Q };

inline std::string to_string(EstimateKind k) {
    switch (k) {
        case EstimateKind::Theta: return "theta";
        case EstimateKind::Psi: return "psi";
        case EstimateKind::Q: return "q";
    }
    return "?";
}

/// Relative condition-number guard for the closed-form solves.
inline constexpr double kMaxCondition = 1e10;

struct EstimateReport {
    EstimateKind kind = EstimateKind::Theta;
    int d = 0;
    double horizon = 0.0;
    Vec estimate;
    Mat info_matrix;             // [H]_t, or [I]_t when d <= 12
    std::optional<Mat> cov_clt;  // limiting covariance of sqrt(t) (estimate - truth)
    std::optional<Vec> truth;
    std::optional<Vec> standardized;  // info^{1/2} (estimate - truth)
    double ci_level = 0.0;
    std::optional<Vec> ci_halfwidths;
};

/// theta_hat = [H]_t^{-1} H_t.
inline EstimateReport theta_mle(const LikelihoodStats& stats) {
    if (!stats.has_theta) {
        throw ContractViolation("theta_mle: theta statistics not filled");
    }
    const Mat& hq = stats.h_quad;
    if (!(hq(0, 0) > 0.0) || !(hq(1, 1) > 0.0)) {
        throw IdentifiabilityError(
            "theta_mle: [H]_t is singular (A_bar Y vanishes identically; Cauchy-Schwarz equality, e.g. edgeless graph)");
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(hq, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > kMaxCondition) {
        throw IdentifiabilityError(
            "theta_mle: [H]_t is numerically singular (A_bar Y and Y collinear; Cauchy-Schwarz equality)");
    }
    Eigen::LLT<Mat> llt(hq);
    if (llt.info() != Eigen::Success) {
        throw IdentifiabilityError("theta_mle: Cholesky of [H]_t failed");
    }
    EstimateReport r;
    r.kind = EstimateKind::Theta;
    r.d = stats.d;
    r.horizon = stats.t_end;
    r.estimate = llt.solve(stats.h);
    r.info_matrix = hq;
    return r;
}

namespace detail {

inline void require_well_conditioned_spd(const Mat& m, const std::string& what) {
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > kMaxCondition) {
        throw IdentifiabilityError(what + " is singular or ill-conditioned (condition > 1e10)");
    }
}

}  // namespace detail

/// psi_hat = [I]_t^{-1} I_t. With constant Sigma the Kronecker structure gives
/// vec^{-1}(psi_hat) = Sigma vec^{-1}(I_t) K_t^{-1}; no d^2 x d^2 solve.
inline EstimateReport psi_mle(const LikelihoodStats& stats) {
    if (!stats.has_psi) {
        throw ContractViolation("psi_mle: psi statistics not filled");
    }
    EstimateReport r;
    r.kind = EstimateKind::Psi;
    r.d = stats.d;
    r.horizon = stats.t_end;
    if (stats.i_quad_full) {
        detail::require_well_conditioned_spd(*stats.i_quad_full, "psi_mle: [I]_t");
        r.estimate = stats.i_quad_full->llt().solve(stats.i_vec);
        r.info_matrix = *stats.i_quad_full;
        return r;
    }
    detail::require_well_conditioned_spd(stats.k, "psi_mle: K_t");
    const Mat rhs = stats.sigma * vec_inverse(stats.i_vec);
    const Mat psi_mat = stats.k.llt().solve(rhs.transpose()).transpose();
    r.estimate = vec(psi_mat);
    if (stats.d <= LikelihoodStats::max_dense_dim) {
        r.info_matrix = stats.i_quad_dense();
    }
    return r;
}

/// Unconstrained matrix MLE Q_hat = -(int dY^c Y^T) K_t^{-1}.
///
/// This is the transpose of the literal matrix -K_t^{-1} int Y (dY^c)^T; the
/// orientation here matches dY = -Q Y dt, so vec(q_mle_matrix) == psi_mle.
inline Mat q_mle_matrix(const LikelihoodStats& stats) {
    if (!stats.has_psi) {
        throw ContractViolation("q_mle_matrix: psi statistics not filled");
    }
    detail::require_well_conditioned_spd(stats.k, "q_mle_matrix: K_t");
    return -stats.k.llt().solve(stats.dyc_y.transpose()).transpose();
}

inline Mat q_mle_matrix(const SamplePath& path, const Mat& sigma, const ContinuousPartOptions& opts) {
    return q_mle_matrix(compute_psi_stats(path, sigma, opts));
}

/// G_infinity from the stationary second moment S = E[Y Y^T].
inline Mat g_infinity_from_moment(const Mat& second_moment, const Mat& sigma, const Graph& g) {
    const Mat a_bar = row_normalize(g);
    const Mat sigma_inv = detail::inverse_spd(sigma, "Sigma");
    Mat out(2, 2);
    out(0, 0) = (a_bar.transpose() * sigma_inv * a_bar * second_moment).trace();
    out(0, 1) = (a_bar.transpose() * sigma_inv * second_moment).trace();
    out(1, 0) = out(0, 1);
    out(1, 1) = (sigma_inv * second_moment).trace();
    return out;
}

/// Limiting information matrix of the theta-MLE for a Brownian driver.
inline Mat g_infinity(const DynamicsMatrix& q, const Mat& sigma, const Graph& g) {
    return g_infinity_from_moment(lyapunov_stationary_cov(q, sigma), sigma, g);
}

/// Covariance left (x) right, stored factored.
struct KroneckerPair {
    Mat left;
    Mat right;

    [[nodiscard]] Mat dense() const { return kron(left, right); }
};

/// Limiting covariance E(Y Y^T)^{-1} (x) Sigma of sqrt(t)(psi_hat - psi).
inline KroneckerPair psi_clt_covariance(const Mat& second_moment, const Mat& sigma) {
    return {detail::inverse_spd(second_moment, "E(Y Y^T)"), sigma};
}

inline KroneckerPair psi_clt_covariance(const DynamicsMatrix& q, const Mat& sigma) {
    return psi_clt_covariance(lyapunov_stationary_cov(q, sigma), sigma);
}

/// D_A C D_A with D_A = diag(vec(I + A_bar)).
inline Mat apply_network_mask_clt(const KroneckerPair& cov, const Graph& g) {
    const Vec mask = vec(network_mask(g));
    return mask.asDiagonal() * cov.dense() * mask.asDiagonal();
}

inline Mat apply_network_mask_clt(const Mat& cov, const Graph& g) {
    const Vec mask = vec(network_mask(g));
    return mask.asDiagonal() * cov * mask.asDiagonal();
}

/// Fills the truth-dependent fields (harness mode).
inline void attach_truth(EstimateReport& r, const Vec& truth) {
    if (truth.size() != r.estimate.size()) {
        throw DimensionError("attach_truth: truth has wrong length");
    }
    r.truth = truth;
    if (r.info_matrix.size() > 0) {
        r.standardized = sym_sqrt_psd(r.info_matrix) * (r.estimate - truth);
    }
}

struct ConfidenceRegion {
    double level = 0.0;
    Vec lower;
    Vec upper;
    Vec halfwidths;
    double ellipsoid_radius = 0.0;  // sqrt of the chi-square quantile, Mahalanobis units
};

/// Wald intervals estimate +/- z * sqrt(diag(cov_clt) / t) and the radius of
/// the joint ellipsoid {x : t (x - est)^T cov^{-1} (x - est) <= r^2}.
inline ConfidenceRegion confidence_region(EstimateReport& r, double level) {
    if (!r.cov_clt) {
        throw ContractViolation("confidence_region: no limiting covariance attached");
    }
    const double z = stats::two_sided_z(level);
    ConfidenceRegion cr;
    cr.level = level;
    cr.halfwidths = z * (r.cov_clt->diagonal().cwiseMax(0.0) / r.horizon).cwiseSqrt();
    cr.lower = r.estimate - cr.halfwidths;
    cr.upper = r.estimate + cr.halfwidths;
    cr.ellipsoid_radius = std::sqrt(stats::chi2_quantile(level, static_cast<double>(r.estimate.size())));
    r.ci_level = level;
    r.ci_halfwidths = cr.halfwidths;
    return cr;
}

/// Intervals from the observed information: estimate +/- z sqrt(diag(info^{-1})).
inline ConfidenceRegion confidence_region_observed(const EstimateReport& r, double level) {
    if (r.info_matrix.size() == 0) {
        throw ContractViolation("confidence_region_observed: no information matrix");
    }
    const double z = stats::two_sided_z(level);
    const Mat inv = r.info_matrix.llt().solve(Mat::Identity(r.info_matrix.rows(), r.info_matrix.cols()));
    ConfidenceRegion cr;
    cr.level = level;
    cr.halfwidths = z * inv.diagonal().cwiseMax(0.0).cwiseSqrt();
    cr.lower = r.estimate - cr.halfwidths;
    cr.upper = r.estimate + cr.halfwidths;
    cr.ellipsoid_radius = std::sqrt(stats::chi2_quantile(level, static_cast<double>(r.estimate.size())));
    return cr;
}

}  // namespace grou
