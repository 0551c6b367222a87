#pragma once

#include "grou/error.hpp"
#include "grou/estimators.hpp"
#include "grou/likelihood.hpp"
#include "grou/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace grou {

/// Penalty rate lambda(t) = a * t^{-beta}, or a fixed lambda. The fitted
/// objective is
///   psi^T I_t - 1/2 psi^T [I]_t psi - lambda * t * sum_k w_k |psi_k|,
/// with adaptive weights w_k = |psi_mle_k|^{-gamma}.
struct LassoConfig {
    double gamma = 1.0;
    double schedule_a = 1.0;
    double schedule_beta = 0.6;
    std::optional<double> lambda_fixed;
    int max_iter = 10000;
    double tol = 1e-10;
    bool exempt_diagonal = false;

    static constexpr double max_weight = 1e12;

    void validate() const {
        if (!(gamma > 0.0)) {
            throw ConfigError("lasso: gamma must be > 0");
        }
        if (lambda_fixed && !(*lambda_fixed >= 0.0)) {
            throw ConfigError("lasso: lambda must be >= 0");
        }
        if (!lambda_fixed && !(schedule_a >= 0.0)) {
            throw ConfigError("lasso: schedule coefficient must be >= 0");
        }
        if (max_iter < 1 || !(tol > 0.0)) {
            throw ConfigError("lasso: max_iter must be >= 1 and tol > 0");
        }
    }

    /// beta in (1/2, (1 + gamma)/2): lambda(t) t^{1/2} -> 0 and
    /// lambda(t) t^{(1 + gamma)/2} -> infinity.
    [[nodiscard]] bool schedule_valid() const noexcept {
        return schedule_beta > 0.5 && schedule_beta < 0.5 * (1.0 + gamma);
    }

    [[nodiscard]] double lambda_at(double t) const {
        return lambda_fixed ? *lambda_fixed : schedule_a * std::pow(t, -schedule_beta);
    }
};

struct LassoResult {
    Mat q_al;
    std::vector<int> support;  // vec indices of nonzero entries
    std::vector<double> objective_trace;
    Mat adjacency_estimate;
    double lambda = 0.0;
    int sweeps = 0;
    Vec weights;
};

inline double soft_threshold(double v, double k) {
    if (!(k >= 0.0)) {
        throw ContractViolation("soft_threshold: threshold must be >= 0");
    }
    if (v > k) return v - k;
    if (v < -k) return v + k;
    return 0.0;
}

/// Adaptive weights |psi_mle|^{-gamma}, capped at 1e12; zero on the diagonal
/// when it is exempt.
inline Vec adaptive_weights(const Vec& psi_mle, int d, const LassoConfig& cfg) {
    Vec w(psi_mle.size());
    for (Eigen::Index k = 0; k < w.size(); ++k) {
        const double a = std::abs(psi_mle[k]);
        w[k] = a > 0.0 ? std::min(std::pow(a, -cfg.gamma), LassoConfig::max_weight) : LassoConfig::max_weight;
        if (cfg.exempt_diagonal && k % (d + 1) == 0) {
            w[k] = 0.0;
        }
    }
    return w;
}

namespace detail {

/// Exact quadratic psi^T b - 1/2 psi^T A psi with A = K (x) Sigma^{-1} (or a
/// dense matrix), accessed column-wise.
class LassoQuadratic {
public:
    explicit LassoQuadratic(const LikelihoodStats& s) : s_(s), d_(s.d), n_(s.d * s.d) {
        if (s.i_quad_full) {
            dense_ = *s.i_quad_full;
        }
        diag_ = s.i_quad_diagonal();
    }

    [[nodiscard]] int size() const noexcept { return n_; }
    [[nodiscard]] double diag(int k) const { return diag_[k]; }
    [[nodiscard]] const Vec& linear() const { return s_.i_vec; }

    [[nodiscard]] Vec apply(const Vec& psi) const { return s_.i_quad_apply(psi); }

    // r += delta * A e_k
    void add_column(Vec& r, int k, double delta) const {
        if (dense_) {
            r.noalias() += delta * dense_->col(k);
            return;
        }
        const int i = k % d_;
        const int j = k / d_;
        for (int l = 0; l < d_; ++l) {
            r.segment(l * d_, d_).noalias() += (delta * s_.k(l, j)) * s_.sigma_inv.col(i);
        }
    }

private:
    const LikelihoodStats& s_;
    int d_;
    int n_;
    std::optional<Mat> dense_;
    Vec diag_;
};

inline double lasso_objective(const Vec& psi, const Vec& ipsi, const Vec& b, const Vec& pen) {
    return psi.dot(b) - 0.5 * psi.dot(ipsi) - pen.dot(psi.cwiseAbs());
}

// Largest KKT residual in coordinate units: for psi_k != 0 the gradient must
// equal pen_k sign(psi_k), for psi_k == 0 it must lie in [-pen_k, pen_k].
inline double kkt_residual(const Vec& psi, const Vec& grad, const Vec& pen, const Vec& diag) {
    double worst = 0.0;
    for (Eigen::Index k = 0; k < psi.size(); ++k) {
        double v = 0.0;
        if (psi[k] != 0.0) {
            v = std::abs(grad[k] - pen[k] * (psi[k] > 0.0 ? 1.0 : -1.0));
        } else {
            v = std::max(0.0, std::abs(grad[k]) - pen[k]);
        }
        worst = std::max(worst, v / diag[k]);
    }
    return worst;
}

}  // namespace detail

struct KktReport {
    double max_residual = 0.0;      // gradient residual divided by [I]_kk
    double max_raw_residual = 0.0;  // gradient residual itself
    bool ok = false;
};

/// Cyclic coordinate descent with exact soft-threshold updates. Starts from
/// `start` (defaults to the matrix MLE) and stops once the KKT residual, in
/// coordinate units, is below tol.
inline LassoResult adaptive_lasso_fit(const LikelihoodStats& stats, const LassoConfig& cfg,
                                      const std::optional<Vec>& start = std::nullopt) {
    cfg.validate();
    const EstimateReport mle = psi_mle(stats);
    const int d = stats.d;
    const double lambda = cfg.lambda_at(stats.t_end);
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw ContractViolation("adaptive_lasso_fit: lambda must be finite and >= 0");
    }
    const detail::LassoQuadratic quad(stats);
    const int n = quad.size();
    const Vec w = adaptive_weights(mle.estimate, d, cfg);
    const Vec pen = lambda * stats.t_end * w;
    Vec diag(n);
    for (int k = 0; k < n; ++k) {
        diag[k] = quad.diag(k);
        if (!(diag[k] > 0.0)) {
            throw IdentifiabilityError("adaptive_lasso_fit: zero curvature in coordinate " + std::to_string(k));
        }
    }

    Vec psi = start.value_or(mle.estimate);
    if (psi.size() != n) {
        throw DimensionError("adaptive_lasso_fit: start vector has wrong length");
    }
    Vec r = quad.apply(psi);
    const Vec& b = quad.linear();

    LassoResult res;
    res.lambda = lambda;
    res.weights = w;
    res.objective_trace.push_back(detail::lasso_objective(psi, r, b, pen));
    bool converged = false;
    for (int sweep = 0; sweep < cfg.max_iter; ++sweep) {
        double max_change = 0.0;
        for (int k = 0; k < n; ++k) {
            const double z = psi[k] + (b[k] - r[k]) / diag[k];
            const double next = soft_threshold(z, pen[k] / diag[k]);
            const double delta = next - psi[k];
            if (delta != 0.0) {
                quad.add_column(r, k, delta);
                psi[k] = next;
                max_change = std::max(max_change, std::abs(delta));
            }
        }
        r = quad.apply(psi);
        res.objective_trace.push_back(detail::lasso_objective(psi, r, b, pen));
        res.sweeps = sweep + 1;
        if (max_change < cfg.tol && detail::kkt_residual(psi, b - r, pen, diag) < cfg.tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        std::string trace;
        const std::size_t from = res.objective_trace.size() > 5 ? res.objective_trace.size() - 5 : 0;
        for (std::size_t i = from; i < res.objective_trace.size(); ++i) {
            trace += " " + std::to_string(res.objective_trace[i]);
        }
        throw OptimizerError("adaptive_lasso_fit: no convergence after " + std::to_string(cfg.max_iter) +
                             " sweeps; last objective values:" + trace);
    }

    res.q_al = vec_inverse(psi);
    res.adjacency_estimate = Mat::Zero(d, d);
    for (int k = 0; k < n; ++k) {
        if (psi[k] != 0.0) {
            res.support.push_back(k);
            if (k % d != k / d) {
                res.adjacency_estimate(k % d, k / d) = 1.0;
            }
        }
    }
    return res;
}

inline KktReport kkt_check(const LikelihoodStats& stats, const LassoConfig& cfg, const LassoResult& res) {
    const detail::LassoQuadratic quad(stats);
    const Vec psi = vec(res.q_al);
    const Vec grad = quad.linear() - quad.apply(psi);
    const Vec pen = res.lambda * stats.t_end * res.weights;
    const Vec diag = stats.i_quad_diagonal();
    KktReport out;
    out.max_residual = detail::kkt_residual(psi, grad, pen, diag);
    out.max_raw_residual = detail::kkt_residual(psi, grad, pen, Vec::Ones(diag.size()));
    out.ok = out.max_residual <= 10.0 * cfg.tol;
    return out;
}

/// Warm-started sweep over a descending grid of fixed lambdas.
inline std::vector<LassoResult> lasso_path(const LikelihoodStats& stats, const LassoConfig& cfg,
                                           const std::vector<double>& lambdas) {
    if (!std::is_sorted(lambdas.rbegin(), lambdas.rend())) {
        throw ContractViolation("lasso_path: lambda grid must be sorted in descending order");
    }
    std::vector<LassoResult> out;
    std::optional<Vec> warm;
    for (double lam : lambdas) {
        LassoConfig c = cfg;
        c.lambda_fixed = lam;
        out.push_back(adaptive_lasso_fit(stats, c, warm));
        warm = vec(out.back().q_al);
    }
    return out;
}

struct SupportScore {
    double tpr = 0.0;
    double fpr = 0.0;
    bool exact_match = false;
};

/// Compares nonzero patterns entrywise over all d^2 entries.
inline SupportScore support_recovery_score(const LassoResult& result, const Mat& q_true) {
    if (result.q_al.rows() != q_true.rows() || result.q_al.cols() != q_true.cols()) {
        throw DimensionError("support_recovery_score: shape mismatch");
    }
    int tp = 0, fp = 0, pos = 0, neg = 0;
    for (Eigen::Index k = 0; k < q_true.size(); ++k) {
        const bool truth = q_true.data()[k] != 0.0;
        const bool est = result.q_al.data()[k] != 0.0;
        pos += truth;
        neg += !truth;
        tp += truth && est;
        fp += !truth && est;
    }
    SupportScore s;
    s.tpr = pos == 0 ? 1.0 : static_cast<double>(tp) / pos;
    s.fpr = neg == 0 ? 0.0 : static_cast<double>(fp) / neg;
    s.exact_match = tp == pos && fp == 0;
    return s;
}

}  // namespace grou
