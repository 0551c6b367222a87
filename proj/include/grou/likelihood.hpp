#pragma once

#include "grou/error.hpp"
#include "grou/graph.hpp"
#include "grou/levy.hpp"
#include "grou/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace grou {

enum class FilterMode { None, OracleJumps, Threshold };

inline std::string to_string(FilterMode m) {
    switch (m) {
        case FilterMode::None: return "none";
        case FilterMode::OracleJumps: return "oracle";
        case FilterMode::Threshold: return "threshold";
    }
    return "?";
}

inline FilterMode filter_mode_from_string(const std::string& s) {
    if (s == "none") return FilterMode::None;
    if (s == "oracle") return FilterMode::OracleJumps;
    if (s == "threshold") return FilterMode::Threshold;
    throw ConfigError("unknown filter mode '" + s + "' (expected none, oracle or threshold)");
}

/// How the continuous martingale part dY^c is extracted from raw increments.
/// Threshold mode removes every increment with ||dY|| > c * dt^exponent.
struct ContinuousPartOptions {
    FilterMode mode = FilterMode::None;
    std::optional<double> threshold_c;  // default: 4 * sqrt(max diag Sigma)
    double threshold_exponent = 0.49;

    void validate() const {
        if (threshold_c && !(*threshold_c > 0.0)) {
            throw ConfigError("threshold_c must be > 0");
        }
        if (!(threshold_exponent > 0.0 && threshold_exponent < 0.5)) {
            throw ConfigError("threshold exponent must lie in (0, 1/2)");
        }
    }

    [[nodiscard]] ContinuousPartOptions resolved(const Mat& sigma) const {
        ContinuousPartOptions out = *this;
        if (!out.threshold_c) {
            out.threshold_c = 4.0 * std::sqrt(sigma.diagonal().maxCoeff());
        }
        return out;
    }
};

/// Outcome of jump filtering. The confusion counts compare the threshold
/// decision per interval against the recorded jump marks.
struct FilterReport {
    FilterMode mode = FilterMode::None;
    std::int64_t removed = 0;
    std::int64_t true_positive = 0;
    std::int64_t false_positive = 0;
    std::int64_t false_negative = 0;
    std::int64_t true_negative = 0;

    [[nodiscard]] double recall() const noexcept {
        const auto pos = true_positive + false_negative;
        return pos == 0 ? 1.0 : static_cast<double>(true_positive) / static_cast<double>(pos);
    }
    [[nodiscard]] bool perfect() const noexcept { return false_positive == 0 && false_negative == 0; }
};

struct ContinuousIncrements {
    Mat increments;  // d x N, column k is the filtered increment over (t_k, t_{k+1}]
    FilterReport report;
};

inline ContinuousIncrements continuous_increments(const SamplePath& path, const ContinuousPartOptions& opts) {
    opts.validate();
    const std::int64_t n = path.steps();
    ContinuousIncrements out;
    out.report.mode = opts.mode;
    out.increments = path.values().rightCols(n) - path.values().leftCols(n);

    switch (opts.mode) {
        case FilterMode::None: break;
        case FilterMode::OracleJumps: {
            std::vector<char> touched(static_cast<std::size_t>(n), 0);
            for (const auto& m : path.jump_marks) {
                if (m.interval < 0 || m.interval >= n) {
                    continue;
                }
                out.increments.col(m.interval) -= m.size;
                touched[static_cast<std::size_t>(m.interval)] = 1;
            }
            out.report.removed = std::count(touched.begin(), touched.end(), 1);
            break;
        }
        case FilterMode::Threshold: {
            if (!path.has_dt()) {
                throw ContractViolation("threshold filtering needs the sampling interval of the path");
            }
            if (!opts.threshold_c) {
                throw ContractViolation("threshold filtering needs threshold_c (call resolved())");
            }
            const double cut = *opts.threshold_c * std::pow(path.dt(), opts.threshold_exponent);
            std::vector<char> truth(static_cast<std::size_t>(n), 0);
            for (const auto& m : path.jump_marks) {
                if (m.interval >= 0 && m.interval < n) {
                    truth[static_cast<std::size_t>(m.interval)] = 1;
                }
            }
            for (std::int64_t k = 0; k < n; ++k) {
                const bool flagged = out.increments.col(k).norm() > cut;
                const bool jump = truth[static_cast<std::size_t>(k)] != 0;
                if (flagged) {
                    out.increments.col(k).setZero();
                    ++out.report.removed;
                }
                if (flagged && jump) ++out.report.true_positive;
                if (flagged && !jump) ++out.report.false_positive;
                if (!flagged && jump) ++out.report.false_negative;
                if (!flagged && !jump) ++out.report.true_negative;
            }
            break;
        }
    }
    return out;
}

/// Sufficient statistics of the continuous-observation likelihood.
///
/// theta part: h = H_t and h_quad = [H]_t.
/// psi part:   i_vec = -vec(Sigma^{-1} int dY^c Y^T) and [I]_t = K_t (x) Sigma^{-1},
///             kept factored as (k, sigma_inv) unless i_quad_full is set
///             (time-varying Sigma).
struct LikelihoodStats {
    int d = 0;
    double t_end = 0.0;
    std::int64_t steps = 0;

    bool has_theta = false;
    Vec h;
    Mat h_quad;

    bool has_psi = false;
    Vec i_vec;
    Mat k;
    Mat sigma;
    Mat sigma_inv;
    Mat dyc_y;                       // int dY^c Y^T, d x d
    std::optional<Mat> i_quad_full;  // dense [I]_t when Sigma varies in time

    FilterReport filter;

    static constexpr int max_dense_dim = 12;

    /// [I]_t psi without forming the Kronecker product.
    [[nodiscard]] Vec i_quad_apply(const Vec& psi) const {
        if (i_quad_full) {
            return *i_quad_full * psi;
        }
        return vec(sigma_inv * vec_inverse(psi) * k);
    }

    [[nodiscard]] Mat i_quad_dense() const {
        if (i_quad_full) {
            return *i_quad_full;
        }
        if (d > max_dense_dim) {
            throw ContractViolation("[I]_t is only expanded for d <= 12");
        }
        return kron(k, sigma_inv);
    }

    /// Diagonal of [I]_t: entry (i, j) of vec order is K_jj * (Sigma^{-1})_ii.
    [[nodiscard]] Vec i_quad_diagonal() const {
        if (i_quad_full) {
            return i_quad_full->diagonal();
        }
        Vec out(d * d);
        for (int j = 0; j < d; ++j) {
            for (int i = 0; i < d; ++i) {
                out[j * d + i] = k(j, j) * sigma_inv(i, i);
            }
        }
        return out;
    }
};

namespace detail {

inline Mat inverse_spd(const Mat& sigma, const std::string& what) {
    if (sigma.rows() != sigma.cols()) {
        throw DimensionError(what + " is not square");
    }
    Eigen::LLT<Mat> llt(sigma);
    if (llt.info() != Eigen::Success) {
        throw NumericError(what + " is singular or not positive definite (Cholesky factorisation failed)");
    }
    Mat inv = llt.solve(Mat::Identity(sigma.rows(), sigma.cols()));
    return 0.5 * (inv + inv.transpose());
}

/// Single pass over a path accumulating both parts of the statistics,
/// with snapshots after the requested numbers of steps.
/// `sigma_inv_at(k)` returns Sigma^{-1} to use at grid point k.
template <class SigmaInvAt>
std::vector<LikelihoodStats> accumulate_stats(const SamplePath& path, const Mat& a_bar, const Mat& increments,
                                              const std::vector<std::int64_t>& checkpoints, bool time_varying,
                                              SigmaInvAt&& sigma_inv_at, const Mat& sigma_const) {
    const int d = path.dim();
    const double dt = path.dt();
    std::vector<LikelihoodStats> out;
    out.reserve(checkpoints.size());

    Vec h = Vec::Zero(2);
    Mat h_quad = Mat::Zero(2, 2);
    Mat dyc_y = Mat::Zero(d, d);
    Mat k_mat = Mat::Zero(d, d);
    Vec i_vec_tv = Vec::Zero(d * d);
    Mat i_quad_tv;
    if (time_varying) {
        i_quad_tv = Mat::Zero(d * d, d * d);
    }
    Vec ay(d), wy(d), way(d), wdy(d);

    auto snapshot = [&](std::int64_t steps) {
        LikelihoodStats s;
        s.d = d;
        s.steps = steps;
        s.t_end = static_cast<double>(steps) * dt;
        s.has_theta = true;
        s.h = h;
        s.h_quad = h_quad;
        s.has_psi = true;
        s.k = k_mat;
        s.dyc_y = dyc_y;
        if (time_varying) {
            s.i_vec = i_vec_tv;
            s.i_quad_full = i_quad_tv;
            s.sigma = Mat();
            s.sigma_inv = Mat();
        } else {
            s.sigma = sigma_const;
            s.sigma_inv = sigma_inv_at(0);
            s.i_vec = -vec(s.sigma_inv * dyc_y);
        }
        out.push_back(std::move(s));
    };

    std::size_t next = 0;
    while (next < checkpoints.size() && checkpoints[next] == 0) {
        snapshot(0);
        ++next;
    }
    for (std::int64_t k = 0; k < path.steps() && next < checkpoints.size(); ++k) {
        const auto y = path.point(k);
        const auto dy = increments.col(k);
        const Mat& sinv = sigma_inv_at(k);
        ay.noalias() = a_bar * y;
        wy.noalias() = sinv * y;
        way.noalias() = sinv * ay;
        h[0] -= way.dot(dy);
        h[1] -= wy.dot(dy);
        h_quad(0, 0) += ay.dot(way) * dt;
        h_quad(0, 1) += ay.dot(wy) * dt;
        h_quad(1, 1) += y.dot(wy) * dt;
        dyc_y.noalias() += dy * y.transpose();
        k_mat.noalias() += (y * y.transpose()) * dt;
        if (time_varying) {
            // -(y (x) Sigma_k^{-1}) dy and (y y^T (x) Sigma_k^{-1}) dt
            wdy.noalias() = sinv * dy;
            for (int j = 0; j < d; ++j) {
                i_vec_tv.segment(j * d, d) -= y[j] * wdy;
            }
            for (int j = 0; j < d; ++j) {
                for (int l = 0; l < d; ++l) {
                    i_quad_tv.block(j * d, l * d, d, d) += (y[j] * y[l] * dt) * sinv;
                }
            }
        }
        h_quad(1, 0) = h_quad(0, 1);
        while (next < checkpoints.size() && checkpoints[next] == k + 1) {
            snapshot(k + 1);
            ++next;
        }
    }
    if (next != checkpoints.size()) {
        throw ContractViolation("stats checkpoints must be non-decreasing and within the path");
    }
    return out;
}

}  // namespace detail

/// Statistics for both parametrisations at several horizons (given as step
/// counts, non-decreasing) from a single pass over the path.
inline std::vector<LikelihoodStats> compute_stats_at(const SamplePath& path, const Graph& g, const Mat& sigma,
                                                     const ContinuousPartOptions& opts,
                                                     const std::vector<std::int64_t>& checkpoints) {
    if (g.size() != path.dim()) {
        throw DimensionError("graph size does not match path dimension");
    }
    const Mat sigma_inv = detail::inverse_spd(sigma, "Sigma");
    const ContinuousIncrements inc = continuous_increments(path, opts.resolved(sigma));
    auto stats = detail::accumulate_stats(
        path, row_normalize(g), inc.increments, checkpoints, false,
        [&sigma_inv](std::int64_t) -> const Mat& { return sigma_inv; }, sigma);
    for (auto& s : stats) {
        s.filter = inc.report;
    }
    return stats;
}

inline LikelihoodStats compute_stats(const SamplePath& path, const Graph& g, const Mat& sigma,
                                     const ContinuousPartOptions& opts) {
    return compute_stats_at(path, g, sigma, opts, {path.steps()}).front();
}

/// H_t = -(int <A_bar Y, dY^c>_Sigma, int <Y, dY^c>_Sigma) and [H]_t, by
/// left-point sums.
inline LikelihoodStats compute_theta_stats(const SamplePath& path, const Graph& g, const Mat& sigma,
                                           const ContinuousPartOptions& opts) {
    LikelihoodStats s = compute_stats(path, g, sigma, opts);
    s.has_psi = false;
    return s;
}

/// I_t = -int Y (x) Sigma^{-1} dY^c and K_t = int Y Y^T ds.
inline LikelihoodStats compute_psi_stats(const SamplePath& path, const Mat& sigma, const ContinuousPartOptions& opts) {
    LikelihoodStats s = compute_stats(path, Graph::edgeless(path.dim()), sigma, opts);
    s.has_theta = false;
    s.h = Vec();
    s.h_quad = Mat();
    return s;
}

/// Statistics with a time-varying Sigma_k^{-1} inside every inner product,
/// used for estimation conditional on a known volatility path.
inline std::vector<LikelihoodStats> compute_stats_time_varying_at(const SamplePath& path, const Graph& g,
                                                                  const std::vector<Mat>& sigma_inv_path,
                                                                  const ContinuousPartOptions& opts,
                                                                  const std::vector<std::int64_t>& checkpoints) {
    if (static_cast<std::int64_t>(sigma_inv_path.size()) < path.steps()) {
        throw ContractViolation("volatility path shorter than the sample path");
    }
    ContinuousPartOptions o = opts;
    if (!o.threshold_c) {
        double max_var = 0.0;
        for (const auto& s : sigma_inv_path) {
            max_var = std::max(max_var, sym_pinv(s).diagonal().maxCoeff());
        }
        o.threshold_c = 4.0 * std::sqrt(max_var);
    }
    const ContinuousIncrements inc = continuous_increments(path, o);
    auto stats = detail::accumulate_stats(
        path, row_normalize(g), inc.increments, checkpoints, true,
        [&sigma_inv_path](std::int64_t k) -> const Mat& { return sigma_inv_path[static_cast<std::size_t>(k)]; },
        Mat());
    for (auto& s : stats) {
        s.filter = inc.report;
    }
    return stats;
}

inline double log_likelihood_theta(const LikelihoodStats& stats, const Vec& theta) {
    if (!stats.has_theta) {
        throw ContractViolation("log_likelihood_theta: theta statistics not filled");
    }
    return theta.dot(stats.h) - 0.5 * theta.dot(stats.h_quad * theta);
}

inline double log_likelihood_theta(const LikelihoodStats& stats, const ThetaParams& theta) {
    return log_likelihood_theta(stats, theta.as_vector());
}

inline double log_likelihood_psi(const LikelihoodStats& stats, const Vec& psi) {
    if (!stats.has_psi) {
        throw ContractViolation("log_likelihood_psi: psi statistics not filled");
    }
    if (psi.size() != static_cast<Eigen::Index>(stats.d) * stats.d) {
        throw DimensionError("log_likelihood_psi: psi has wrong length");
    }
    return psi.dot(stats.i_vec) - 0.5 * psi.dot(stats.i_quad_apply(psi));
}

}  // namespace grou
